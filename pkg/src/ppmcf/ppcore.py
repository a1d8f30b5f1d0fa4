"""Number theory over Z_N: factorization, permutation-polynomial tests,
evaluation, composition and inversion.

Polynomials never carry a constant term; ``PolySpec.coeffs[i]`` is the
coefficient of ``x**(i + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside an operation's domain."""


# ---------------------------------------------------------------------------
# Factorization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factorization:
    value: int
    exponents: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        prod = 1
        for p, e in self.exponents.items():
            if e < 1:
                raise DomainError(f"exponent of {p} must be >= 1, got {e}")
            prod *= p**e
        if prod != self.value:
            raise DomainError(f"factors multiply to {prod}, not {self.value}")

    @property
    def primes(self) -> list[int]:
        return sorted(self.exponents)

    def exponent(self, p: int) -> int:
        return self.exponents.get(p, 0)

    def radical(self, skip: Sequence[int] = ()) -> int:
        """Product of the distinct primes, leaving out those in `skip`."""
        r = 1
        for p in self.exponents:
            if p not in skip:
                r *= p
        return r

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in sorted(self.exponents.items()):
            divs = [d * p**k for d in divs for k in range(e + 1)]
        return sorted(divs)

    def __str__(self):
        if not self.exponents:
            return "1"
        return " * ".join(
            f"{p}^{e}" if e > 1 else str(p) for p, e in sorted(self.exponents.items())
        )


def factorize(n: int) -> Factorization:
    """Prime factorization by trial division."""
    n = int(n)
    if n < 2:
        raise DomainError(f"factorize needs n >= 2, got {n}")
    exps: dict[int, int] = {}
    m = n
    for p in (2, 3):
        while m % p == 0:
            exps[p] = exps.get(p, 0) + 1
            m //= p
    # 6k +- 1 wheel
    p = 5
    while p * p <= m:
        for q in (p, p + 2):
            while m % q == 0:
                exps[q] = exps.get(q, 0) + 1
                m //= q
        p += 6
    if m > 1:
        exps[m] = exps.get(m, 0) + 1
    return Factorization(n, exps)


def divisors(n: int) -> list[int]:
    if n == 1:
        return [1]
    return factorize(n).divisors()


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n).exponents == {n: 1}


# ---------------------------------------------------------------------------
# Polynomials and interleavers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolySpec:
    """Polynomial ``sum(coeffs[i] * x**(i+1)) mod modulus``."""

    modulus: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if self.modulus < 2:
            raise DomainError(f"modulus must be >= 2, got {self.modulus}")
        if not self.coeffs:
            raise DomainError("a polynomial needs at least one coefficient")
        for c in self.coeffs:
            if not 0 <= c < self.modulus:
                raise DomainError(f"coefficient {c} outside [0, {self.modulus})")

    @classmethod
    def quadratic(cls, N: int, f1: int, f2: int) -> "PolySpec":
        return cls(N, (f1, f2))

    @classmethod
    def identity(cls, N: int) -> "PolySpec":
        return cls(N, (1,))

    @property
    def degree(self) -> int:
        """Declared degree (length of the coefficient vector)."""
        return len(self.coeffs)

    @property
    def effective_degree(self) -> int:
        for i in range(len(self.coeffs) - 1, -1, -1):
            if self.coeffs[i]:
                return i + 1
        return 0

    def trimmed(self) -> "PolySpec":
        d = max(self.effective_degree, 1)
        return PolySpec(self.modulus, self.coeffs[:d])

    def __call__(self, x: int) -> int:
        return evaluate(self, x)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs, start=1):
            if c == 0:
                continue
            mono = "x" if i == 1 else f"x^{i}"
            terms.append(mono if c == 1 else f"{c}{mono}")
        return (" + ".join(terms) or "0") + f" (mod {self.modulus})"


class Interleaver:
    """A permutation ``pi`` of ``{0, ..., N-1}``.

    The mapping is stored as a read-only int64 array; construction fails
    unless every value occurs exactly once.
    """

    __slots__ = ("mapping",)

    def __init__(self, mapping):
        arr = np.array(mapping, dtype=np.int64).ravel()
        n = arr.size
        if n < 1:
            raise DomainError("an interleaver needs at least one element")
        if arr.min() < 0 or arr.max() >= n:
            raise DomainError(f"interleaver values must lie in [0, {n})")
        counts = np.bincount(arr, minlength=n)
        if not np.all(counts == 1):
            dup = int(np.flatnonzero(counts > 1)[0])
            raise DomainError(f"value {dup} appears {counts[dup]} times; not a bijection")
        arr.flags.writeable = False
        self.mapping = arr

    @property
    def N(self) -> int:
        return int(self.mapping.size)

    def __len__(self):
        return self.N

    def __getitem__(self, x):
        return self.mapping[x]

    def __eq__(self, other):
        if not isinstance(other, Interleaver):
            return NotImplemented
        return np.array_equal(self.mapping, other.mapping)

    def __hash__(self):
        return hash(self.mapping.tobytes())

    def __repr__(self):
        head = ", ".join(str(v) for v in self.mapping[:8])
        tail = ", ..." if self.N > 8 else ""
        return f"Interleaver(N={self.N}, [{head}{tail}])"

    def inverse(self) -> "Interleaver":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.N, dtype=np.int64)
        return Interleaver(inv)

    def interleave(self, data: np.ndarray) -> np.ndarray:
        """Return ``out[k] = data[pi(k)]``."""
        return np.asarray(data)[self.mapping]

    def deinterleave(self, data: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`interleave`: ``out[pi(k)] = data[k]``."""
        data = np.asarray(data)
        out = np.empty_like(data)
        out[self.mapping] = data
        return out

    @classmethod
    def identity(cls, N: int) -> "Interleaver":
        return cls(np.arange(N))


# ---------------------------------------------------------------------------
# Permutation tests
# ---------------------------------------------------------------------------

def quadratic_pp_case(N: int) -> int:
    """Which branch of the quadratic criterion applies: 2 when 2 || N, else 1."""
    return 2 if N % 2 == 0 and N % 4 != 0 else 1


def is_quadratic_pp(N: int, f1: int, f2: int) -> bool:
    """Closed-form test for ``f1*x + f2*x^2`` permuting Z_N.

    ``f2 = 0`` falls out of the same test as the linear criterion
    ``gcd(f1, N) = 1`` since 0 is divisible by every prime.
    """
    N, f1, f2 = int(N), int(f1), int(f2)
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if not (0 <= f1 < N and 0 <= f2 < N):
        raise DomainError(f"coefficients ({f1}, {f2}) must lie in [0, {N})")
    fac = factorize(N)
    if quadratic_pp_case(N) == 1:
        return math.gcd(f1, N) == 1 and f2 % fac.radical() == 0
    return (
        (f1 + f2) % 2 == 1
        and math.gcd(f1, N // 2) == 1
        and f2 % fac.radical(skip=(2,)) == 0
    )


def evaluate(spec: PolySpec, x: int) -> int:
    N = spec.modulus
    x = int(x)
    if not 0 <= x < N:
        raise DomainError(f"x = {x} outside [0, {N})")
    acc = 0
    for c in reversed(spec.coeffs):
        acc = (acc + c) * x % N
    return acc


def evaluate_at(spec: PolySpec, xs) -> np.ndarray:
    """Vectorised evaluation at the points `xs`, returned as int64.

    Horner steps run in uint64 with a reduction after every product, so
    operands stay below 2**32 and products below 2**64.
    """
    N = spec.modulus
    if N >= 2**32:
        raise DomainError("vectorised evaluation supports N < 2**32")
    n = np.uint64(N)
    x = np.asarray(xs, dtype=np.uint64) % n
    acc = np.zeros(x.shape, dtype=np.uint64)
    for c in reversed(spec.coeffs):
        acc = (acc + np.uint64(c)) % n
        acc = (acc * x) % n
    return acc.astype(np.int64)


def evaluate_all(spec: PolySpec) -> np.ndarray:
    """Values ``f(0), ..., f(N-1)``."""
    return evaluate_at(spec, np.arange(spec.modulus, dtype=np.uint64))


def is_pp_general(spec: PolySpec) -> bool:
    vals = evaluate_all(spec)
    return bool(np.all(np.bincount(vals, minlength=spec.modulus) == 1))


def materialize(spec: PolySpec) -> Interleaver:
    vals = evaluate_all(spec)
    seen = np.full(spec.modulus, -1, dtype=np.int64)
    for x, y in enumerate(vals.tolist()):
        if seen[y] >= 0:
            raise DomainError(
                f"{spec} is not a permutation: f({seen[y]}) = f({x}) = {y}"
            )
        seen[y] = x
    return Interleaver(vals)


def qpp(N: int, f1: int, f2: int) -> Interleaver:
    return materialize(PolySpec.quadratic(N, f1, f2))


# ---------------------------------------------------------------------------
# Composition and inversion
# ---------------------------------------------------------------------------

def _polymul(p: list[int], q: list[int], N: int) -> list[int]:
    # full coefficient lists including the constant slot
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] = (out[i + j] + a * b) % N
    return out


def compose(a: PolySpec, b: PolySpec) -> PolySpec:
    """Coefficients of ``a(b(x)) mod N``; trailing zero terms are dropped."""
    if a.modulus != b.modulus:
        raise DomainError(f"modulus mismatch: {a.modulus} vs {b.modulus}")
    N = a.modulus
    inner = [0, *b.coeffs]
    power = [1]
    result = [0]
    for c in a.coeffs:
        power = _polymul(power, inner, N)
        if c:
            if len(result) < len(power):
                result += [0] * (len(power) - len(result))
            for i, v in enumerate(power):
                result[i] = (result[i] + c * v) % N
    coeffs = result[1:] or [0]
    return PolySpec(N, tuple(coeffs)).trimmed()


def permutation_order(pi: np.ndarray) -> int:
    """Order of a permutation in its symmetric group (lcm of cycle lengths)."""
    pi = np.asarray(pi)
    seen = np.zeros(pi.size, dtype=bool)
    order = 1
    for start in range(pi.size):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = pi[x]
            length += 1
        order = math.lcm(order, length)
    return order


def permutation_power(pi: np.ndarray, k: int) -> np.ndarray:
    """``pi`` composed with itself ``k`` times, by repeated squaring."""
    pi = np.asarray(pi, dtype=np.int64)
    result = np.arange(pi.size, dtype=np.int64)
    base = pi
    while k:
        if k & 1:
            result = base[result]
        base = base[base]
        k >>= 1
    return result


def _stirling2_table(d: int) -> list[list[int]]:
    S = [[0] * (d + 1) for _ in range(d + 1)]
    S[0][0] = 1
    for i in range(1, d + 1):
        for k in range(1, i + 1):
            S[i][k] = k * S[i - 1][k] + S[i - 1][k - 1]
    return S


def _forward_differences(values: np.ndarray, N: int, depth: int) -> list[int]:
    """``Delta^k g(0) mod N`` for k = 0..depth."""
    diffs = [int(values[0]) % N]
    row = np.asarray(values, dtype=np.int64) % N
    for _ in range(depth):
        if row.size < 2:
            diffs.append(0)
            continue
        row = (row[1:] - row[:-1]) % N
        diffs.append(int(row[0]))
    return diffs


def _solve_linear_congruence(a: int, r: int, N: int) -> list[int]:
    g = math.gcd(a, N)
    if r % g:
        return []
    n = N // g
    c0 = (r // g) * pow(a // g, -1, n) % n if n > 1 else 0
    return [c0 + t * n for t in range(g)]


def polynomial_representations(
    values, N: int, degree: int, limit: int | None = None, node_budget: int = 200_000
) -> list[PolySpec]:
    """All polynomials of degree <= `degree` (no constant term) whose map on
    Z_N equals `values`.

    Works in the Newton basis: a polynomial function sum c_i x^i has k-th
    forward difference at 0 equal to k! * sum_i c_i S(i, k) where S are
    Stirling numbers of the second kind. Coefficients are solved from the
    top degree down as linear congruences; every candidate is then checked
    pointwise. Results come in increasing order of (c_d, ..., c_1).
    """
    values = np.asarray(values, dtype=np.int64) % N
    if values.size != N:
        raise DomainError(f"expected {N} values, got {values.size}")
    if values[0] != 0:
        return []
    b = _forward_differences(values, N, degree)
    S = _stirling2_table(degree)
    fact = [math.factorial(k) for k in range(degree + 1)]
    coeffs = [0] * (degree + 1)
    found: list[PolySpec] = []
    nodes = 0

    def descend(k: int) -> bool:
        nonlocal nodes
        if k == 0:
            spec = PolySpec(N, tuple(coeffs[1:]))
            if np.array_equal(evaluate_all(spec), values):
                found.append(spec)
            return limit is not None and len(found) >= limit
        s = sum(coeffs[i] * S[i][k] for i in range(k + 1, degree + 1))
        r = (b[k] - fact[k] * s) % N
        for c in _solve_linear_congruence(fact[k] % N, r, N):
            nodes += 1
            if nodes > node_budget:
                raise DomainError("representation search exceeded its node budget")
            coeffs[k] = c
            if descend(k - 1):
                return True
        coeffs[k] = 0
        return False

    descend(degree)
    return found


def minimal_representation(values, N: int, max_degree: int = 8) -> PolySpec:
    """Lowest-degree polynomial matching `values`; ties broken by smallest
    leading coefficients."""
    for d in range(1, max_degree + 1):
        reps = polynomial_representations(values, N, d, limit=1)
        if reps:
            return reps[0].trimmed()
    raise DomainError(f"no polynomial of degree <= {max_degree} represents this map mod {N}")


def inverse_permutation_by_composition(spec: PolySpec) -> np.ndarray:
    """Map of the inverse, as the (order - 1)-fold composite of `spec`."""
    pi = materialize(spec).mapping
    order = permutation_order(pi)
    return permutation_power(pi, order - 1)


def inverse(spec: PolySpec, max_degree: int = 8) -> PolySpec:
    """Inverse permutation polynomial.

    The inverse map is the composite of `spec` with itself order-1 times;
    its coefficients are recovered as the minimal-degree representation.
    """
    if not is_pp_general(spec):
        raise DomainError(f"{spec} is not a permutation polynomial")
    g = inverse_permutation_by_composition(spec)
    return minimal_representation(g, spec.modulus, max_degree)


def quadratic_inverses(spec: PolySpec) -> list[PolySpec]:
    """Every quadratic (g1, g2) pair representing the inverse of `spec`."""
    if not is_pp_general(spec):
        raise DomainError(f"{spec} is not a permutation polynomial")
    g = inverse_permutation_by_composition(spec)
    return polynomial_representations(g, spec.modulus, 2)


# ---------------------------------------------------------------------------
# Counting and enumeration
# ---------------------------------------------------------------------------

def _quadratic_masks(N: int) -> tuple[np.ndarray, np.ndarray]:
    fac = factorize(N)
    r = np.arange(N)
    if quadratic_pp_case(N) == 1:
        f1_ok = np.gcd(r, N) == 1
        f2_ok = r % fac.radical() == 0
    else:
        f1_ok = np.gcd(r, N // 2) == 1
        f2_ok = r % fac.radical(skip=(2,)) == 0
    return f1_ok, f2_ok


def quadratic_pp_table(N: int) -> np.ndarray:
    """Boolean ``table[f1, f2]`` of the closed-form criterion over all of Z_N x Z_N."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    f1_ok, f2_ok = _quadratic_masks(N)
    table = f1_ok[:, None] & f2_ok[None, :]
    if quadratic_pp_case(N) == 2:
        r = np.arange(N)
        table &= ((r[:, None] + r[None, :]) % 2) == 1
    return table


def count_quadratic_pps(N: int) -> int:
    """Number of pairs (f1, f2), f2 != 0, for which f1 x + f2 x^2 permutes Z_N."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    f1_ok, f2_ok = _quadratic_masks(N)
    f2_ok = f2_ok.copy()
    f2_ok[0] = False
    if quadratic_pp_case(N) == 1:
        return int(f1_ok.sum()) * int(f2_ok.sum())
    r = np.arange(N)
    odd1 = int((f1_ok & (r % 2 == 1)).sum())
    even1 = int((f1_ok & (r % 2 == 0)).sum())
    odd2 = int((f2_ok & (r % 2 == 1)).sum())
    even2 = int((f2_ok & (r % 2 == 0)).sum())
    return odd1 * even2 + even1 * odd2


def enumerate_quadratic_pps(N: int) -> Iterator[tuple[int, int]]:
    """Yield (f1, f2) with f2 != 0 in lexicographic order."""
    f1_ok, f2_ok = _quadratic_masks(N)
    case2 = quadratic_pp_case(N) == 2
    f2s = [int(v) for v in np.flatnonzero(f2_ok) if v]
    for f1 in np.flatnonzero(f1_ok).tolist():
        for f2 in f2s:
            if case2 and (f1 + f2) % 2 == 0:
                continue
            yield f1, f2
