"""Contention-free verification, spread factor, and baseline interleavers.

Window conventions: a frame of N = M*W symbols splits into M windows of W
symbols; position ``j + t*W`` is offset ``j`` of window ``t``. The bank
of an address ``a`` is ``a // W`` and its intra-bank address ``a % W``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .ppcore import DomainError, Interleaver, divisors


class ConstructionError(RuntimeError):
    """A randomized construction gave up after its attempt budget."""


@dataclass(frozen=True)
class WindowConfig:
    N: int
    W: int
    M: int

    def __post_init__(self):
        if self.W < 1 or self.M < 1 or self.N != self.W * self.M:
            raise DomainError(f"need N = W*M with W, M >= 1; got N={self.N}, W={self.W}, M={self.M}")

    @classmethod
    def from_window(cls, N: int, W: int) -> "WindowConfig":
        if W < 1 or N % W:
            raise DomainError(f"window size {W} does not divide N={N}")
        return cls(N, W, N // W)

    @classmethod
    def from_processors(cls, N: int, M: int) -> "WindowConfig":
        if M < 1 or N % M:
            raise DomainError(f"processor count {M} does not divide N={N}")
        return cls(N, N // M, M)

    def position(self, j: int, t: int) -> int:
        return j + t * self.W


@dataclass(frozen=True)
class Violation:
    direction: str  # "interleaver" or "deinterleaver"
    j: int
    t: int
    v: int
    bank: int


@dataclass(frozen=True)
class CFReport:
    W: int
    passed: bool
    violation: Violation | None = None

    def __post_init__(self):
        if self.passed != (self.violation is None):
            raise ValueError("passed must be True exactly when no violation is recorded")

    def as_dict(self) -> dict:
        d = {"W": self.W, "passed": self.passed, "violation": None}
        if self.violation is not None:
            v = self.violation
            d["violation"] = {"direction": v.direction, "j": v.j, "t": v.t, "v": v.v, "bank": v.bank}
        return d


def window_quotients(mapping: np.ndarray, W: int) -> np.ndarray:
    """Array ``Q[t, j] = mapping[j + t*W] // W`` of shape (M, W)."""
    mapping = np.asarray(mapping)
    return (mapping // W).reshape(-1, W)


def _first_violation_bucket(mapping: np.ndarray, W: int, direction: str) -> Violation | None:
    M = mapping.size // W
    if M == 1:
        return None
    Q = window_quotients(mapping, W)
    ok = np.all(np.sort(Q, axis=0) == np.arange(M)[:, None], axis=0)
    if ok.all():
        return None
    j = int(np.flatnonzero(~ok)[0])
    col = Q[:, j]
    for t in range(M - 1):
        later = np.flatnonzero(col[t + 1:] == col[t])
        if later.size:
            return Violation(direction, j, t, t + 1 + int(later[0]), int(col[t]))
    raise AssertionError("unreachable: column flagged but no repeat found")


def _first_violation_pairwise(mapping: np.ndarray, W: int, direction: str) -> Violation | None:
    M = mapping.size // W
    for j in range(W):
        for t in range(M):
            qt = int(mapping[j + t * W]) // W
            for v in range(t + 1, M):
                if qt == int(mapping[j + v * W]) // W:
                    return Violation(direction, j, t, v, qt)
    return None


def is_contention_free(pi: Interleaver, W: int, method: str = "bucket") -> CFReport:
    """Check the windowed contention-free condition for `pi` and its inverse.

    ``method="bucket"`` requires every offset to hit each bank exactly
    once; ``method="pairwise"`` compares all window pairs directly and is
    kept as a cross-check.
    """
    WindowConfig.from_window(pi.N, W)
    check = {"bucket": _first_violation_bucket, "pairwise": _first_violation_pairwise}[method]
    for direction, mapping in (("interleaver", pi.mapping), ("deinterleaver", pi.inverse().mapping)):
        viol = check(mapping, W, direction)
        if viol is not None:
            return CFReport(W, False, viol)
    return CFReport(W, True)


def is_mcf(pi: Interleaver, method: str = "bucket") -> dict[int, CFReport]:
    """One report per divisor W of N, in increasing W."""
    if pi.N == 1:
        return {1: CFReport(1, True)}
    return {W: is_contention_free(pi, W, method) for W in divisors(pi.N)}


def all_pass(reports: dict[int, CFReport]) -> bool:
    return all(r.passed for r in reports.values())


# ---------------------------------------------------------------------------
# Spread
# ---------------------------------------------------------------------------

def spread_factor(pi: Interleaver, exhaustive: bool = False) -> int:
    """min over i != j of |i - j| + |pi(i) - pi(j)|.

    Scans index distances d = 1, 2, ...; since every pair at distance d
    contributes at least d, the scan stops once d reaches the best value
    found. ``exhaustive=True`` visits every distance.
    """
    m = pi.mapping
    N = m.size
    if N < 2:
        raise DomainError("spread needs N >= 2")
    best = 2 * N
    for d in range(1, N):
        if not exhaustive and d >= best:
            break
        cand = d + int(np.abs(m[d:] - m[:-d]).min())
        if cand < best:
            best = cand
    return best


def spread_upper_bound(N: int) -> float:
    if N < 2:
        raise DomainError("N must be >= 2")
    return math.sqrt(2 * N)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

def satisfies_s_constraint(pi: Interleaver, S: int) -> bool:
    """True when inputs closer than S land at least S apart."""
    m = pi.mapping
    for d in range(1, min(S, m.size)):
        if np.any(np.abs(m[d:] - m[:-d]) < S):
            return False
    return True


@njit(cache=True)
def _s_random_attempt(pool, S, out):
    """Fill `out` from `pool` in order; return the count placed before a dead end."""
    N = pool.size
    used = np.zeros(N, dtype=np.bool_)
    for k in range(N):
        placed = False
        for idx in range(N):
            if used[idx]:
                continue
            cand = pool[idx]
            ok = True
            for back in range(1, min(S, k + 1)):
                if abs(cand - out[k - back]) < S:
                    ok = False
                    break
            if ok:
                out[k] = cand
                used[idx] = True
                placed = True
                break
        if not placed:
            return k
    return N


def generate_s_random(N: int, S: int, seed: int = 0, max_attempts: int = 100_000) -> Interleaver:
    """S-random interleaver: |i - j| < S implies |pi(i) - pi(j)| >= S.

    Positions are filled in order. Each one takes the first candidate,
    from a freshly shuffled pool of unused values, that keeps distance S
    from the previous S-1 placements. A dead end restarts the whole draw.
    """
    if N < 1 or S < 1:
        raise DomainError(f"need N >= 1 and S >= 1, got N={N}, S={S}")
    rng = np.random.default_rng(seed)
    out = np.empty(N, dtype=np.int64)
    for _ in range(max_attempts):
        pool = rng.permutation(N).astype(np.int64)
        if _s_random_attempt(pool, S, out) == N:
            return Interleaver(out)
    raise ConstructionError(f"no S-random interleaver with N={N}, S={S} after {max_attempts} attempts")


def counterexample_base() -> Interleaver:
    """4-point permutation that is not contention-free at W = 2."""
    return Interleaver([0, 2, 1, 3])


def direct_sum(base: Interleaver, copies: int) -> Interleaver:
    """Block-diagonal repetition: ``pi(b*n + i) = b*n + base(i)``."""
    n = base.N
    offs = np.repeat(np.arange(copies) * n, n)
    return Interleaver(offs + np.tile(base.mapping, copies))


def block_lift(base: Interleaver, block: int) -> Interleaver:
    """Permute whole blocks: ``pi(q*block + r) = base(q)*block + r``."""
    r = np.tile(np.arange(block), base.N)
    q = np.repeat(base.mapping, block)
    return Interleaver(q * block + r)


# ---------------------------------------------------------------------------
# File format: line 1 is N, then N lines with pi(0), ..., pi(N-1).
# Lines starting with '#' are comments.
# ---------------------------------------------------------------------------

def format_interleaver(pi: Interleaver) -> str:
    return "\n".join([str(pi.N), *map(str, pi.mapping.tolist())]) + "\n"


def parse_interleaver(text: str) -> Interleaver:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise DomainError("empty interleaver file")
    try:
        N = int(lines[0])
        values = [int(v) for v in lines[1:]]
    except ValueError as exc:
        raise DomainError(f"malformed interleaver file: {exc}") from None
    if len(values) != N:
        raise DomainError(f"header says N={N} but {len(values)} entries follow")
    return Interleaver(values)


def save_interleaver(pi: Interleaver, path) -> None:
    Path(path).write_text(format_interleaver(pi))


def load_interleaver(path) -> Interleaver:
    return parse_interleaver(Path(path).read_text())
