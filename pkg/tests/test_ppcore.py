import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ppmcf.ppcore import (
    DomainError, Factorization, Interleaver, PolySpec, compose, count_quadratic_pps,
    divisors, enumerate_quadratic_pps, evaluate, evaluate_all, evaluate_at, factorize, inverse,
    is_pp_general, is_prime, is_quadratic_pp, materialize, minimal_representation,
    permutation_order, permutation_power, polynomial_representations, quadratic_inverses,
    quadratic_pp_case, quadratic_pp_table,
)

from oracles import eval_poly, is_bijection

REFERENCE_QPPS = [
    (256, (159, 64), (95, 64)),
    (1024, (31, 64), (991, 64)),
    (4096, (2113, 128), (4033, 1920)),
    (15120, (11, 210), (14891, 210)),
]


# --- factorize ---------------------------------------------------------------

@pytest.mark.parametrize("n, expected", [
    (3888, {2: 4, 3: 5}),
    (2, {2: 1}),
    (15120, {2: 4, 3: 3, 5: 1, 7: 1}),
    (257, {257: 1}),
    (2 * 999983, {2: 1, 999983: 1}),
])
def test_factorize(n, expected):
    assert factorize(n).exponents == expected


@pytest.mark.parametrize("n", [0, 1, -5])
def test_factorize_rejects_small(n):
    with pytest.raises(DomainError):
        factorize(n)


@given(st.integers(min_value=2, max_value=10**6))
def test_factorization_invariants(n):
    fac = factorize(n)
    assert math.prod(p**e for p, e in fac.exponents.items()) == n
    assert all(e >= 1 for e in fac.exponents.values())
    assert all(all(p % d for d in range(2, math.isqrt(p) + 1)) for p in fac.exponents)


def test_factorization_type_rejects_bad_product():
    with pytest.raises(DomainError):
        Factorization(12, {2: 1, 3: 1})


def test_divisor_count_15120():
    assert len(divisors(15120)) == 80
    assert divisors(256) == [2**k for k in range(9)]


# --- quadratic criterion -----------------------------------------------------

@pytest.mark.parametrize("N, f1, f2, expected", [
    (256, 159, 64, True),
    (256, 2, 64, False),
    (8, 1, 2, True),
    (256, 159, 0, True),
    (257, 5, 17, False),
])
def test_is_quadratic_pp_examples(N, f1, f2, expected):
    assert is_quadratic_pp(N, f1, f2) is expected


def test_case_two_against_exhaustive():
    # N = 6 has 2 || N; (1, 3) has f1 + f2 even
    assert quadratic_pp_case(6) == 2
    assert is_quadratic_pp(6, 1, 3) is is_bijection(6, [1, 3]) is False
    assert is_quadratic_pp(6, 1, 0) is is_bijection(6, [1, 0]) is True


@pytest.mark.parametrize("N, f1, f2", [(256, 256, 1), (256, 1, -1), (1, 0, 0)])
def test_is_quadratic_pp_domain(N, f1, f2):
    with pytest.raises(DomainError):
        is_quadratic_pp(N, f1, f2)


@pytest.mark.parametrize("N", [2, 3, 4, 6, 9, 10, 12, 18, 20, 30, 36, 50, 64])
def test_criterion_matches_bruteforce_small(N):
    for f1 in range(N):
        for f2 in range(N):
            assert is_quadratic_pp(N, f1, f2) == is_bijection(N, [f1, f2]), (N, f1, f2)


@pytest.mark.parametrize("N", [2, 6, 16, 30, 45, 72, 98])
def test_table_matches_scalar_criterion(N):
    table = quadratic_pp_table(N)
    assert table.shape == (N, N)
    expected = [[is_quadratic_pp(N, f1, f2) for f2 in range(N)] for f1 in range(N)]
    assert table.tolist() == expected
    assert int(table[:, 1:].sum()) == count_quadratic_pps(N)


# --- evaluation and materialization ------------------------------------------

def test_evaluate_examples():
    p = PolySpec(256, (159, 64))
    assert evaluate(p, 1) == 223
    assert evaluate(p, 0) == 0
    assert evaluate(PolySpec(15120, (11, 210)), 2) == 862


def test_evaluate_domain():
    with pytest.raises(DomainError):
        evaluate(PolySpec(8, (1, 2)), 8)


@given(
    st.integers(min_value=2, max_value=2**20),
    st.lists(st.integers(min_value=0), min_size=1, max_size=8),
    st.integers(min_value=0),
)
def test_evaluate_exact_large(N, raw, x):
    coeffs = tuple(c % N for c in raw)
    x %= N
    assert evaluate(PolySpec(N, coeffs), x) == eval_poly(N, coeffs, x)


@given(
    st.integers(min_value=2, max_value=2**32 - 1),
    st.lists(st.integers(min_value=0), min_size=1, max_size=8),
    st.lists(st.integers(min_value=0), min_size=1, max_size=20),
)
def test_evaluate_at_no_overflow(N, raw, raw_x):
    coeffs = tuple(c % N for c in raw)
    xs = [x % N for x in raw_x] + [N - 1]
    got = evaluate_at(PolySpec(N, coeffs), xs)
    assert got.tolist() == [eval_poly(N, coeffs, x) for x in xs]


def test_evaluate_all_matches_pointwise():
    spec = PolySpec(4093, (4092, 4091, 4090))
    assert evaluate_all(spec).tolist() == [eval_poly(4093, spec.coeffs, x) for x in range(4093)]


def test_materialize_examples():
    assert materialize(PolySpec(8, (1, 2))).mapping.tolist() == [0, 3, 2, 5, 4, 7, 6, 1]
    assert materialize(PolySpec(4, (1,))).mapping.tolist() == [0, 1, 2, 3]
    assert materialize(PolySpec(256, (159, 64)))[1] == 223


def test_materialize_rejects_collision():
    with pytest.raises(DomainError, match=r"f\(0\) = f\(2\)"):
        materialize(PolySpec(8, (0, 2)))


def test_is_pp_general():
    assert is_pp_general(PolySpec(256, (159, 64)))
    assert is_pp_general(PolySpec(97, (1,)))
    assert not is_pp_general(PolySpec(8, (0, 2)))


def test_interleaver_rejects_non_bijection():
    with pytest.raises(DomainError):
        Interleaver([0, 1, 1])
    with pytest.raises(DomainError):
        Interleaver([0, 3])


def test_interleaver_roundtrip():
    pi = materialize(PolySpec(256, (159, 64)))
    data = np.random.default_rng(0).normal(size=256)
    assert np.array_equal(pi.deinterleave(pi.interleave(data)), data)
    assert np.array_equal(pi.inverse().mapping[pi.mapping], np.arange(256))


# --- composition and inverse -------------------------------------------------

def test_compose_identity():
    f = PolySpec(256, (159, 64))
    assert compose(PolySpec.identity(256), f) == f
    assert compose(f, PolySpec.identity(256)) == f


def test_compose_reference_pair_is_identity():
    c = compose(PolySpec(256, (159, 64)), PolySpec(256, (95, 64)))
    assert np.array_equal(evaluate_all(c), np.arange(256))


def test_compose_pointwise_z8():
    f = PolySpec(8, (1, 2))
    c = compose(f, f)
    assert [evaluate(c, x) for x in range(8)] == [eval_poly(8, [1, 2], eval_poly(8, [1, 2], x)) for x in range(8)]


def test_compose_modulus_mismatch():
    with pytest.raises(DomainError):
        compose(PolySpec(8, (1,)), PolySpec(16, (1,)))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_compose_closure(data):
    N = data.draw(st.sampled_from([8, 12, 16, 30, 64, 90, 128, 256, 512]))
    pps = list(enumerate_quadratic_pps(N)) or [(1, 0)]
    a = data.draw(st.sampled_from(pps))
    b = data.draw(st.sampled_from(pps))
    pa, pb = PolySpec(N, a), PolySpec(N, b)
    c = compose(pa, pb)
    assert is_pp_general(c)
    xs = np.arange(N)
    assert np.array_equal(evaluate_all(c), evaluate_all(pa)[evaluate_all(pb)[xs]])


@pytest.mark.parametrize("N, f, g", REFERENCE_QPPS)
def test_inverse_reference(N, f, g):
    inv = inverse(PolySpec(N, f))
    assert inv.coeffs == g
    fv = evaluate_all(PolySpec(N, f))
    assert np.array_equal(evaluate_all(inv)[fv], np.arange(N))


@pytest.mark.parametrize("N, f, g", REFERENCE_QPPS)
def test_quadratic_inverses_contain_table_entry(N, f, g):
    reps = quadratic_inverses(PolySpec(N, f))
    assert PolySpec(N, g) in reps
    if N == 256:
        # exhaustive scan of all (g1, g2) pairs, vectorised over g1
        y = np.array([eval_poly(N, f, x) for x in range(N)])
        g1 = np.arange(N)[:, None]
        brute = []
        for g2 in range(N):
            hit = np.all((g1 * y + g2 * y * y) % N == np.arange(N), axis=1)
            brute += [(int(a), g2) for a in np.flatnonzero(hit)]
        assert brute == [r.coeffs for r in reps]


def test_inverse_rejects_non_pp():
    with pytest.raises(DomainError):
        inverse(PolySpec(8, (0, 2)))


def test_inverse_cubic():
    f = PolySpec(16, (1, 2, 4))
    assert is_pp_general(f)
    g = inverse(f)
    assert np.array_equal(evaluate_all(g)[evaluate_all(f)], np.arange(16))


def test_permutation_power_and_order():
    pi = materialize(PolySpec(256, (159, 64))).mapping
    k = permutation_order(pi)
    assert np.array_equal(permutation_power(pi, k), np.arange(256))
    # naive iterated composition agrees
    acc = np.arange(256)
    for _ in range(k - 1):
        acc = pi[acc]
    assert np.array_equal(acc, permutation_power(pi, k - 1))
    assert np.array_equal(acc[pi], np.arange(256))


@pytest.mark.parametrize("N", [8, 12, 16, 27])
def test_polynomial_representations_bruteforce(N):
    # every quadratic map from a brute-force double loop is recovered, and nothing else
    rng = np.random.default_rng(N)
    for _ in range(5):
        f1, f2 = (int(v) for v in rng.integers(0, N, 2))
        vals = [eval_poly(N, (f1, f2), x) for x in range(N)]
        brute = sorted(
            ((a, b) for a in range(N) for b in range(N)
             if all(eval_poly(N, (a, b), x) == vals[x] for x in range(N))),
            key=lambda c: (c[1], c[0]),
        )
        got = [r.coeffs for r in polynomial_representations(vals, N, 2)]
        assert got == brute


def test_minimal_representation_degree():
    # x^2 + x = x(x+1) is even, so 4x^2 + 4x vanishes mod 8
    vals = evaluate_all(PolySpec(8, (5, 4)))
    assert minimal_representation(vals, 8) == PolySpec(8, (1,))


# --- counting ----------------------------------------------------------------

def test_count_256():
    assert count_quadratic_pps(256) == 16256 == 128 * 127


@pytest.mark.parametrize("k", range(3, 10))
def test_count_powers_of_two(k):
    assert count_quadratic_pps(2**k) == 2 ** (2 * k - 2) - 2 ** (k - 1)


def test_count_8_bruteforce():
    brute = sum(is_bijection(8, [a, b]) for a in range(8) for b in range(1, 8))
    assert count_quadratic_pps(8) == brute == 12


@pytest.mark.parametrize("N", [3, 5, 7, 31, 127, 257, 509])
def test_count_odd_primes_zero(N):
    assert is_prime(N)
    assert count_quadratic_pps(N) == 0


def test_count_two_is_one():
    # x^2 = x on Z_2, so the only prime modulus with a quadratic PP is 2
    assert is_bijection(2, [0, 1])
    assert count_quadratic_pps(2) == 1
    assert list(enumerate_quadratic_pps(2)) == [(0, 1)]


@pytest.mark.parametrize("N", [6, 10, 12, 30, 36, 60, 90])
def test_count_matches_enumeration(N):
    enum = list(enumerate_quadratic_pps(N))
    assert count_quadratic_pps(N) == len(enum)
    assert all(is_bijection(N, [a, b]) for a, b in enum)


# --- modulus reduction --------------------------------------------------------

@given(
    st.integers(min_value=-10**9, max_value=10**9),
    st.integers(min_value=-1000, max_value=1000),
    st.integers(min_value=1, max_value=1000),
    st.integers(min_value=1, max_value=1000),
)
def test_modulus_reduction(y, k, W, M):
    N = W * M
    x = y + k * N
    assert x % N == y % N
    assert x % M == y % M


@given(st.integers(min_value=1, max_value=64), st.integers(min_value=1, max_value=16), st.data())
def test_pp_reduces_to_window_pp(W, M, data):
    N = W * M
    assume(N >= 2)
    pps = list(enumerate_quadratic_pps(N))
    if not pps:
        return
    f1, f2 = data.draw(st.sampled_from(pps))
    fv = evaluate_all(PolySpec(N, (f1, f2)))
    # f(j + tW) mod W depends only on j
    assert np.all((fv.reshape(M, W) % W) == (fv[:W] % W))
