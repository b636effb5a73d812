import pytest
from hypothesis import given, strategies as st

from qmacv.rings import SampledRing, SymbolicRing
from qmacv.scalar import ONE, Q, T, q, t
from qmacv.series import (
    RatioSeries, SeriesError, WindowError, expand_qbinomial, geometric_terms, monomials, ratio_exponent,
    ratio_to_zeta, zeta_substitute, zeta_to_ratio,
)


def series(n, cap, data):
    return RatioSeries(n, cap, {e: c for e, c in data})


def random_series(n, cap):
    exps = st.sampled_from(monomials(n - 1, cap))
    return st.lists(st.tuples(exps, st.integers(-3, 3)), max_size=6).map(lambda d: series(n, cap, d))


def test_truncated_square():
    f = RatioSeries(2, 1, {(0,): 1, (1,): 1})
    assert f * f == RatioSeries(2, 1, {(0,): 1, (1,): 2})


def test_geometric_inverse():
    N = 6
    geo = geometric_terms(2, N, (1,), lambda k: 1)
    one_minus = RatioSeries(2, N, {(0,): 1, (1,): -1})
    assert one_minus * geo == RatioSeries.constant(2, N, 1)


def test_zeta_ratios():
    assert ratio_exponent(3, 1, 3) == (1, 1)
    assert zeta_to_ratio(3, (-1, 0, 1)) == (1, 1)
    assert ratio_to_zeta((1, 1)) == (-1, 0, 1)


def test_zeta_substitute_vandermonde():
    lin = lambda k: (1, -1)[k] if k < 2 else 0
    f = zeta_substitute(3, 4, [(i, j, lin) for i, j in ((1, 2), (1, 3), (2, 3))])
    x1 = RatioSeries(3, 4, {(0, 0): 1, (1, 0): -1})
    x2 = RatioSeries(3, 4, {(0, 0): 1, (0, 1): -1})
    x12 = RatioSeries(3, 4, {(0, 0): 1, (1, 1): -1})
    assert f == x1 * x2 * x12


def test_degree_of_ratio():
    for i in range(1, 4):
        for j in range(i + 1, 5):
            assert sum(ratio_exponent(4, i, j)) == j - i


def test_qbinomial_collapses():
    ring = SymbolicRing()
    a = T * Q**3
    assert expand_qbinomial(a, a, ((1,), 1), 2, 6, ring) == RatioSeries.constant(2, 6, ONE)
    geo = geometric_terms(2, 6, (1,), lambda k: ONE)
    assert expand_qbinomial(q, ONE, ((1,), 1), 2, 6, ring) == geo


def test_qbinomial_functional_equation():
    # F(z) = (az;q)_inf/(bz;q)_inf solves (1 - bz) F(z) = (1 - az) F(qz)
    ring = SymbolicRing()
    a, b = q / t, t
    F = expand_qbinomial(a, b, ((1,), 1), 2, 7, ring)
    c = [F.coefficient((k,)) for k in range(8)]
    for k in range(1, 8):
        assert c[k] - b * c[k - 1] == q**k * c[k] - a * q ** (k - 1) * c[k - 1]


def test_h_function_at_sample_point():
    # (1 - z)(q t^-1 z;q)_inf/(t z;q)_inf at a rational point, two routes
    pt = {"Q": 3, "T": 5}
    sym = expand_qbinomial(q / t, t, ((1,), 1), 2, 5, SymbolicRing())
    lin = RatioSeries(2, 5, {(0,): 1, (1,): -1})
    h_sym = (lin * sym).map_coeffs(lambda c: c.eval(pt))
    ring = SampledRing(pt)
    h_num = lin * expand_qbinomial(ring.q / ring.t, ring.t, ((1,), 1), 2, 5, ring)
    assert h_sym == h_num


def test_laurent_shift():
    one = RatioSeries.constant(2, 3, 1, window=(-2,))
    assert one.laurent_shift(0, -1) == RatioSeries.monomial(2, 3, (-1,), 1, window=(-2,))
    with pytest.raises(WindowError):
        one.laurent_shift(0, -3)


def test_window_violation():
    with pytest.raises(WindowError):
        RatioSeries(2, 3, {(-1,): 1})
    with pytest.raises(SeriesError):
        RatioSeries(3, 3, {(1,): 1})


@given(random_series(3, 4), random_series(3, 4), random_series(3, 4))
def test_ring_axioms(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()


@given(random_series(2, 5), st.integers(-2, 2))
def test_shift_inverse(f, m):
    g = f.with_window((-3,))
    back = g.laurent_shift(0, m).laurent_shift(0, -m)
    assert back == g.truncate(g.cap - max(m, 0))


@given(random_series(3, 5))
def test_terms_respect_cap(f):
    assert all(sum(e) <= f.cap and c != 0 for e, c in f.terms.items())
