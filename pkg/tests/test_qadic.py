import flint
import pytest
from hypothesis import given, strategies as st

from qmacv.qadic import QAdicError, QSeries, _poly_inv, qadic_truncate, qseries_pochhammer_inf
from qmacv.scalar import ONE, Q, T, ZERO, q, qpoch, t

coeffs = st.lists(st.integers(-4, 4), min_size=1, max_size=5)


def qpoly(cs):
    out = ZERO
    for k, c in enumerate(cs):
        out = out + c * Q**k
    return out


def test_geometric_series():
    assert qadic_truncate(1 / (1 - q), 4) == QSeries(0, [1, 0, 1, 0, 1], 5)


def test_truncated_infinite_product():
    M = 9
    lhs = QSeries.const(1)
    for k in range(M // 2 + 1):
        lhs = lhs * qadic_truncate(1 - Q ** (2 * k + 2) / T**2, None)
    lhs = lhs.truncate(M)
    a = qadic_truncate(q / t, None)
    rhs = qseries_pochhammer_inf(a, qadic_truncate(q, None), M + 1)
    assert lhs == rhs


def test_pole_at_zero_rejected():
    with pytest.raises(QAdicError):
        qadic_truncate(1 / Q, 4)
    f = qadic_truncate(1 / (Q - Q**3), 4, allow_laurent=True)
    assert f.valuation() == -1


def test_poly_inverse_beyond_default_precision():
    # flint's own series inverse silently caps at a context precision
    p = flint.fmpq_poly([1, -1])
    g = _poly_inv(p, 40)
    assert g == flint.fmpq_poly([1] * 40)
    assert qadic_truncate(1 / (1 - Q), 30).coefficient(30) == 1


def test_symbolic_coefficients():
    f = qadic_truncate(1 / (1 - T * Q), 3)
    assert [f.coefficient(k) for k in range(4)] == [ONE, T, T**2, T**3]


def test_first_difference():
    a = qadic_truncate(1 / (1 - q), 8)
    b = qadic_truncate(1 / (1 - q) + Q**6, 8)
    assert a.first_difference(b) == 6
    assert a.first_difference(a) is None


@given(coeffs.filter(lambda c: c[0] != 0), coeffs.filter(lambda c: c[0] != 0), st.integers(0, 10))
def test_truncation_is_ring_morphism(a, b, M):
    f = qpoly(a) / qpoly(b[::-1] if b[-1] else b)
    g = qpoly(b) / qpoly(a)
    assert qadic_truncate(f * g, M) == (qadic_truncate(f, M) * qadic_truncate(g, M)).truncate(M)
    assert qadic_truncate(f + g, M) == (qadic_truncate(f, M) + qadic_truncate(g, M)).truncate(M)


@given(coeffs.filter(lambda c: c[0] != 0), st.integers(1, 15))
def test_inverse_round_trip(a, M):
    f = qadic_truncate(qpoly(a), None)
    assert (f * f.inverse_to(M + 1)).truncate(M) == QSeries.const(1)


def test_qpoch_on_series_matches_scalar():
    a = qadic_truncate(q / t, None)
    lhs = qpoch(a, 3, qadic_truncate(q, None))
    assert lhs == qadic_truncate(qpoch(q / t, 3), None)
