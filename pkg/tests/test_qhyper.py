import pytest
from hypothesis import given, strategies as st

from qmacv.qhyper import IDENTITIES, PhiSpec, phi_series, phi_terms, phi_value, verify_identity, \
    verify_identity_suite
from qmacv.report import PASS
from qmacv.rings import SymbolicRing
from qmacv.scalar import A, ONE, PoleError, Q, T, ZERO, q, qpoch
from qmacv.series import expand_qbinomial

ring = SymbolicRing()
nonunit = st.fractions(min_value=-9, max_value=9, max_denominator=9).filter(lambda x: x not in (0, 1, -1))


def test_2phi1_is_qbinomial():
    b = T**3
    lhs = phi_series(PhiSpec((A, b), (b,)), (1,), 2, 6, ring)
    assert lhs == expand_qbinomial(A, ONE, ((1,), 1), 2, 6, ring)


def test_unit_numerator_parameter():
    assert phi_series(PhiSpec((ONE, A), (T,)), (1,), 2, 5, ring).terms == {(0,): ONE}


def test_termination():
    terms = phi_terms([q ** -2, A], [T], 6, ring)
    assert not terms[2].is_zero()
    assert all(c.is_zero() for c in terms[3:])


def test_denominator_pole():
    with pytest.raises(PoleError):
        phi_terms([A], [q ** -1], 3, ring)


def test_terminating_value_matches_definition():
    N = 3
    num, den = [q ** -N, A], [T]
    z = Q
    direct = ZERO
    for k in range(N + 1):
        direct += qpoch(q ** -N, k) * qpoch(A, k) / (qpoch(q, k) * qpoch(T, k)) * z**k
    assert phi_value(num, den, z, ring) == direct


@pytest.mark.parametrize("tag", sorted(IDENTITIES))
def test_identity_suite(tag):
    rep = verify_identity_suite(tag, instances=3, cap=10, seed=0)
    assert rep.verdict == PASS, rep.witness


def test_product_forms_explicit_instance():
    assert verify_identity("product-forms", {"a": 3}, cap=10).verdict == PASS


def test_unbalanced_3phi2_breaks_summation():
    a, b, c, N = T, T**3, Q * T, 2
    qn = q ** -N
    rhs = qpoch(c / a, N) * qpoch(c / b, N) / (qpoch(c, N) * qpoch(c / (a * b), N))
    balanced = phi_value([a, b, qn], [c, a * b * q * qn / c], q, ring)
    assert balanced == rhs
    unbalanced = phi_value([a, b, qn], [c, a * b * qn / c], q, ring)
    assert unbalanced != rhs


@given(nonunit, nonunit)
def test_qbinomial_identity_property(a, b):
    rep = verify_identity("q-binomial", {"a": a, "b": b}, cap=6)
    assert rep.verdict == PASS


@given(nonunit)
def test_product_forms_property(a):
    assert verify_identity("product-forms", {"a": a}, cap=6).verdict == PASS
