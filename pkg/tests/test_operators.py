import pytest

from qmacv.operators import (
    OperatorError, build_D, build_Dr, build_I_integral, build_I_spectral, commutator, commute_ID_check,
    eigenvalue_I, eigenvalue_consistency_check, integral_vs_spectral_check, prefactor_identity_check,
    spectral_commute_check, structure_check, theta_kernel_check,
)
from qmacv.report import PASS
from qmacv.rings import QAdicRing, SymbolicRing
from qmacv.scalar import A, ONE, S, q, qpoch, t
from qmacv.series import monomials

ring = SymbolicRing()


def test_D_diagonal_n2():
    D = build_D(2, ring, 4)
    for j in range(5):
        assert D.entry((j,), (j,)) == S(1) * q**j + S(2) / q**j


def test_D_first_column_degree_one():
    D = build_D(2, ring, 3)
    assert D.entry((1,), (0,)) == S(1) * (1 - 1 / t) * q + S(2) * (1 - t) / q


def test_D_grading_triangular():
    assert build_D(3, ring, 4).is_grading_triangular()


def test_Dn_is_scalar():
    for n in (2, 3):
        Dn = build_Dr(n, n, ring, 3)
        prod = ONE
        for i in range(1, n + 1):
            prod = prod * S(i)
        for c in Dn.basis:
            assert Dn.column(c).terms == {c: prod}


def test_D1_equals_D():
    assert (build_Dr(3, 1, ring, 3) - build_D(3, ring, 3)).is_zero()


def test_D2_diagonal_n2():
    D2 = build_Dr(2, 2, ring, 3)
    for j in range(4):
        assert D2.entry((j,), (j,)) == S(1) * S(2)


def test_Dr_range():
    with pytest.raises(OperatorError):
        build_Dr(2, 3, ring, 2)


def test_D_family_commutes():
    D1, D2 = build_Dr(3, 1, ring, 3), build_Dr(3, 2, ring, 3)
    assert commutator(D1, D2).is_zero()
    assert commutator(D1, D1).is_zero()


def test_eigenvalue_trivial_index():
    assert eigenvalue_I(A, (0,), ring) == ONE
    assert eigenvalue_I(A, (0, 0), ring) == ONE


def test_eigenvalue_n2_homogeneous():
    hom = SymbolicRing({"S1": 1, "S2": 1})
    lhs = eigenvalue_I(A, (1,), hom)
    rhs = qpoch(t / A, 1) * qpoch(A, 1) / (qpoch(q / A, 1) * qpoch(A * q / t, 1)) * q / t
    assert lhs == rhs


def test_eigenvalue_forms_agree():
    assert eigenvalue_consistency_check(4).verdict == PASS


def test_kernel_identities():
    assert theta_kernel_check(10).verdict == PASS
    assert prefactor_identity_check(10).verdict == PASS


def test_spectral_commute():
    assert spectral_commute_check(2, 3).verdict == PASS


def test_structure():
    assert structure_check(3, 3).verdict == PASS


def test_integral_matches_spectral_small():
    assert integral_vs_spectral_check(2, 2, 6, seed=3).verdict == PASS


def test_commute_ID_small():
    assert commute_ID_check(2, 2, 6, points=1, seed=5).verdict == PASS


def test_integral_does_not_commute_with_perturbed_D():
    pt = {"T": 3, "S1": 5, "S2": 7}
    r = QAdicRing(pt, 10)
    I = build_I_integral(2, 2, r, 2, 6)
    D = build_D(2, r, 2)
    bad = build_D(2, QAdicRing({**pt, "S2": 11}, 10), 2)
    assert commutator(I, D).truncate_q(6).is_zero()
    assert not commutator(I, bad).truncate_q(6).is_zero()


def test_integral_columns_match_spectral():
    pt = {"T": 3, "S1": 5, "S2": 7}
    r = QAdicRing(pt, 10)
    I = build_I_integral(2, 2, r, 2, 6)
    S_ = build_I_spectral(r.coerce(2), 2, r, 2)
    for c in monomials(1, 2):
        assert (I.column(c) - S_.column(c)).map_coeffs(lambda x: x.truncate(6)).is_zero()
