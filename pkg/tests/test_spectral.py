import pytest
from hypothesis import given, strategies as st

from qmacv.operators import build_D, build_I_spectral
from qmacv.report import PASS
from qmacv.rings import SymbolicRing
from qmacv.scalar import A, ONE, Q, S, T, q, t
from qmacv.series import RatioSeries
from qmacv.spectral import (
    DegeneracyError, WeylElement, closed_form_check, eigen_residual, homogeneous_limit_check, jordan_structure,
    lemma_expansion_check, product_f0_check, random_zeta_poly, shift_relation_check, solve_eigen,
    termination_and_antisymmetry, weyl_action, weyl_prefactor, weyl_relations_check,
)

ring = SymbolicRing()


def test_first_coefficient_n2():
    f = solve_eigen(2, ring, None, 3).series
    r = S(1) / S(2)
    expected = -1 + t * (1 - q / t) * (1 - q * r / t) / ((1 - q) * (1 - q * r))
    assert f.coefficient((1,)) == expected
    assert f.coefficient((0,)) == ONE


def test_closed_forms():
    assert closed_form_check(2, 6).verdict == PASS
    assert closed_form_check(3, 3).verdict == PASS


def test_t_equals_q_collapses():
    f = solve_eigen(2, SymbolicRing({"T": Q}), None, 5).series
    assert f == RatioSeries(2, 5, {(0,): ONE, (1,): -ONE})


@pytest.mark.parametrize("n,j,cap", [(2, (0,), 3), (2, (1,), 4), (3, (1, 0), 3), (3, (0, 1), 3)])
def test_shift_relation(n, j, cap):
    assert shift_relation_check(n, j, cap).verdict == PASS


@pytest.mark.parametrize("n,cap", [(2, 6), (3, 3)])
def test_product_formula(n, cap):
    assert product_f0_check(n, cap).verdict == PASS


def test_product_formula_route_b_n4():
    assert product_f0_check(4, 2, routes=("b",)).verdict == PASS


@given(st.integers(0, 3))
def test_eigen_residual_vanishes(j):
    D = build_D(2, ring, 4)
    rec = solve_eigen(2, ring, (j,), 4, D=D)
    assert eigen_residual(D, rec).is_zero()
    assert rec.series.coefficient((j,)) == ONE
    assert all(e[0] >= j for e in rec.series.terms)


def test_weyl_prefactors():
    assert weyl_prefactor(1, 1) == ONE
    assert weyl_prefactor(1, 2) == (S(1) - q * S(2)) / (S(2) - q * S(1))


@given(st.integers(0, 1000), st.integers(1, 3))
def test_weyl_involution(seed, m):
    import random
    p = random_zeta_poly(3, random.Random(seed))
    for i in (1, 2):
        assert weyl_action(WeylElement((i, i), m), p).first_difference(p) is None


def test_weyl_relations():
    assert weyl_relations_check(3, 2, samples=3).verdict == PASS


@pytest.mark.parametrize("n,m", [(2, 1), (2, 2), (3, 1)])
def test_termination(n, m):
    assert termination_and_antisymmetry(n, m, 6).verdict == PASS


def test_homogeneous_spectrum_degenerates_for_n3():
    hom = SymbolicRing({"S1": 1, "S2": 1, "S3": 1})
    with pytest.raises(DegeneracyError):
        build_I_spectral(A, 3, hom, 2)


def test_homogeneous_n2_has_distinct_spectrum():
    hom = SymbolicRing({"S1": 1, "S2": 1})
    build_I_spectral(A, 2, hom, 3)


def test_jordan_blocks_match_orbits():
    assert jordan_structure(3, 3).verdict == PASS


def test_lemma_expansion():
    assert lemma_expansion_check(4).verdict == PASS


def test_homogeneous_limit():
    assert homogeneous_limit_check(3, 3).verdict == PASS
