import pytest
from hypothesis import given, strategies as st

from qmacv.fock import (
    FockVector, H1_eigen_check, H1_eigenvalue, apply_Hr, bracket_value, commute_check_Hr, dominates,
    eqHr_crosscheck, family_commute_check, heisenberg_apply, kernel_crosscheck, macdonald_P,
    macdonald_oracle, mu_coefficient, omega_coefficient, ope_checks, oracle_check, pairing, partitions,
    phi_modes, phi_vector, proportionality, raising_check, raising_integral, triangularity_check, z_lambda,
)
from qmacv.report import PASS
from qmacv.scalar import ONE, Q, T, ZERO, ParamScalar, q, t

cap = 4
vac = FockVector.vacuum(cap)
parts = st.integers(0, 4).flatmap(lambda d: st.sampled_from(partitions(d)))
vectors = st.lists(st.tuples(parts, st.integers(-3, 3)), max_size=4).map(
    lambda d: FockVector({lam: c * (1 + T * len(lam)) for lam, c in d}, cap))


def test_partitions():
    assert partitions(4) == ((1, 1, 1, 1), (2, 1, 1), (2, 2), (3, 1), (4,))
    assert z_lambda((2, 1, 1)) == 4
    assert dominates((3, 1), (2, 2)) and not dominates((2, 2), (3, 1))


def test_heisenberg_examples():
    a1_vac = heisenberg_apply(1, vac)
    assert a1_vac.is_zero()
    comm = heisenberg_apply(1, heisenberg_apply(-1, vac)) - heisenberg_apply(-1, a1_vac)
    assert comm == vac.scale((1 - q) / (1 - t))
    assert heisenberg_apply(-2, heisenberg_apply(-1, vac)) == FockVector.p((2, 1), cap)


@given(vectors, st.integers(1, 3), st.integers(1, 3))
def test_heisenberg_relations(v, m, n):
    # keep a_{-n} v inside the cap so nothing is truncated
    v = FockVector({lam: c for lam, c in v.terms.items() if sum(lam) + n <= cap}, cap)
    lhs = heisenberg_apply(m, heisenberg_apply(-n, v)) - heisenberg_apply(-n, heisenberg_apply(m, v))
    want = v.scale(bracket_value(m)) if m == n else FockVector({}, cap)
    assert lhs == want


def test_phi_modes():
    assert phi_vector((), cap) == vac
    assert phi_modes(cap)[1] == FockVector.p((1,), cap, (1 - t) / (1 - q))


def test_text_round_trip():
    v = FockVector({(): 1, (2, 1): (1 - q) / (1 - t), (3,): T}, 5)
    assert FockVector.from_text(v.to_text(), 5) == v
    assert v.to_text().splitlines()[0].startswith("0 :")


def test_H1_on_vacuum_and_degree_one():
    assert apply_Hr(1, vac) == vac
    Q1 = macdonald_oracle((1,), 3)
    assert apply_Hr(1, Q1) == Q1.scale(1 + (t - 1) * (q - 1) / t)
    assert H1_eigenvalue((1,)) == 1 + (t - 1) * (q - 1) / t


def test_omega_and_mu():
    assert omega_coefficient(0) == 2 / (1 + 1 / t)
    for k in range(1, 5):
        assert mu_coefficient(k) == t**k - t ** (k - 1)
    assert mu_coefficient(0) == ONE


def test_oracle_small():
    assert macdonald_oracle((1,), 3) == FockVector.p((1,), 3, (1 - t) / (1 - q))
    assert macdonald_oracle((), 3) == FockVector.vacuum(3)
    assert macdonald_P((), 3) == FockVector.vacuum(3)


def test_oracle_biorthogonal():
    for d in range(1, 4):
        for lam in partitions(d):
            for mu in partitions(d):
                val = pairing(macdonald_oracle(lam, d), macdonald_P(mu, d))
                assert val == (ONE if lam == mu else ZERO)


def test_oracle_check():
    assert oracle_check(4).verdict == PASS


def test_proportionality():
    v = macdonald_oracle((2, 1), 3)
    assert proportionality(v.scale(T), v) == T
    assert proportionality(v + vac.with_cap(3), v) is None


@pytest.mark.parametrize("r,s", [(1, 1), (1, 2)])
def test_commute_Hr(r, s):
    assert commute_check_Hr(r, s, 4).verdict == PASS


def test_H1_eigenvalues():
    assert H1_eigen_check(4).verdict == PASS


def test_raising_single_variable():
    assert raising_integral((1,)) == macdonald_oracle((1,), 1)


@pytest.mark.parametrize("lam", [(1, 1), (2, 1, 0), (2, 1), (2, 2)])
def test_raising_proportional(lam):
    assert raising_check(lam).verdict == PASS


def test_raising_negative_control():
    # the integral for (2, 1) is not proportional to the (3) or (1, 1, 1) functions
    v = raising_integral((2, 1))
    assert proportionality(v, macdonald_oracle((3,), 3)) is None
    assert proportionality(v, macdonald_oracle((1, 1, 1), 3)) is None


def test_triangularity():
    assert triangularity_check(1, 3).verdict == PASS


def test_ope_and_kernel():
    assert ope_checks(2).verdict == PASS
    assert kernel_crosscheck(3).verdict == PASS


def test_eqHr():
    assert eqHr_crosscheck(1, 2, 2).verdict == PASS


def test_family_commute():
    assert family_commute_check(1, 2, 3, 3).verdict == PASS


@given(vectors)
def test_H1_is_linear(v):
    w = FockVector.p((1,), cap, q)
    assert apply_Hr(1, v + w) == apply_Hr(1, v) + apply_Hr(1, w)
