from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qmacv.operators import IntegralEngine
from qmacv.quasi import (
    F_closed, F_closed_n2, F_closed_n2_4phi3, F_fixture_n4, F_initial, F_reconstruct, covariance_check,
    determinant, eigen_expansion_n2, embed_check, homogeneous_ring, iterative_check, pfaffian,
    product_check_Gl, product_check_pfaffian, product_check_simple, rational_fit, reconstruct_check,
    subspace_n4, to_qadic, _trunc,
)
from qmacv.report import PASS, PRECONDITION
from qmacv.checks import run_check
from qmacv.rings import QAdicRing
from qmacv.scalar import A, Q, T, ParamScalar

ring = homogeneous_ring()


@pytest.mark.parametrize("n", [2, 3])
def test_initial_condition(n):
    assert F_closed(n, 3, ring, T) == F_initial(n, 3, ring)


def test_n4_fixture_initial_condition():
    assert F_fixture_n4(3, ring, T) == F_initial(4, 3, ring).restrict(subspace_n4)


def test_two_closed_forms_n2():
    assert F_closed_n2(4, ring) == F_closed_n2_4phi3(4, ring)


def test_eigen_expansion():
    assert eigen_expansion_n2(3).verdict == PASS


def test_iterative_matches_closed_form():
    assert iterative_check(2, 2, 2, 6).verdict == PASS


@pytest.mark.parametrize("variant", ["I", "I'"])
def test_covariance_n2(variant):
    assert covariance_check(2, variant, cap=2, M=6, points=2).verdict == PASS


def test_covariance_requires_shift():
    # negative control: I(alpha t/q) F(alpha) is not F(alpha) itself
    tval, a = Fraction(2, 7), Fraction(5, 3)
    closed = F_closed(2, 2, ring)
    qr = QAdicRing({"T": tval, "S1": 1, "S2": 1}, 10)
    Fa = to_qadic(closed, qr, {"A": a, "T": tval})
    op = qr.coerce((ParamScalar.coerce(a) * T**2 / Q**2).subs({"T": tval}))
    got = _trunc(IntegralEngine(2, 2, 6, qr, op).apply(Fa), 6)
    assert got != _trunc(Fa, 6)


def test_unknown_variant():
    assert run_check("quasi.covariance", {"variant": "J"}).verdict == PRECONDITION


def test_reconstruct_small():
    assert reconstruct_check(2, 2).verdict == PASS


def test_reconstruct_reports_holdout():
    qf = F_reconstruct(2, 1)
    assert not qf.failed and len(qf.held_out) == 2


def test_rational_fit_recovers_function():
    import sympy
    f = lambda x: (x**2 - 3) / (2 * x + 5)
    xs = [Fraction(k, 3) for k in range(1, 9)]
    expr, degs = rational_fit(xs, [f(x) for x in xs])
    X = sympy.Symbol("A")
    assert degs == (2, 1)
    assert sympy.simplify(expr - (X**2 - 3) / (2 * X + 5)) == 0


def test_rational_fit_gives_up_without_enough_points():
    f = lambda x: 1 / (x**3 + x + 7)
    xs = [Fraction(k) for k in range(1, 5)]
    assert rational_fit(xs, [f(x) for x in xs]) is None


@pytest.mark.parametrize("n,which", [(2, "neg-sqrt-t"), (2, "t"), (3, "neg-sqrt-t"), (3, "t"),
                                     (2, "neg-one-n2")])
def test_product_simple(n, which):
    assert product_check_simple(n, which, 4).verdict == PASS


def test_product_simple_precondition():
    assert run_check("quasi.product_simple", {"n": 3, "which": "neg-one-n2"}).verdict == PRECONDITION


@pytest.mark.parametrize("n,sign", [(2, 1), (2, -1), (3, 1), (3, -1)])
def test_product_pfaffian(n, sign):
    assert product_check_pfaffian(n, sign, 3).verdict == PASS


@pytest.mark.parametrize("n,l,sign", [(2, 1, -1), (2, 1, 1), (3, 1, -1)])
def test_product_Gl(n, l, sign):
    assert product_check_Gl(n, l, sign, 2).verdict == PASS


def test_embedding():
    assert embed_check(3, 1).verdict == PASS


def test_embedding_negative_control():
    rep = embed_check(3, 1, perturb=True)
    assert rep.verdict == "fail" and "monomial" in rep.witness


def antisym(draw_vals, m):
    M = [[0] * m for _ in range(m)]
    it = iter(draw_vals)
    for i in range(m):
        for j in range(i + 1, m):
            v = next(it)
            M[i][j], M[j][i] = v, -v
    return M


@given(st.sampled_from([2, 4, 6]).flatmap(
    lambda m: st.lists(st.integers(-5, 5), min_size=m * (m - 1) // 2, max_size=m * (m - 1) // 2)
    .map(lambda v: antisym(v, m))))
def test_pfaffian_squares_to_determinant(M):
    assert pfaffian(M) ** 2 == determinant(M)


def test_pfaffian_rejects_bad_input():
    with pytest.raises(ValueError):
        pfaffian([[0, 1, 2], [-1, 0, 3], [-2, -3, 0]])
    with pytest.raises(ValueError):
        pfaffian([[0, 1], [1, 0]])


def test_pfaffian_2x2():
    assert pfaffian([[0, A], [-A, 0]]) == A
