"""The quasi-eigenfunction F(alpha) at s_1 = ... = s_n = 1: closed forms,
iterative samples, reconstruction in alpha, covariance, and product formulas.

Conventions: A = alpha, T = t^{1/2}, Q = q^{1/2}, U = t^{1/4} (only for the
G_l weights).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .operators import IntegralEngine, build_D, build_I_spectral
from .qadic import QSeries
from .qhyper import PhiSpec, phi_series, phi_value, qproduct_series
from .report import BUDGET, CheckReport, BudgetExceeded, PreconditionError, compare_series, timed
from .rings import QAdicRing, Ring, SampledRing, SymbolicRing
from .scalar import A, ParamScalar, Q, T, U, qpoch, random_rational, var
from .series import RatioSeries, geometric_terms, monomials, ratio_exponent
from .spectral import solve_eigen, vandermonde_ratio

HOMOGENEOUS = {"S1": 1, "S2": 1, "S3": 1, "S4": 1, "S5": 1, "S6": 1}


def homogeneous_ring(point: dict | None = None) -> SymbolicRing:
    return SymbolicRing({**HOMOGENEOUS, **(point or {})})


# -- initial condition and closed forms -------------------------------------------------------------
def _pair_product(n: int, cap: int, ring: Ring, num, den, pairs=None, base=None) -> RatioSeries:
    out = RatioSeries.constant(n, cap, ring.one)
    for i, j in pairs if pairs is not None else itertools.combinations(range(1, n + 1), 2):
        e = ratio_exponent(n, i, j)
        out = out * RatioSeries(n, cap, {(0,) * (n - 1): ring.one, e: -ring.one})
        out = out * qproduct_series(num, den, e, ring.one, n, cap, ring, base)
    return out


def F_initial(n: int, cap: int, ring: Ring | None = None) -> RatioSeries:
    """prod_{i<j} (1 - zeta_j/zeta_i) (q t^{-1/2} zeta_j/zeta_i;q)_inf / (t^{1/2} zeta_j/zeta_i;q)_inf."""
    ring = ring or homogeneous_ring()
    sq = ring.var("T")
    return _pair_product(n, cap, ring, [ring.div(ring.q, sq)], [sq])


def _alpha(ring: Ring, alpha):
    if alpha is None:
        return ring.var("A")
    if isinstance(alpha, (int, Fraction)):
        return ring.coerce(alpha)
    return alpha


def F_closed_n2(cap: int, ring: Ring | None = None, alpha=None) -> RatioSeries:
    """(1 - x) 2phi1(q/t, alpha q/t; q/alpha; q, t x/alpha)."""
    ring = ring or homogeneous_ring()
    a = _alpha(ring, alpha)
    q, t = ring.q, ring.t
    spec = PhiSpec((ring.div(q, t), ring.div(a * q, t)), (ring.div(q, a),), arg=ring.div(t, a))
    return vandermonde_ratio(2, cap, ring) * phi_series(spec, (1,), 2, cap, ring)


def F_closed_n2_4phi3(cap: int, ring: Ring | None = None, alpha=None) -> RatioSeries:
    """The very-well-poised 4phi3 form of the same function."""
    ring = ring or homogeneous_ring()
    a = _alpha(ring, alpha)
    q, t, sq = ring.q, ring.t, ring.var("T")
    num = (ring.div(q, sq), -ring.div(q, sq), ring.div(ring.one, t), ring.div(a, t))
    den = (ring.div(ring.one, sq), -ring.div(ring.one, sq), ring.div(q, a))
    return phi_series(PhiSpec(num, den, arg=ring.div(t, a)), (1,), 2, cap, ring)


def _alpha_block(n: int, ks: dict, ring: Ring, a, cap: int, pairs=None) -> RatioSeries:
    """prod (1 - zeta_j/zeta_i) 2phi1(q^{k+1}/t, alpha q/t; q^{k+1}/alpha; q, t zeta_j/(alpha zeta_i))."""
    q, t = ring.q, ring.t
    out = RatioSeries.constant(n, cap, ring.one)
    for i, j in pairs or itertools.combinations(range(1, n + 1), 2):
        kk = ks.get((i, j), 0)
        e = ratio_exponent(n, i, j)
        spec = PhiSpec((ring.div(q ** (kk + 1), t), ring.div(a * q, t)), (ring.div(q ** (kk + 1), a),),
                       arg=ring.div(t, a))
        out = out * RatioSeries(n, cap, {(0,) * (n - 1): ring.one, e: -ring.one})
        out = out * phi_series(spec, e, n, cap, ring)
    return out


def _terminating_weight(k: int, ring: Ring, a, z_extra=None):
    """2phi1(1/alpha, q^{-k}; alpha q^{1-k}; q, alpha t (* z_extra))."""
    q, t = ring.q, ring.t
    arg = a * t if z_extra is None else a * t * z_extra
    return phi_value((ring.div(ring.one, a), ring.div(ring.one, q**k)), (ring.div(a * q, q**k),), arg, ring,
                     K=k)


def _n3_quasi_weight(k: int, ring: Ring, a):
    q, t = ring.q, ring.t
    num = qpoch(ring.div(t, a * a), k, q) * qpoch(ring.div(q, t), k, q) ** 2
    den = qpoch(q, k, q) * qpoch(ring.div(q, a), k, q) ** 2
    return ring.div(num * q**k, den) * _terminating_weight(k, ring, a)


def F_closed_n3(cap: int, ring: Ring | None = None, alpha=None) -> RatioSeries:
    """Sum_k weight_k (q zeta_3/zeta_1)^k prod_{i<j} (1 - zeta_j/zeta_i) 2phi1(...)."""
    ring = ring or homogeneous_ring()
    a = _alpha(ring, alpha)
    total = RatioSeries(3, cap, {})
    for k in range(cap // 2 + 1):
        w = _n3_quasi_weight(k, ring, a)
        if ring.is_zero(w):
            continue
        blk = _alpha_block(3, {(1, 2): k, (2, 3): k, (1, 3): k}, ring, a, cap)
        total = total + RatioSeries.monomial(3, cap, (k, k), w) * blk
    return total


def F_closed(n: int, cap: int, ring: Ring | None = None, alpha=None) -> RatioSeries:
    if n == 2:
        return F_closed_n2(cap, ring, alpha)
    if n == 3:
        return F_closed_n3(cap, ring, alpha)
    raise PreconditionError(f"no closed form for n={n}; use the n=4 fixture on its subspace")


# -- n = 4 partial series on the subspace i_3 <= 1 ------------------------------------------------------
N4_ORDER = ((1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (1, 4))


def subspace_n4(e) -> bool:
    return e[2] <= 1


def _phi4(ks, ring: Ring, a, cap: int) -> RatioSeries:
    return _alpha_block(4, dict(zip(N4_ORDER, ks)), ring, a, cap, N4_ORDER)


def F_fixture_n4(cap: int, ring: Ring | None = None, alpha=None) -> RatioSeries:
    """The Y-series, coded term by term, restricted to monomials with i_3 <= 1."""
    ring = ring or homogeneous_ring()
    a = _alpha(ring, alpha)
    q, t = ring.q, ring.t

    def p(x, k):
        return qpoch(x, k, q)

    at2, qt, qa, qq = ring.div(t, a * a), ring.div(q, t), ring.div(q, a), q
    one = ring.one

    def W(k, extra=None):
        return _terminating_weight(k, ring, a, extra)

    def bracket(k):
        """(1-a) q^k/((1-q^k) a) W_k(at) + (a - q^k)/((1-q^k) a) W_k(aqt)."""
        return (ring.div((one - a) * q**k, (one - q**k) * a) * W(k)
                + ring.div(a - q**k, (one - q**k) * a) * W(k, q))

    def mono(e, c):
        return RatioSeries.monomial(4, cap, e, c)

    total = RatioSeries(4, cap, {})

    def add(e, c, phi_ks):
        nonlocal total
        if sum(e) > cap or ring.is_zero(c):
            return
        blk = RatioSeries(4, cap, {})
        for ks in phi_ks:
            blk = blk + _phi4(ks, ring, a, cap)
        total = total + mono(e, c) * blk

    # Y_{k,k,0}
    for k in range(cap // 2 + 1):
        c = q**k * ring.div(p(at2, k) * p(qt, k) ** 2, p(qq, k) * p(qa, k) ** 2) * W(k)
        add((k, k, 0), c, [(k, k, 0, k, 0, 0)])
    pre1 = ring.div(p(at2, 1) * p(qt, 1) ** 2, p(qq, 1) * p(qa, 1) ** 2)
    # Y_{0,1,1}
    add((0, 1, 1), q * pre1 * W(1), [(0, 1, 1, 0, 1, 0)])
    # Y_{1,1,1}
    add((1, 1, 1), q * pre1 * W(1), [(1, 0, 0, 0, 1, 1), (0, 0, 1, 1, 0, 1)])
    pre1b = ring.div(p(at2, 1) * p(qt, 1) ** 3, p(qq, 1) * p(qa, 1) ** 3)
    add((1, 1, 1), -q * pre1b * W(1) * bracket(1), [(1, 1, 1, 1, 1, 1)])
    for k in range(1, cap):
        # Y_{k,k+1,1}: (zeta_3/zeta_1)^k (zeta_4/zeta_2) = x^(k, k+1, 1)
        e = (k, k + 1, 1)
        if sum(e) <= cap:
            c1 = -q * ring.div(p(at2, k) * p(qt, k) ** 2 * p(qt, 1),
                               p(qq, k - 1) * p(qq, 1) * p(qa, k) ** 2 * p(qa, 1)) * W(1) * bracket(k)
            add(e, c1, [(k, k, 1, k, 1, 1)])
            c2 = q * ring.div(p(at2, k + 1) * p(qt, k + 1) * p(qt, k) * p(qt, 1),
                              p(qq, k) * p(qq, 1) * p(qa, k + 1) * p(qa, k) * p(qa, 1)) * W(1) * W(k, q)
            add(e, c2, [(k, k + 1, 1, k, 1, 1)])
        # Y_{k+1,k+1,1}: (zeta_3/zeta_1)^k (zeta_4/zeta_1) = x^(k+1, k+1, 1)
        e = (k + 1, k + 1, 1)
        if sum(e) <= cap:
            c1 = -q * ring.div(p(at2, k + 1) * p(qt, k + 1) ** 2 * p(qt, 1),
                               p(qq, k) * p(qq, 1) * p(qa, k + 1) ** 2 * p(qa, 1)) * W(1) * bracket(k + 1)
            add(e, c1, [(k + 1, k + 1, 1, k + 1, 1, 1)])
            c2 = -q * ring.div(p(at2, k) * p(qt, k) ** 2 * p(qt, 1),
                               p(qq, k - 1) * p(qq, 1) * p(qa, k) ** 2 * p(qa, 1)) * W(1) * bracket(k)
            add(e, c2, [(k, k, 1, k, 1, 1)])
            c3 = q * ring.div(p(at2, k + 1) * p(qt, k + 1) * p(qt, k) * p(qt, 1),
                              p(qq, k) * p(qq, 1) * p(qa, k + 1) * p(qa, k) * p(qa, 1)) * W(1) * W(k, q)
            add(e, c3, [(k, k, 1, k + 1, 1, 1), (k + 1, k, 1, k, 1, 1)])
    return total.restrict(subspace_n4)


# -- q-adic plumbing -------------------------------------------------------------------------------------
def to_qadic(f: RatioSeries, ring: QAdicRing, subs: dict | None = None) -> RatioSeries:
    subs = {k: ParamScalar.coerce(v) for k, v in (subs or {}).items()}

    def conv(c):
        if isinstance(c, QSeries):
            return c
        if isinstance(c, ParamScalar) and subs and c.variables() & set(subs):
            c = c.subs(subs)
        return ring.coerce(c)
    return f.map_coeffs(conv)


def _trunc(f: RatioSeries, M: int) -> RatioSeries:
    return f.map_coeffs(lambda c: c.truncate(M) if isinstance(c, QSeries) else c)


def iterative_nodes(K: int) -> list[ParamScalar]:
    """alpha_k = q^{-k} t^{(2k+1)/2} = Q^{-2k} T^{2k+1}, k = 0..K."""
    return [T ** (2 * k + 1) / Q ** (2 * k) for k in range(K + 1)]


def F_iterative_samples(n: int, K: int, cap: int, M: int, tval=None, seed: int = 0,
                        support=None) -> list:
    """[(alpha_k, F(alpha_k))] by repeated integral action from the initial condition."""
    rng = random.Random(seed)
    tval = tval if tval is not None else random_rational(rng)
    point = {"T": tval, **{f"S{i}": 1 for i in range(1, n + 1)}}
    ring = QAdicRing(point, M + 4)
    F = to_qadic(F_initial(n, cap), ring, {"T": tval})
    if support is not None:
        F = F.restrict(support)
    out = [(iterative_nodes(0)[0], F)]
    for node in iterative_nodes(K)[1:]:
        alpha = ring.coerce(node)
        eng = IntegralEngine(n, cap, M, ring, alpha, support)
        F = _trunc(eng.apply(F), M)
        out.append((node, F))
    return out


def iterative_check(n: int, K: int, cap: int, M: int, seed: int = 0) -> CheckReport:
    """Iterative samples against the closed form (n = 2, 3) or the fixture (n = 4, subspace)."""
    rng = random.Random(seed)
    tval = random_rational(rng)
    rep = CheckReport("quasi.iterative", {"n": n, "K": K, "cap": cap, "M": M}, mode="q-adic", seeds=[seed])
    with timed(rep):
        support = subspace_n4 if n == 4 else None
        samples = F_iterative_samples(n, K, cap, M, tval, seed, support)
        ring = QAdicRing({"T": tval, **{f"S{i}": 1 for i in range(1, n + 1)}}, M + 4)
        sym = homogeneous_ring()
        closed = F_fixture_n4(cap, sym) if n == 4 else F_closed(n, cap, sym)
        for node, F in samples:
            want = _trunc(to_qadic(closed, ring, {"A": node, "T": tval}), M)
            if not compare_series(rep, F, want, f"alpha={node.to_text()}"):
                break
        rep.details["T"] = str(tval)
    return rep


# -- covariance ---------------------------------------------------------------------------------------
def covariance_check(n: int, variant: str = "I", cap: int = 3, M: int = 8, points: int = 3,
                     seed: int = 0, source: str = "closed") -> CheckReport:
    """(I): I(alpha t/q) F(alpha) = F(alpha t/q);  (I'): I(q/alpha) F(alpha) = F(alpha t/q)."""
    if variant not in ("I", "I'"):
        raise PreconditionError(f"unknown variant {variant}")
    rng = random.Random(seed)
    tval = random_rational(rng)
    rep = CheckReport(f"quasi.covariance_{'I' if variant == 'I' else 'Iprime'}",
                      {"n": n, "cap": cap, "M": M, "points": points}, mode="q-adic", seeds=[seed])
    with timed(rep):
        sym = homogeneous_ring()
        closed = F_fixture_n4(cap, sym) if n == 4 else F_closed(n, cap, sym)
        support = subspace_n4 if n == 4 else None
        ring = QAdicRing({"T": tval, **{f"S{i}": 1 for i in range(1, n + 1)}}, M + 4)
        alphas = []
        for _ in range(points):
            a = random_rational(rng)
            alphas.append(str(a))
            shifted = ParamScalar.coerce(a) * T**2 / Q**2
            op_alpha = shifted if variant == "I" else Q**2 / a
            Fa = to_qadic(closed, ring, {"A": a, "T": tval})
            want = _trunc(to_qadic(closed, ring, {"A": shifted, "T": tval}), M)
            eng = IntegralEngine(n, cap, M, ring, ring.coerce(ParamScalar.coerce(op_alpha).subs({"T": tval})),
                                 support)
            got = _trunc(eng.apply(Fa), M)
            if not compare_series(rep, got, want, f"alpha={a}"):
                break
        rep.details.update({"T": str(tval), "alphas": alphas})
    return rep


# -- reconstruction in alpha ----------------------------------------------------------------------------
@dataclass
class QuasiFunction:
    n: int
    cap: int
    coefficients: dict  # exponent -> rational function of A (ParamScalar)
    provenance: str = "reconstructed"
    samples: list = field(default_factory=list)
    held_out: list = field(default_factory=list)
    failed: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [f"# n={self.n} cap={self.cap} provenance={self.provenance}"]
        for e in sorted(self.coefficients, key=lambda e: (sum(e), e)):
            lines.append(f"{','.join(map(str, e))} : {self.coefficients[e].to_text()}")
        return "\n".join(lines) + "\n"


def homogeneous_I_exact(alpha, n: int, cap: int, point: dict, seed: int = 0):
    """I(alpha) at s = 1 as an exact matrix: the spectral form along s_i = 1 - r_i E, then E -> 0.

    The eigenbasis degenerates at s = 1 for n >= 3 but the operator does not.
    """
    from .scalar import eps_expand
    rng = random.Random(seed + 7919)
    E = var("E")
    pt = {k: ParamScalar.coerce(v) for k, v in point.items()}
    for i in range(1, n + 1):
        pt[f"S{i}"] = ParamScalar.coerce(1) - random_rational(rng) * E if n > 2 else ParamScalar.coerce(1)
    ring = SymbolicRing(pt)
    Imat = build_I_spectral(ring.coerce(alpha), n, ring, cap)
    if n == 2:
        return Imat

    def limit(c):
        ex = eps_expand(c, "E", 0)
        if any(k < 0 for k in ex):
            raise PreconditionError("operator entry diverges at s = 1")
        return ex.get(0, ParamScalar.coerce(0))
    return Imat.map_coeffs(limit)


def exact_samples(n: int, K: int, cap: int, point: dict, seed: int = 0) -> list:
    """[(alpha_k value, F(alpha_k))] with every parameter a rational number."""
    ring = SampledRing({**point, **{f"S{i}": 1 for i in range(1, n + 1)}})
    sym = homogeneous_ring(point)
    F = F_initial(n, cap, sym)
    nodes = [node.subs({k: ParamScalar.coerce(v) for k, v in point.items()}) for node in iterative_nodes(K)]
    out = [(nodes[0], F)]
    for node in nodes[1:]:
        Imat = homogeneous_I_exact(node, n, cap, point, seed)
        F = Imat.apply(F)
        out.append((node, F))
    return [(node.to_fraction(), f.map_coeffs(lambda c: ring.coerce(c))) for node, f in out]


def rational_fit(xs: list, ys: list, reserve: int = 2):
    """Smallest-degree rational function through the fitting points that also
    reproduces every held-out point.  Returns (sympy expr, (dn, dd)) or None."""
    import sympy
    from sympy.polys.polyfuncs import rational_interpolate
    X = sympy.Symbol("A")
    npts = len(xs) - reserve
    pts = [(sympy.Rational(x.numerator, x.denominator), sympy.Rational(int(y.numerator), int(y.denominator)))
           for x, y in zip(xs, ys)]
    for total in range(0, npts):
        for dn in range(total + 1):
            dd = total - dn
            if dn + dd + 1 > npts:
                continue
            sub = pts[: dn + dd + 1]
            try:
                if dd == 0:
                    expr = sympy.interpolate(sub, X)
                else:
                    expr = rational_interpolate(sub, dn, X=X)
            except (ZeroDivisionError, ValueError):
                continue
            ok = True
            for x, y in pts:
                den = sympy.denom(sympy.together(expr)).subs(X, x)
                if den == 0 or sympy.simplify(expr.subs(X, x) - y) != 0:
                    ok = False
                    break
            if ok:
                return sympy.cancel(expr), (dn, dd)
    return None


def _sympy_to_scalar(expr) -> ParamScalar:
    import sympy
    num, den = sympy.fraction(sympy.together(expr))
    return ParamScalar.from_text(f"({sympy.sstr(sympy.expand(num))})/({sympy.sstr(sympy.expand(den))})"
                                 .replace("**", "^"))


class _Unfinished(Exception):
    pass


def F_reconstruct(n: int, cap: int, K: int | None = None, point: dict | None = None, seed: int = 0,
                  reserve: int = 2) -> QuasiFunction:
    """Rational reconstruction in A of the coefficients of F, from exact samples at
    alpha_k = q^{-k} t^{(2k+1)/2} with (q, t) fixed to rationals; the last
    ``reserve`` samples are held out and must be reproduced."""
    rng = random.Random(seed)
    point = point or {"Q": random_rational(rng), "T": random_rational(rng)}
    K = K if K is not None else 4 * cap + 2 + reserve
    nodes = [node.subs({k: ParamScalar.coerce(v) for k, v in point.items()}).to_fraction()
             for node in iterative_nodes(K)]
    failed: list = []

    def produce():
        samples = exact_samples(n, K, cap, point, seed)
        xs = [x for x, _ in samples]
        coeffs = {}
        for e in monomials(n - 1, cap):
            ys = [f.coefficient(e, 0) for _, f in samples]
            fit = rational_fit(xs, ys, reserve)
            if fit is None:
                failed.append(e)
                continue
            coeffs[e] = _sympy_to_scalar(fit[0])
        series = RatioSeries(n, cap, coeffs)
        if failed:
            raise _Unfinished(series)
        return series

    from .cache import cached_series
    key = {"n": n, "s": "homogeneous", "cap": cap, "mode": "sampled", "K": K, "reserve": reserve,
           "point": {k: str(v) for k, v in sorted(point.items())}}
    try:
        series = cached_series("quasi", key, produce)
    except _Unfinished as exc:
        series = exc.args[0]
    qf = QuasiFunction(n, cap, dict(series.terms), "reconstructed", samples=[str(x) for x in nodes[:-reserve]],
                       held_out=[str(x) for x in nodes[-reserve:]], failed=failed)
    qf.point = point
    return qf


def reconstruct_check(n: int = 2, cap: int = 3, seed: int = 0) -> CheckReport:
    rng = random.Random(seed)
    point = {"Q": random_rational(rng), "T": random_rational(rng)}
    rep = CheckReport("quasi.reconstruct", {"n": n, "cap": cap}, mode="sampled", seeds=[seed])
    with timed(rep):
        qf = F_reconstruct(n, cap, point=point, seed=seed)
        if qf.failed:
            return rep.fail({"reconstruction-failure": [list(e) for e in qf.failed]})
        closed = F_closed(n, cap, homogeneous_ring(point))
        for e in monomials(n - 1, cap):
            got = qf.coefficients.get(e, ParamScalar.coerce(0))
            want = closed.coefficient(e, ParamScalar.coerce(0))
            if not (got - want).is_zero():
                rep.fail({"monomial": list(e), "reconstructed": got.to_text(), "closed": want.to_text()})
                break
        rep.details.update({"point": {k: str(v) for k, v in point.items()}, "samples": len(qf.samples),
                            "held_out": qf.held_out})
    return rep


# -- eigenfunction expansion for n = 2 -----------------------------------------------------------------
def c_entry(i: int, j: int, ring: Ring):
    """Coefficient of x^i in f_j at s = 1 (zero for i < j)."""
    if i < j:
        return ring.zero
    q, t, sq = ring.q, ring.t, ring.var("T")
    m = i - j
    num = (qpoch(ring.div(q ** (2 * j), t), m, q) * qpoch(ring.div(q ** (j + 1), sq), m, q)
           * qpoch(-ring.div(q ** (j + 1), sq), m, q) * qpoch(ring.div(ring.one, t), m, q))
    den = (qpoch(q ** (2 * j + 1), m, q) * qpoch(ring.div(q**j, sq), m, q) * qpoch(-ring.div(q**j, sq), m, q)
           * qpoch(q, m, q))
    return ring.div(num, den) * t**m


def d_entry(i: int, j: int, ring: Ring):
    if i < j:
        return ring.zero
    q, t = ring.q, ring.t
    m = i - j
    return ring.div(qpoch(ring.div(q ** (i + j + 1), t), m, q) * qpoch(t, m, q),
                    qpoch(q ** (i + j), m, q) * qpoch(q, m, q))


def b_coefficient(i: int, ring: Ring, a):
    q, t = ring.q, ring.t
    return (ring.div(qpoch(a, i, q), qpoch(ring.div(q, a), i, q))
            * ring.div(qpoch(ring.div(q, t), i, q) * qpoch(ring.div(q ** (i + 1), t), i, q),
                       qpoch(q, i, q) * qpoch(q**i, i, q))
            * ring.div(t**i, a**i))


def eigen_expansion_n2(cap: int = 4, alpha=None) -> CheckReport:
    rep = CheckReport("quasi.eigen_expansion_n2", {"cap": cap})
    ring = homogeneous_ring()
    with timed(rep):
        a = _alpha(ring, alpha)
        D = build_D(2, ring, cap)
        for i in range(cap + 1):
            for k in range(cap + 1):
                acc = ring.zero
                for j in range(cap + 1):
                    acc = acc + c_entry(i, j, ring) * d_entry(j, k, ring)
                if not (acc - (ring.one if i == k else ring.zero)).is_zero():
                    return rep.fail({"where": "C D = 1", "i": i, "k": k})
        total = RatioSeries(2, cap, {})
        for j in range(cap + 1):
            fj = solve_eigen(2, ring, (j,), cap, D=D).series
            cf = RatioSeries(2, cap, {(i,): c_entry(i, j, ring) for i in range(j, cap + 1)})
            compare_series(rep, fj, cf, f"f_{j} vs explicit c_ij")
            total = total + fj.scale(b_coefficient(j, ring, a))
        compare_series(rep, total, F_closed_n2(cap, ring, a), "sum f_i b_i vs F")
        compare_series(rep, F_closed_n2_4phi3(cap, ring, a), F_closed_n2(cap, ring, a), "4phi3 vs 2phi1")
    return rep


# -- product formulas ---------------------------------------------------------------------------------
def _special_F(n: int, cap: int, ring: Ring, alpha) -> RatioSeries:
    if n == 4:
        return F_fixture_n4(cap, ring, alpha)
    return F_closed(n, cap, ring, alpha)


def product_check_simple(n: int, which: str, cap: int = 4) -> CheckReport:
    rep = CheckReport("quasi.product_simple", {"n": n, "which": which, "cap": cap})
    ring = homogeneous_ring()
    q, t, sq = ring.q, ring.t, ring.var("T")
    with timed(rep):
        if which == "neg-sqrt-t":
            F = _special_F(n, cap, ring, -sq)
            want = _pair_product(n, cap, ring, [-ring.div(q, sq)], [-sq])
        elif which == "t":
            F = _special_F(n, cap, ring, t)
            pairs = [(i, j) for i, j in itertools.combinations(range(1, n + 1), 2) if (j - i) >= 2 and (j - i) % 2 == 0]
            want = _pair_product(n, cap, ring, [ring.div(q, t)], [t], pairs)
        elif which == "neg-one-n2":
            if n != 2:
                raise PreconditionError("the alpha = -1 product is stated for n = 2 only")
            F = F_closed_n2(cap, ring, -ring.one)
            want = _pair_product(2, cap, ring, [-ring.div(q * q, t)], [-t], base=q * q)
        else:
            raise PreconditionError(f"unknown special point {which}")
        if n == 4:
            want = want.restrict(subspace_n4)
        compare_series(rep, F, want, which)
    return rep


def pfaffian(M: list):
    """Pfaffian of an antisymmetric matrix (list of rows) by expansion along the first row."""
    m = len(M)
    if m % 2:
        raise ValueError("Pfaffian of an odd-dimensional matrix")
    for i in range(m):
        for j in range(m):
            if not _is_zero(M[i][j] + M[j][i]):
                raise ValueError("matrix is not antisymmetric")
    return _pf(M, list(range(m)))


def _is_zero(x) -> bool:
    if hasattr(x, "is_zero"):
        return x.is_zero()
    return x == 0


def _pf(M, idx):
    if not idx:
        return 1
    i0 = idx[0]
    out = None
    for k, j in enumerate(idx[1:]):
        rest = [x for x in idx[1:] if x != j]
        term = M[i0][j] * _pf(M, rest)
        if k % 2:
            term = -term
        out = term if out is None else out + term
    return out


def determinant(M: list):
    """Leibniz determinant for small matrices over any ring-like entries."""
    m = len(M)
    out = None
    for perm in itertools.permutations(range(m)):
        inv = sum(1 for a in range(m) for b in range(a + 1, m) if perm[a] > perm[b])
        term = None
        for r in range(m):
            term = M[r][perm[r]] if term is None else term * M[r][perm[r]]
        if inv % 2:
            term = -term
        out = term if out is None else out + term
    return out


def pfaffian_kernel(n: int, cap: int, ring: Ring, odd_extend: bool = False) -> list:
    """(1 - x^2)/((1 - q^{-1/2}t^{1/2} x)(1 - q^{1/2}t^{-1/2} x)), x = zeta_j/zeta_i, antisymmetrized.

    With odd_extend an extra index with zeta -> 0 is appended (entries 1).
    """
    Qv, sq = ring.var("Q"), ring.var("T")
    c1, c2 = ring.div(sq, Qv), ring.div(Qv, sq)
    size = n + 1 if odd_extend else n
    zero = RatioSeries(n, cap, {})
    M = [[zero for _ in range(size)] for _ in range(size)]
    for i in range(1, size + 1):
        for j in range(i + 1, size + 1):
            if j > n:
                entry = RatioSeries.constant(n, cap, ring.one)
            else:
                e = ratio_exponent(n, i, j)
                num = RatioSeries(n, cap, {(0,) * (n - 1): ring.one, tuple(2 * x for x in e): -ring.one})
                g1 = geometric_terms(n, cap, e, lambda k: c1**k)
                g2 = geometric_terms(n, cap, e, lambda k: c2**k)
                entry = num * g1 * g2
            M[i - 1][j - 1] = entry
            M[j - 1][i - 1] = -entry
    return M


def product_check_pfaffian(n: int, sign: int = 1, cap: int = 4) -> CheckReport:
    rep = CheckReport("quasi.product_pfaffian", {"n": n, "sign": sign, "cap": cap})
    base = homogeneous_ring()
    ring = base if sign > 0 else homogeneous_ring({"T": -T})
    Qv, sq = ring.var("Q"), ring.var("T")
    with timed(rep):
        M = pfaffian_kernel(n, cap, ring, odd_extend=(n % 2 == 1))
        pf = pfaffian(M)
        if len(M) <= 4 and not compare_series(rep, pf * pf, determinant(M), "Pf^2 = det"):
            return rep
        prod = RatioSeries.constant(n, cap, ring.one)
        for i, j in itertools.combinations(range(1, n + 1), 2):
            prod = prod * qproduct_series([ring.div(Qv, sq)], [Qv * sq], ratio_exponent(n, i, j), ring.one, n,
                                          cap, ring)
        F = _special_F(n, cap, ring, Qv * sq)
        want = pf * prod
        if n == 4:
            want = want.restrict(subspace_n4)
        compare_series(rep, F, want, "F(+-q^1/2 t^1/2) vs Pfaffian x product")
    return rep


# -- G_l matrices --------------------------------------------------------------------------------------
def _uni_mul(a: list, b: list, K: int) -> list:
    out = [None] * (K + 1)
    for i, x in enumerate(a[: K + 1]):
        for j, y in enumerate(b[: K + 1 - i]):
            v = x * y
            out[i + j] = v if out[i + j] is None else out[i + j] + v
    zero = a[0] - a[0]
    return [zero if v is None else v for v in out]


def _uni_geom(c, K: int, one) -> list:
    out = [one]
    for _ in range(K):
        out.append(out[-1] * c)
    return out


def gamma1(sign_pair: str, K: int, ring: Ring, scale=None) -> list:
    """Coefficients of gamma_{1,+,-} or gamma_{1,-,+} in z (z replaced by scale*z)."""
    q, t, sq = ring.q, ring.t, ring.var("T")
    one = ring.one
    if sign_pair == "+-":
        a, b, c = ring.div(q, t), -sq, -ring.div(q, sq)
    else:
        a, b, c = ring.div(t, q), -ring.div(ring.one, sq), -ring.div(sq, q)
    # (1 - a z)/(1 - z) * (1 - b z)/(1 - c z)
    lin1 = [one, -a] + [ring.zero] * K
    lin2 = [one, -b] + [ring.zero] * K
    out = _uni_mul(_uni_mul(lin1, _uni_geom(one, K, one), K), _uni_mul(lin2, _uni_geom(c, K, one), K), K)
    if scale is not None:
        out = [x * scale**k for k, x in enumerate(out)]
    return out


def gamma(l: int, s1: tuple, s2: tuple, K: int, ring: Ring, scale=None) -> list:
    """gamma_{l, s1, s2}(scale * z) as a coefficient list, by the block recursion."""
    one = ring.one
    if l == 0:
        return [one] + [ring.zero] * K
    a, b = s1[0], s2[0]
    rest1, rest2 = s1[1:], s2[1:]
    sc = scale if scale is not None else one
    if a == b:
        return gamma(l - 1, rest1, rest2, K, ring, scale) if l > 1 else [one] + [ring.zero] * K
    if a == "+":
        return _uni_mul(gamma1("+-", K, ring, scale), gamma(l - 1, rest1, rest2, K, ring, sc * ring.q), K)
    return _uni_mul(gamma1("-+", K, ring, scale), gamma(l - 1, rest1, rest2, K, ring, ring.div(sc, ring.q)), K)


def spins(l: int) -> list:
    return list(itertools.product("+-", repeat=l))


def G_matrix(l: int, K: int, ring: Ring) -> dict:
    return {(s1, s2): gamma(l, s1, s2, K, ring) for s1 in spins(l) for s2 in spins(l)}


def mu_weight(sigma: tuple, ring: Ring, flip: bool = False):
    """prod_i (q^{(i-1)/2} t^{1/4})^{sigma_i}; with flip, times (-1)^{(sum sigma - l)/2}."""
    Qv, Uv = ring.var("Q"), ring.var("U")
    out = ring.one
    tot = 0
    for i, s in enumerate(sigma, start=1):
        f = Qv ** (i - 1) * Uv
        out = out * (f if s == "+" else ring.div(ring.one, f))
        tot += 1 if s == "+" else -1
    if flip and ((tot - len(sigma)) // 2) % 2:
        out = -out
    return out


def product_check_Gl(n: int, l: int, sign: int = -1, cap: int = 3, budget: int = 1 << 12) -> CheckReport:
    """F(-q^l t^{1/2}) (sign -1) or F(q^l t^{1/2}) (sign +1) against the spin-sum formula."""
    rep = CheckReport("quasi.product_Gl", {"n": n, "l": l, "sign": sign, "cap": cap})
    if 2 ** (l * n) > budget:
        rep.verdict = BUDGET
        rep.witness = {"spin-configurations": 2 ** (l * n), "budget": budget}
        return rep
    flip = sign > 0
    ring = homogeneous_ring({"T": -U**2 if flip else U**2})
    q, sq = ring.q, ring.var("T")
    with timed(rep):
        J = spins(l)
        G = G_matrix(l, cap, ring)
        mus = {s: mu_weight(s, ring, flip) for s in J}
        norm = sum((mus[s] for s in J), ring.zero)
        total = RatioSeries(n, cap, {})
        for conf in itertools.product(J, repeat=n):
            w = ring.one
            for s in conf:
                w = w * mus[s]
            term = RatioSeries.constant(n, cap, w)
            for i, j in itertools.combinations(range(1, n + 1), 2):
                coeffs = G[(conf[i - 1], conf[j - 1])]
                term = term * geometric_terms(n, cap, ratio_exponent(n, i, j), lambda k, c=coeffs: c[k])
            total = total + term
        total = total.scale(ring.div(ring.one, norm**n))
        want = total * _pair_product(n, cap, ring, [-ring.div(q, sq)], [-sq])
        F = _special_F(n, cap, ring, -(q**l) * sq)
        if n == 4:
            want = want.restrict(subspace_n4)
        compare_series(rep, F, want, "F vs spin sum")
        rep.details["mu_sum"] = norm.to_text()
    return rep


# -- embedding into the k theta eigenspaces ------------------------------------------------------------
def embed_check(cap: int = 3, points: int = 2, seed: int = 0, perturb: bool = False) -> CheckReport:
    """For n = 3: prod_k (D - lambda_{k theta})^{m_k} F(alpha) = 0 on degree <= cap."""
    from .spectral import root_coordinates
    rng = random.Random(seed)
    rep = CheckReport("quasi.embed", {"cap": cap, "points": points, "perturb": perturb}, mode="sampled",
                      seeds=[seed])
    with timed(rep):
        for _ in range(points):
            pt = {"Q": random_rational(rng), "T": random_rational(rng), "A": random_rational(rng)}
            ring = SampledRing({**pt, "S1": 1, "S2": 1, "S3": 1})
            sym = homogeneous_ring()
            F = F_closed_n3(cap, sym).map_coeffs(ring.coerce)
            if perturb:
                F = F + RatioSeries.monomial(3, cap, (1, 2), ring.one)
            D = build_D(3, ring, cap)
            mult: dict = {}
            for j in D.basis:
                v = root_coordinates(j)
                k = max(v)
                if sorted(v) == [-k, 0, k]:
                    mult[k] = mult.get(k, 0) + 1
            G = F
            for k, m in sorted(mult.items()):
                lam = ring.q**k + ring.one + ring.div(ring.one, ring.q**k)
                for _ in range(m):
                    G = D.apply(G) - G.scale(lam)
            if not G.is_zero():
                e = min(G.support(), key=lambda e: (sum(e), e))
                rep.fail({"monomial": list(e), "residual": str(G.coefficient(e)),
                          "point": {k: str(v) for k, v in pt.items()}})
                break
        rep.details["k_multiplicities"] = {str(k): m for k, m in sorted(mult.items())}
    return rep
