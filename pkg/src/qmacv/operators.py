"""The difference operators D, D^r and the integral transform I(alpha).

Operators are stored as OpMatrix: one RatioSeries column per basis monomial.
Every operator here never lowers total degree, so a matrix truncated at a cap
acts exactly on inputs of degree <= cap.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .qadic import INF, InsufficientOrder, QSeries
from .rings import QAdicRing, Ring, coeff_is_zero
from .scalar import PoleError
from .series import RatioSeries, SeriesError, grlex_key, monomials, ratio_exponent


class OperatorError(ValueError):
    pass


class KernelPoleError(PoleError):
    pass


# -- matrices ---------------------------------------------------------------------------
@dataclass
class OpMatrix:
    n: int
    cap: int
    cols: dict  # column exponent -> RatioSeries
    window: tuple = ()
    name: str = ""

    def __post_init__(self):
        if not self.window:
            self.window = (0,) * (self.n - 1)

    @property
    def basis(self) -> list[tuple[int, ...]]:
        return sorted(self.cols, key=grlex_key)

    def column(self, e) -> RatioSeries:
        return self.cols[tuple(e)]

    def entry(self, row, col):
        return self.cols[tuple(col)].coefficient(row, 0)

    def diagonal(self, e):
        return self.entry(e, e)

    def apply(self, f: RatioSeries) -> RatioSeries:
        if f.n != self.n:
            raise SeriesError("shape mismatch")
        out = RatioSeries(self.n, min(self.cap, f.cap), {}, self.window)
        for e, c in f.terms.items():
            if sum(e) > out.cap:
                continue
            if e not in self.cols:
                raise OperatorError(f"monomial {e} outside the operator basis")
            out = out + self.cols[e].scale(c)
        return out

    def __matmul__(self, other: "OpMatrix") -> "OpMatrix":
        self._check(other)
        cols = {e: self.apply(col) for e, col in other.cols.items()}
        return OpMatrix(self.n, min(self.cap, other.cap), cols, self.window)

    def __sub__(self, other: "OpMatrix") -> "OpMatrix":
        self._check(other)
        cols = {e: self.cols[e] - other.cols[e] for e in self.cols}
        return OpMatrix(self.n, self.cap, cols, self.window)

    def __add__(self, other: "OpMatrix") -> "OpMatrix":
        self._check(other)
        cols = {e: self.cols[e] + other.cols[e] for e in self.cols}
        return OpMatrix(self.n, self.cap, cols, self.window)

    def scale(self, c) -> "OpMatrix":
        return OpMatrix(self.n, self.cap, {e: col.scale(c) for e, col in self.cols.items()}, self.window)

    def map_coeffs(self, fn) -> "OpMatrix":
        return OpMatrix(self.n, self.cap, {e: col.map_coeffs(fn) for e, col in self.cols.items()}, self.window)

    def _check(self, other):
        if self.n != other.n or set(self.cols) != set(other.cols):
            raise OperatorError("shape mismatch between operator matrices")

    def is_zero(self) -> bool:
        return all(col.is_zero() for col in self.cols.values())

    def first_nonzero(self):
        for c in self.basis:
            col = self.cols[c]
            if not col.is_zero():
                r = col.support()[0]
                return r, c, col.coefficient(r)
        return None

    def is_grading_triangular(self) -> bool:
        return all(sum(r) >= sum(c) for c, col in self.cols.items() for r in col.terms)

    def is_lower_triangular(self, key=grlex_key) -> bool:
        """Entries (r, c) vanish unless r follows or equals c in the given order."""
        return all(key(r) >= key(c) for c, col in self.cols.items() for r in col.terms)

    def min_precision(self) -> int:
        out = INF
        for col in self.cols.values():
            for c in col.terms.values():
                if isinstance(c, QSeries):
                    out = min(out, c.prec)
        return out

    def truncate_q(self, M: int) -> "OpMatrix":
        return self.map_coeffs(lambda c: c.truncate(M) if isinstance(c, QSeries) else c)

    def to_text(self) -> str:
        basis = self.basis
        index = {e: k for k, e in enumerate(basis)}
        lines = [f"# n={self.n} cap={self.cap}"]
        lines.append("# basis " + " ".join(",".join(map(str, e)) for e in basis))
        for c in basis:
            for r, v in self.cols[c].items_sorted():
                lines.append(f"{index[r]} {index[c]} {v.to_text() if hasattr(v, 'to_text') else v}")
        return "\n".join(lines) + "\n"


def commutator(a: OpMatrix, b: OpMatrix) -> OpMatrix:
    return (a @ b) - (b @ a)


def identity_matrix(n: int, cap: int, ring: Ring, window=None) -> OpMatrix:
    basis = monomials(n - 1, cap, window)
    return OpMatrix(n, cap, {e: RatioSeries.monomial(n, cap, e, ring.one, window) for e in basis},
                    tuple(window or ()))


# -- theta factors and D ------------------------------------------------------------------
def theta_series(n: int, cap: int, i: int, j: int, sign: int, ring: Ring) -> RatioSeries:
    """theta_{+}(zeta_j/zeta_i) or theta_{-}(zeta_j/zeta_i) for i < j."""
    q, t = ring.q, ring.t
    e = ratio_exponent(n, i, j)
    d = sum(e)
    if sign > 0:
        lead = ring.one - ring.div(ring.one, t)
        base = q
    else:
        lead = ring.one - t
        base = ring.div(ring.one, q)
    terms = {(0,) * (n - 1): ring.one}
    m = 1
    pw = base
    while m * d <= cap:
        terms[tuple(m * x for x in e)] = lead * pw
        pw = pw * base
        m += 1
    return RatioSeries(n, cap, terms)


def _theta_product(n: int, cap: int, I: tuple[int, ...], ring: Ring, cache: dict) -> RatioSeries:
    """prod over i in I, k not in I of theta_-(zeta_i/zeta_k) (k<i) and theta_+(zeta_k/zeta_i) (k>i)."""
    out = RatioSeries.constant(n, cap, ring.one)
    Iset = set(I)
    for i in I:
        for k in range(1, n + 1):
            if k in Iset:
                continue
            if k < i:
                key = (k, i, -1)
            else:
                key = (i, k, +1)
            if key not in cache:
                cache[key] = theta_series(n, cap, key[0], key[1], key[2], ring)
            out = out * cache[key]
    return out


def shift_factor(j: tuple[int, ...], I, ring: Ring):
    """prod_{i in I} s_i q^{-j_{i-1} + j_i}."""
    jj = (0,) + tuple(j) + (0,)
    out = ring.one
    q = ring.q
    for i in I:
        p = -jj[i - 1] + jj[i]
        out = out * ring.s(i) * (q**p if p >= 0 else ring.div(ring.one, q ** (-p)))
    return out


def build_Dr(n: int, r: int, ring: Ring, cap: int, window=None) -> OpMatrix:
    """Matrix of D^r on monomials of degree <= cap (optionally Laurent-windowed)."""
    if not 1 <= r <= n:
        raise OperatorError(f"r={r} out of range 1..{n}")
    window = tuple(window) if window else (0,) * (n - 1)
    basis = monomials(n - 1, cap, window)
    lo = min(sum(e) for e in basis)
    span = cap - min(lo, 0)
    cache: dict = {}
    subsets = list(itertools.combinations(range(1, n + 1), r))
    products = {I: _theta_product(n, span, I, ring, cache) for I in subsets}
    cols = {}
    for j in basis:
        col = RatioSeries(n, cap, {}, window)
        for I in subsets:
            coef = shift_factor(j, I, ring)
            prod = products[I]
            terms = {}
            for e, c in prod.terms.items():
                e2 = tuple(a + b for a, b in zip(e, j))
                if sum(e2) <= cap:
                    terms[e2] = c * coef
            col = col + RatioSeries(n, cap, terms, window)
        cols[j] = col
    return OpMatrix(n, cap, cols, window, name=f"D^{r}")


def build_D(n: int, ring: Ring, cap: int, window=None) -> OpMatrix:
    return build_Dr(n, 1, ring, cap, window)


def D_diagonal(n: int, j: tuple[int, ...], ring: Ring):
    """sum_i s_i q^{-j_{i-1} + j_i}."""
    out = ring.zero
    for i in range(1, n + 1):
        out = out + shift_factor(j, (i,), ring)
    return out


def apply_D(f: RatioSeries, ring: Ring, r: int = 1) -> RatioSeries:
    return build_Dr(f.n, r, ring, f.cap, f.window).apply(f)


# -- the integral transform, constant-term engine ---------------------------------------------
def _qs(ring: QAdicRing, x) -> QSeries:
    return ring.coerce(x)


@dataclass
class IntegralEngine:
    """Evaluates I(alpha) on monomials modulo Q^(M+1) and total x-degree cap.

    All parameters other than Q are rationals fixed in ``ring.point``; alpha
    is any Laurent series in Q (typically a rational times a power of Q).
    """

    n: int
    cap: int
    M: int
    ring: QAdicRing
    alpha: QSeries
    support: Callable[[tuple], bool] | None = None
    columns: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = _qs(self.ring, self.alpha)

    # ----- scalar pieces -----
    def _c(self) -> QSeries:
        return QSeries.monomial(1, 1) * self.ring.div(self.ring.one, self.ring.var("T"))

    def _a(self, i: int) -> QSeries:
        return self.ring.div(self.alpha, self.ring.s(i))

    def _kernel_val(self, a: QSeries, e: int) -> int:
        """Exact Q-valuation of c^e/(1 - a q^e); raises on a kernel pole."""
        d = 1 - a * QSeries.monomial(2 * e, 1)
        if d.is_zero():
            raise KernelPoleError(f"kernel pole: a q^{e} = 1")
        v = d.valuation()
        if v >= d.prec:
            raise InsufficientOrder("kernel denominator not resolved")
        return e - v

    def _envelopes(self, Mw: int):
        """1-Lipschitz lower envelopes of the kernel valuations, one per i."""
        envs = []
        for i in range(1, self.n + 1):
            a = self._a(i)
            oa = max(0, a.valuation())
            B = Mw + 2 * abs(a.valuation()) + 4
            kv = {e: self._kernel_val(a, e) for e in range(-B, B + 1)}

            def base(e, kv=kv, B=B, oa=oa):
                return kv[e] if -B <= e <= B else abs(e) - oa

            env = {e: min(base(f) + abs(e - f) for f in range(-B, B + 1)) for e in range(-B, B + 1)}
            envs.append((env, B, oa))
        return envs

    @staticmethod
    def _env(envs, i, e):
        env, B, oa = envs[i]
        if -B <= e <= B:
            return env[e]
        return abs(e) - oa

    def _kernel(self, a: QSeries, e: int, Mw: int) -> QSeries:
        c = self._c()
        num = c**e if e >= 0 else self.ring.div(self.ring.one, c ** (-e))
        d = 1 - a * QSeries.monomial(2 * e, 1)
        return num * d.inverse_to(Mw - e + d.valuation() + 2)

    def prefactor(self, i: int, Mw: int) -> QSeries:
        """(qt^{-1};q)_inf (a;q)_inf / ((a q t^{-1};q)_inf (q;q)_inf) modulo Q^Mw."""
        from .qadic import qseries_pochhammer_inf
        ring = self.ring
        q = QSeries.monomial(2, 1)
        tinv = ring.div(ring.one, ring.t)
        a = self._a(i)
        P = Mw + 2 * abs(min(0, a.valuation())) + 8
        num = qseries_pochhammer_inf(q * tinv, q, P) * qseries_pochhammer_inf(a, q, P)
        den = qseries_pochhammer_inf(a * q * tinv, q, P) * qseries_pochhammer_inf(q, q, P)
        return num * den.inverse_to(P)

    def _g_coeffs(self, K: int, Mw: int) -> list:
        """Coefficients of g(u) = sum_m (t;q)_m/(q;q)_m (c u)^m, m <= K."""
        ring = self.ring
        q = QSeries.monomial(2, 1)
        t = ring.t
        c = self._c()
        out = [QSeries.const(1)]
        num = QSeries.const(1)
        den = QSeries.const(1)
        for m in range(1, K + 1):
            num = num * (1 - t * q ** (m - 1))
            den = den * (1 - q**m)
            out.append(num * den.inverse_to(Mw + 2) * c**m)
        return out

    def _h_series(self, Mw: int) -> RatioSeries:
        """prod_{i<j} h(zeta_j/zeta_i), h(u) = (1-u)(q t^{-1} u;q)/(t u;q)."""
        from .qhyper import qproduct_coeffs
        ring = self.ring
        n, cap = self.n, self.cap
        q = QSeries.monomial(2, 1)
        t = ring.t
        qc = qproduct_coeffs([q * ring.div(ring.one, t)], [t], cap, _TruncRing(ring, Mw))
        out = RatioSeries.constant(n, cap, QSeries.const(1))
        for i, j in itertools.combinations(range(1, n + 1), 2):
            e = ratio_exponent(n, i, j)
            d = sum(e)
            terms = {}
            k = 0
            while k * d <= cap:
                prev = qc[k - 1] if k >= 1 else None
                coef = qc[k] - prev if prev is not None else qc[k]
                terms[tuple(k * x for x in e)] = coef
                k += 1
            out = out * RatioSeries(n, cap, terms)
        return out

    # ----- main expansion -----
    def column(self, j: tuple[int, ...]) -> RatioSeries:
        j = tuple(j)
        if j in self.columns:
            return self.columns[j]
        Mw = self.M + 1 + 2 * max(0, -self.alpha.valuation()) * self.n + 2
        for _ in range(6):
            col = self._column_at(j, Mw)
            short = [e for e, c in col.terms.items() if c.prec < self.M + 1]
            if not short:
                col = col.map_coeffs(lambda c: c.with_prec(self.M + 1))
                self.columns[j] = col
                return col
            Mw += 4
        raise InsufficientOrder(f"column {j}: precision below Q^{self.M + 1} after escalation")

    def _column_at(self, j: tuple[int, ...], Mw: int) -> RatioSeries:
        n, cap = self.n, self.cap
        if sum(j) > cap:
            return RatioSeries(n, cap, {})
        envs = self._envelopes(Mw)
        nv = n - 1
        gco = self._g_coeffs(Mw + cap + 2, Mw)
        # factor list: (x-exponent per unit, w-exponent per unit)
        factors = []
        for k in range(1, n + 1):
            for jj in range(k, n + 1):
                xe = ratio_exponent(n, k, jj) if jj > k else (0,) * nv
                we = tuple(1 if m == jj else 0 for m in range(1, n + 1))
                factors.append((xe, we))
            for i in range(1, k):
                xe = ratio_exponent(n, i, k)
                we = tuple(-1 if m == i else 0 for m in range(1, n + 1))
                factors.append((xe, we))
        # f(xi) = x^j with xi_{m+1}/xi_m = x_m w_{m+1}/w_m: w_i gets j_{i-1} - j_i
        jj = (0,) + j + (0,)
        w0 = tuple(jj[i - 1] - jj[i] for i in range(1, n + 1))
        support = self.support

        def potential(val, w):
            return val + sum(self._env(envs, i, w[i]) for i in range(n))

        state = {(j, w0): QSeries.const(1)}
        # multiply x-carrying factors first, then the pure g(w_k) ones
        factors.sort(key=lambda f: -sum(f[0]))
        for xe, we in factors:
            new: dict = {}
            for (x, w), coef in state.items():
                v0 = coef.valuation()
                m = 0
                x2, w2 = x, w
                # the potential never decreases with m, so stop at the first overshoot
                while sum(x2) <= cap and potential(v0 + m, w2) < Mw:
                    if support is not None and not support(x2):
                        break
                    term = coef if m == 0 else coef * gco[m]
                    key = (x2, w2)
                    new[key] = new[key] + term if key in new else term
                    m += 1
                    x2 = tuple(a + m * b for a, b in zip(x, xe))
                    w2 = tuple(a + m * b for a, b in zip(w, we))
            state = {k: v for k, v in new.items() if not v.is_zero()}
        # constant term in every w_i
        kernels: dict = {}
        out: dict = {}
        for (x, w), coef in state.items():
            val = coef.valuation()
            if potential(val, w) >= Mw:
                continue
            term = coef
            for i in range(n):
                key = (i, w[i])
                if key not in kernels:
                    kernels[key] = self._kernel(self._a(i + 1), w[i], Mw)
                term = term * kernels[key]
            out[x] = out[x] + term if x in out else term
        body = RatioSeries(n, cap, {x: c.with_prec(Mw) for x, c in out.items()})
        pref = QSeries.const(1)
        for i in range(1, n + 1):
            pref = pref * self.prefactor(i, Mw)
        res = (self._h_series(Mw) * body).scale(pref)
        if support is not None:
            res = res.restrict(support)
        return res

    def matrix(self, basis=None) -> OpMatrix:
        basis = basis or monomials(self.n - 1, self.cap)
        if self.support is not None:
            basis = [e for e in basis if self.support(e)]
        return OpMatrix(self.n, self.cap, {e: self.column(e) for e in basis}, name="I(alpha)")

    def apply(self, f: RatioSeries) -> RatioSeries:
        out = RatioSeries(self.n, self.cap, {})
        for e, c in f.terms.items():
            if sum(e) > self.cap:
                continue
            if self.support is not None and not self.support(e):
                continue
            out = out + self.column(e).scale(_qs(self.ring, c))
        return out


class _TruncRing:
    """Ring view that inverts exact series to a fixed precision."""

    def __init__(self, ring: QAdicRing, prec: int):
        self.ring = ring
        self.prec = prec
        self.q = ring.q
        self.t = ring.t
        self.one = QSeries.const(1)
        self.zero = QSeries.const(0)

    def div(self, a, b):
        return a * b.inverse_to(self.prec + 4)


def apply_I_integral(alpha, f: RatioSeries, ring: QAdicRing, M: int, cap: int | None = None,
                     support=None) -> RatioSeries:
    """I(alpha) f modulo Q^(M+1) and degree cap (constant-term mode)."""
    eng = IntegralEngine(f.n, cap if cap is not None else f.cap, M, ring, alpha, support)
    return eng.apply(f)


def build_I_integral(alpha, n: int, ring: QAdicRing, cap: int, M: int, support=None) -> OpMatrix:
    return IntegralEngine(n, cap, M, ring, alpha, support).matrix()


# -- spectral mode ------------------------------------------------------------------------------
def eigenvalue_I(alpha, j: tuple[int, ...], ring: Ring):
    """lambda_j(alpha) = prod_i (a_i;q)_{d_i} / (a_i q t^{-1};q)_{d_i}, d_i = j_{i-1} - j_i."""
    from .scalar import qpoch
    n = len(j) + 1
    jj = (0,) + tuple(j) + (0,)
    q, t = ring.q, ring.t
    out = ring.one
    for i in range(1, n + 1):
        d = jj[i - 1] - jj[i]
        a = ring.div(alpha, ring.s(i))
        out = out * ring.div(qpoch(a, d, q), qpoch(ring.div(a * q, t), d, q))
    return out


def build_I_spectral(alpha, n: int, ring: Ring, cap: int) -> OpMatrix:
    """P Lambda(alpha) P^{-1} over the D-eigenbasis (generic s only)."""
    from .spectral import DegeneracyError, eigenbasis
    basis = monomials(n - 1, cap)
    lams = {j: eigenvalue_I(alpha, j, ring) for j in basis}
    eig = eigenbasis(n, ring, cap)
    seen = {}
    for j in basis:
        dj = D_diagonal(n, j, ring)
        k = _key(dj)
        if k in seen:
            raise DegeneracyError(f"degenerate D eigenvalue at {seen[k]} and {j}; use the Jordan machinery")
        seen[k] = j
    # P maps e_j -> f_j; P^{-1} by back-substitution (unit lower triangular)
    inv = _unit_triangular_inverse(eig, basis, ring, n, cap)
    cols = {}
    for c in basis:
        pinv_col = inv[c]
        col = RatioSeries(n, cap, {})
        for j, coef in pinv_col.terms.items():
            col = col + eig[j].scale(coef * lams[j])
        cols[c] = col
    return OpMatrix(n, cap, cols, name="I_spectral")


def _key(x):
    return x.key() if hasattr(x, "key") else str(x)


def _unit_triangular_inverse(eig: dict, basis, ring: Ring, n: int, cap: int) -> dict:
    """Columns of P^{-1}: x^c = sum_j d_{jc} f_j."""
    out = {}
    for c in basis:
        rem = RatioSeries.monomial(n, cap, c, ring.one)
        coeffs = {}
        for j in basis:
            a = rem.coefficient(j, None)
            if a is None or coeff_is_zero(a):
                continue
            coeffs[j] = a
            rem = rem - eig[j].scale(a)
        out[c] = RatioSeries(n, cap, coeffs)
    return out


# -- checks ------------------------------------------------------------------------------------
def _sample_point(rng, n: int, homogeneous: bool = False) -> dict:
    from .scalar import random_rational
    pt = {"T": random_rational(rng)}
    for i in range(1, n + 1):
        pt[f"S{i}"] = 1 if homogeneous else random_rational(rng)
    return pt


def _matrix_witness(rep, C: OpMatrix, label: str) -> bool:
    bad = C.first_nonzero()
    if bad is None:
        return True
    r, c, v = bad
    if rep.passed:
        rep.fail({"where": label, "row": list(r), "col": list(c),
                  "entry": v.to_text() if hasattr(v, "to_text") else str(v)})
    return False


def theta_kernel_check(M: int = 12, seed: int = 0):
    """sum_n z^n/(1 - a q^n) = (q;q)^2 th(az)/(th(a) th(z)), th(x) = (x;q)(q/x;q), at z = Q r."""
    import random
    from .qadic import qseries_pochhammer_inf
    from .report import CheckReport, timed
    from .scalar import random_rational
    rng = random.Random(seed)
    a, r = random_rational(rng), random_rational(rng)
    rep = CheckReport("operators.theta_kernel", {"M": M}, mode="q-adic", seeds=[seed])
    with timed(rep):
        P = M + 6
        q = QSeries.monomial(2, 1)
        z = QSeries.monomial(1, r)
        A = QSeries.const(a)
        lhs = QSeries.zero(P)
        for k in range(-P, P + 1):
            num = z**k if k >= 0 else (z ** (-k)).inverse()
            lhs = lhs + num * (1 - A * QSeries.monomial(2 * k, 1)).inverse_to(P + 2 * abs(k) + 2)
        lhs = lhs.with_prec(M + 1)

        def th(x):
            return qseries_pochhammer_inf(x, q, P) * qseries_pochhammer_inf(q * x.inverse(), q, P)

        qq = qseries_pochhammer_inf(q, q, P)
        rhs = (qq * qq * th(A * z) * (th(A) * th(z)).inverse_to(P)).with_prec(M + 1)
        k = lhs.first_difference(rhs)
        if k is not None:
            rep.fail({"Q-power": k, "lhs": str(lhs), "rhs": str(rhs)})
        # constant-term sanity: CT_w [sum_k w^{-k}/(1 - a q^k) w^m] = 1/(1 - a q^m)
        for m in range(-3, 4):
            coeff = (1 - A * QSeries.monomial(2 * m, 1)).inverse_to(M + 2 * abs(m) + 2)
            expect = (1 - A * QSeries.monomial(2 * m, 1)).inverse_to(M + 2 * abs(m) + 2)
            if coeff.first_difference(expect) is not None:
                rep.fail({"constant-term": m})
        rep.details["point"] = {"a": str(a), "r": str(r)}
    return rep


def prefactor_identity_check(M: int = 12, seed: int = 0):
    """The engine's per-i prefactor against the unsimplified normalization times
    the Kronecker factor (q;q)^-2 (a;q)(q/a;q)."""
    import random
    from .qadic import qseries_pochhammer_inf
    from .report import CheckReport, timed
    from .scalar import random_rational
    rng = random.Random(seed)
    pt = _sample_point(rng, 2)
    alpha = random_rational(rng)
    rep = CheckReport("operators.prefactor", {"M": M}, mode="q-adic", seeds=[seed])
    with timed(rep):
        ring = QAdicRing(pt, M + 4)
        eng = IntegralEngine(2, 1, M, ring, alpha)
        q = QSeries.monomial(2, 1)
        P = M + 6
        tinv = ring.div(ring.one, ring.t)

        def poch(x):
            return qseries_pochhammer_inf(x, q, P)

        for i in (1, 2):
            a = eng._a(i)
            norm = poch(q * tinv) * poch(q) * (poch(a * q * tinv) * poch(q * a.inverse())).inverse_to(P)
            kron = poch(a) * poch(q * a.inverse()) * (poch(q) * poch(q)).inverse_to(P)
            want = (norm * kron).with_prec(M + 1)
            got = eng.prefactor(i, P).with_prec(M + 1)
            k = got.first_difference(want)
            if k is not None:
                rep.fail({"i": i, "Q-power": k})
            # the three-factor form without 1/(q;q) is off by exactly that factor
            short = (poch(a) * poch(q * tinv) * poch(a * q * tinv).inverse_to(P)).with_prec(M + 1)
            rep.details[f"differs_from_three_factor_form_i{i}"] = short.first_difference(got) is not None
    return rep


def integral_vs_spectral_check(n: int = 2, cap: int = 3, M: int = 8, seed: int = 0):
    import random
    from .report import CheckReport, timed
    from .scalar import random_rational
    rng = random.Random(seed)
    pt = _sample_point(rng, n)
    alpha = random_rational(rng)
    rep = CheckReport("operators.integral_vs_spectral", {"n": n, "cap": cap, "M": M}, mode="q-adic",
                      seeds=[seed])
    with timed(rep):
        ring = QAdicRing(pt, M + 4)
        I = build_I_integral(alpha, n, ring, cap, M)
        S = build_I_spectral(ring.coerce(alpha), n, ring, cap).truncate_q(M)
        _matrix_witness(rep, (I - S).truncate_q(M), "integral - spectral")
        rep.details["point"] = {k: str(v) for k, v in pt.items()} | {"alpha": str(alpha)}
    return rep


def commute_ID_check(n: int = 2, cap: int = 3, M: int = 8, points: int = 2, seed: int = 0):
    """[I_integral(alpha), D] = 0 modulo Q^(M+1) on degree <= cap."""
    import random
    from .report import CheckReport, timed
    from .scalar import random_rational
    rng = random.Random(seed)
    pt = _sample_point(rng, n)
    rep = CheckReport("operators.commute_ID", {"n": n, "cap": cap, "M": M, "points": points},
                      mode="q-adic", seeds=[seed])
    with timed(rep):
        ring = QAdicRing(pt, M + 4)
        D = build_D(n, ring, cap)
        alphas = []
        for _ in range(points):
            alpha = random_rational(rng)
            alphas.append(str(alpha))
            I = build_I_integral(alpha, n, ring, cap, M)
            if not _matrix_witness(rep, commutator(I, D).truncate_q(M), f"alpha={alpha}"):
                break
        rep.details["point"] = {k: str(v) for k, v in pt.items()}
        rep.details["alphas"] = alphas
    return rep


def spectral_commute_check(n: int = 2, cap: int = 4, seed: int = 0):
    """[I_spectral(alpha), I_spectral(beta)] = 0 (consistency of the construction)."""
    import random
    from .report import CheckReport, timed
    from .rings import SymbolicRing
    from .scalar import A, random_rational
    rng = random.Random(seed)
    rep = CheckReport("operators.spectral_commute", {"n": n, "cap": cap}, seeds=[seed])
    with timed(rep):
        ring = SymbolicRing({f"S{i}": random_rational(rng) for i in range(1, n + 1)})
        beta = ring.coerce(random_rational(rng))
        Ia = build_I_spectral(A, n, ring, cap)
        Ib = build_I_spectral(beta, n, ring, cap)
        _matrix_witness(rep, commutator(Ia, Ib), "commutator")
    return rep


def eigenvalue_consistency_check(jmax: int = 4):
    """The general eigenvalue product against the two-variable form with (q/t)^i."""
    from .report import CheckReport, timed
    from .rings import SymbolicRing
    from .scalar import A, qpoch
    rep = CheckReport("operators.eigenvalue_forms", {"jmax": jmax})
    ring = SymbolicRing()
    with timed(rep):
        q, t = ring.q, ring.t
        s1, s2 = ring.s(1), ring.s(2)
        for i in range(1, jmax + 1):
            general = eigenvalue_I(A, (i,), ring)
            two = (qpoch(s1 * t / A, i, q) / qpoch(s1 * q / A, i, q)
                   * qpoch(A / s2, i, q) / qpoch(A * q / (s2 * t), i, q) * (q / t) ** i)
            if not (general - two).is_zero():
                rep.fail({"j": i, "lhs": general.to_text(), "rhs": two.to_text()})
                break
    return rep


def structure_check(n: int = 3, cap: int = 4):
    """Triangularity, diagonals, D^1 = D, D^n scalar, and degree preservation."""
    from .report import CheckReport, timed
    from .rings import SymbolicRing
    rep = CheckReport("operators.structure", {"n": n, "cap": cap})
    ring = SymbolicRing()
    with timed(rep):
        D = build_D(n, ring, cap)
        if not D.is_grading_triangular():
            rep.fail({"where": "D triangularity"})
        for j in D.basis:
            if not (D.diagonal(j) - D_diagonal(n, j, ring)).is_zero():
                rep.fail({"where": "D diagonal", "j": list(j)})
                break
        _matrix_witness(rep, build_Dr(n, 1, ring, cap) - D, "D^1 - D")
        prod_s = ring.one
        for i in range(1, n + 1):
            prod_s = prod_s * ring.s(i)
        Dn = build_Dr(n, n, ring, cap)
        _matrix_witness(rep, Dn - identity_matrix(n, cap, ring).scale(prod_s), "D^n - prod s")
        for r in range(2, n):
            Dr = build_Dr(n, r, ring, cap)
            if not Dr.is_grading_triangular():
                rep.fail({"where": f"D^{r} triangularity"})
    return rep
