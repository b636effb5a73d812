"""Truncated Laurent series in Q with absolute precision tracking.

A value is ``Q**v * p(Q) + O(Q**prec)``.  Exact quantities carry
``prec = INF``.  Coefficients are rationals (held in a flint ``fmpq_poly``)
or, when other parameters stay symbolic, Q-free ParamScalars.
"""

from __future__ import annotations

from fractions import Fraction

import flint

from .scalar import ONE, ParamScalar, PoleError, ScalarError, split_powers

INF = 1 << 40


class QAdicError(ScalarError):
    pass


class InsufficientOrder(QAdicError):
    """Result precision fell below the requested q-order."""


def _to_fmpq(x):
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, int):
        return flint.fmpq(x)
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if type(x).__name__ == "mpq":
        return flint.fmpq(int(x.numerator), int(x.denominator))
    if isinstance(x, ParamScalar) and x.is_constant():
        f = x.to_fraction()
        return flint.fmpq(f.numerator, f.denominator)
    return None


class QSeries:
    """Element of K((Q)) known modulo Q**prec; K is Q or a Q-free function field."""

    __slots__ = ("v", "c", "prec", "sym")

    def __init__(self, v: int, coeffs, prec: int = INF, sym: bool | None = None):
        if sym is None:
            sym = not isinstance(coeffs, flint.fmpq_poly) and any(isinstance(x, ParamScalar) for x in coeffs)
        self.sym = sym
        if not sym and not isinstance(coeffs, flint.fmpq_poly):
            coeffs = flint.fmpq_poly([_to_fmpq(x) for x in coeffs])
        if sym:
            coeffs = [ParamScalar.coerce(x) for x in (coeffs if isinstance(coeffs, list) else _coeff_list(coeffs))]
        self.v = v
        self.prec = prec
        self.c = coeffs
        self._trim()

    def _trim(self):
        room = self.prec - self.v
        if self.sym:
            c = self.c
            if room < len(c):
                c = c[: max(room, 0)]
            k = 0
            while k < len(c) and c[k].is_zero():
                k += 1
            if k:
                c = c[k:]
                self.v += k
            while c and c[-1].is_zero():
                c.pop()
            self.c = c
            if not c:
                self.v = min(self.prec, self.v) if self.prec < INF else 0
        else:
            p = self.c
            if room < p.length():
                p = p.truncate(max(room, 0)) if room > 0 else flint.fmpq_poly([])
            if p.is_zero():
                self.c = p
                self.v = min(self.prec, self.v) if self.prec < INF else 0
                return
            k = 0
            while p[k] == 0:
                k += 1
            if k:
                p = p.right_shift(k) if hasattr(p, "right_shift") else flint.fmpq_poly(p.coeffs()[k:])
                self.v += k
            self.c = p

    # -- construction ------------------------------------------------------------
    @classmethod
    def const(cls, x, prec: int = INF) -> "QSeries":
        r = _to_fmpq(x)
        if r is not None:
            return cls(0, flint.fmpq_poly([r]), prec, False)
        return cls(0, [ParamScalar.coerce(x)], prec, True)

    @classmethod
    def monomial(cls, k: int, coeff=1, prec: int = INF) -> "QSeries":
        r = _to_fmpq(coeff)
        if r is not None:
            return cls(k, flint.fmpq_poly([r]), prec, False)
        return cls(k, [ParamScalar.coerce(coeff)], prec, True)

    @classmethod
    def zero(cls, prec: int = INF) -> "QSeries":
        return cls(0, flint.fmpq_poly([]), prec, False)

    # -- views ----------------------------------------------------------------------
    def coeff_list(self) -> list:
        if self.sym:
            return list(self.c)
        return [Fraction(int(x.p), int(x.q)) for x in self.c.coeffs()]

    def coefficient(self, k: int):
        if k >= self.prec:
            raise InsufficientOrder(f"coefficient Q^{k} beyond precision {self.prec}")
        i = k - self.v
        if self.sym:
            return self.c[i] if 0 <= i < len(self.c) else ParamScalar.coerce(0)
        if 0 <= i < self.c.length():
            x = self.c[i]
            return Fraction(int(x.p), int(x.q))
        return Fraction(0)

    def length(self) -> int:
        return len(self.c) if self.sym else self.c.length()

    def valuation(self) -> int:
        """Index of the first nonzero coefficient, or prec if none is known."""
        return self.v if self.length() else self.prec

    def is_exact(self) -> bool:
        return self.prec >= INF

    def is_zero(self) -> bool:
        """True when zero modulo Q**prec."""
        return self.length() == 0

    def __bool__(self):
        return not self.is_zero()

    def with_prec(self, prec: int) -> "QSeries":
        return QSeries(self.v, self.c if not self.sym else list(self.c), min(prec, self.prec), self.sym)

    def _promote(self) -> "QSeries":
        if self.sym:
            return self
        return QSeries(self.v, [ParamScalar.coerce(x) for x in self.coeff_list()], self.prec, True)

    # -- arithmetic -----------------------------------------------------------------------
    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, ParamScalar):
            return qadic_truncate(other, None)
        r = _to_fmpq(other)
        if r is None:
            raise TypeError(f"cannot coerce {type(other).__name__} to QSeries")
        return QSeries(0, flint.fmpq_poly([r]), INF, False)

    def __add__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self, o
        if a.sym != b.sym:
            a, b = a._promote(), b._promote()
        prec = min(a.prec, b.prec)
        if a.length() == 0:
            return b.with_prec(prec)
        if b.length() == 0:
            return a.with_prec(prec)
        v = min(a.v, b.v)
        if a.sym:
            n = max(a.v + len(a.c), b.v + len(b.c)) - v
            out = [ParamScalar.coerce(0)] * n
            for k, x in enumerate(a.c):
                out[a.v - v + k] = out[a.v - v + k] + x
            for k, x in enumerate(b.c):
                out[b.v - v + k] = out[b.v - v + k] + x
            return QSeries(v, out, prec, True)
        pa = a.c if a.v == v else _lshift(a.c, a.v - v)
        pb = b.c if b.v == v else _lshift(b.c, b.v - v)
        return QSeries(v, pa + pb, prec, False)

    __radd__ = __add__

    def __neg__(self):
        if self.sym:
            return QSeries(self.v, [-x for x in self.c], self.prec, True)
        return QSeries(self.v, -self.c, self.prec, False)

    def __sub__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        a, b = self, o
        if a.sym != b.sym:
            a, b = a._promote(), b._promote()
        # absolute precision of a product: min(p_a + v_b, p_b + v_a)
        prec = min(_padd(a.prec, b.valuation()), _padd(b.prec, a.valuation()))
        v = a.v + b.v
        if a.length() == 0 or b.length() == 0:
            return QSeries.zero(prec) if not a.sym else QSeries(0, [], prec, True)
        room = prec - v
        if a.sym:
            la, lb = len(a.c), len(b.c)
            n = la + lb - 1
            if room < n:
                n = max(room, 0)
            out = []
            for k in range(n):
                acc = ParamScalar.coerce(0)
                for i in range(max(0, k - lb + 1), min(k, la - 1) + 1):
                    acc = acc + a.c[i] * b.c[k - i]
                out.append(acc)
            return QSeries(v, out, prec, True)
        if room < a.c.length() + b.c.length() - 1:
            if room <= 0:
                return QSeries(v, flint.fmpq_poly([]), prec, False)
            return QSeries(v, a.c.mul_low(b.c, room), prec, False)
        return QSeries(v, a.c * b.c, prec, False)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        if self.length() == 0:
            raise PoleError("inverse of a series that vanishes to its precision")
        # relative precision is preserved under inversion
        rel = self.prec - self.v if self.prec < INF else None
        v = -self.v
        if rel is None:
            if self.length() == 1:
                if self.sym:
                    return QSeries(v, [self.c[0].inverse()], INF, True)
                return QSeries(v, flint.fmpq_poly([1 / self.c[0]]), INF, False)
            raise InsufficientOrder("inverse of an exact non-monomial needs a precision; use inverse_to")
        return self._inverse_rel(rel)

    def inverse_to(self, prec: int) -> "QSeries":
        """Inverse known modulo Q**prec (absolute)."""
        if self.length() == 0:
            raise PoleError("inverse of a series that vanishes to its precision")
        rel = prec + self.v
        if self.prec < INF:
            rel = min(rel, self.prec - self.v)
        return self._inverse_rel(rel)

    def _inverse_rel(self, rel: int) -> "QSeries":
        v = -self.v
        if rel <= 0:
            return QSeries(v, flint.fmpq_poly([]) if not self.sym else [], v + max(rel, 0), self.sym)
        if self.sym:
            c = self.c
            inv0 = c[0].inverse()
            out = [inv0]
            for k in range(1, rel):
                acc = ParamScalar.coerce(0)
                for j in range(1, min(k, len(c) - 1) + 1):
                    acc = acc + c[j] * out[k - j]
                out.append(-acc * inv0)
            return QSeries(v, out, v + rel, True)
        return QSeries(v, _poly_inv(self.c, rel), v + rel, False)

    def __truediv__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        if o.is_exact() and o.length() > 1:
            if self.is_exact():
                raise InsufficientOrder("exact quotient of series needs a precision; use div_to")
            return self * o.inverse_to(self.prec - o.v - self.valuation())
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def div_to(self, other, prec: int) -> "QSeries":
        o = self._coerce(other)
        return (self.with_prec(prec) if self.prec > prec else self) * o.inverse_to(prec - self.valuation() + o.valuation())

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        out = QSeries.const(1) if not self.sym else QSeries(0, [ONE], INF, True)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def shift(self, k: int) -> "QSeries":
        """Multiply by Q**k."""
        return QSeries(self.v + k, self.c if not self.sym else list(self.c),
                       self.prec + k if self.prec < INF else INF, self.sym)

    def __eq__(self, other):
        try:
            o = self._coerce(other)
        except TypeError:
            return NotImplemented
        return (self - o).is_zero()

    def __hash__(self):
        raise TypeError("QSeries is unhashable")

    def first_difference(self, other) -> int | None:
        """Lowest Q power where self and other differ (None if equal to precision)."""
        d = self - other
        return None if d.is_zero() else d.v

    def truncate(self, M: int) -> "QSeries":
        """Reduce modulo Q**(M+1)."""
        return self.with_prec(M + 1)

    def __repr__(self):
        terms = []
        for k, x in enumerate(self.coeff_list()):
            if x != 0:
                terms.append(f"({x})*Q^{self.v + k}")
        body = " + ".join(terms) or "0"
        return body if self.prec >= INF else f"{body} + O(Q^{self.prec})"

    def to_scalar(self) -> ParamScalar:
        """The stored polynomial part as a ParamScalar (exact only if prec is INF)."""
        out = ParamScalar.coerce(0)
        Q = ParamScalar.var("Q")
        for k, x in enumerate(self.coeff_list()):
            if x != 0:
                out = out + ParamScalar.coerce(x) * Q ** (self.v + k)
        return out


def _poly_inv(p, n: int):
    """Inverse of a polynomial with nonzero constant term modulo x^n (Newton iteration).

    flint's fmpq_series is capped by a global context precision, so the
    iteration is done on fmpq_poly with mul_low instead.
    """
    g = flint.fmpq_poly([1 / p[0]])
    k = 1
    two = flint.fmpq_poly([2])
    while k < n:
        k = min(2 * k, n)
        g = g.mul_low(two - p.mul_low(g, k), k)
    return g


def _padd(p: int, k: int) -> int:
    return INF if p >= INF else p + k


def _lshift(p, k):
    return p.left_shift(k) if hasattr(p, "left_shift") else flint.fmpq_poly([0] * k + p.coeffs())


def _coeff_list(p):
    if isinstance(p, flint.fmpq_poly):
        return [Fraction(int(x.p), int(x.q)) for x in p.coeffs()]
    return list(p)


def qadic_truncate(f, M: int | None, allow_laurent: bool = False) -> QSeries:
    """Power series of f in Q modulo Q**(M+1); M=None keeps polynomials exact.

    Raises QAdicError if f has a pole at Q = 0 unless ``allow_laurent``.
    """
    if isinstance(f, QSeries):
        return f if M is None else f.truncate(M)
    f = ParamScalar.coerce(f)
    prec = INF if M is None else M + 1
    num, den = split_powers(f, "Q")
    if not num:
        return QSeries.zero(prec)
    sym = bool((f.variables() - {"Q"}))
    vd = min(den)
    vn = min(num)
    if vn < vd and not allow_laurent:
        raise QAdicError(f"pole at Q=0 of order {vd - vn}")

    def build(parts, lo):
        hi = max(parts)
        if sym:
            return QSeries(lo, [parts.get(k, ParamScalar.coerce(0)) for k in range(lo, hi + 1)], INF, True)
        return QSeries(lo, [parts.get(k, ParamScalar.coerce(0)).to_fraction() for k in range(lo, hi + 1)], INF, False)

    n_ser = build(num, vn)
    d_ser = build(den, vd)
    if d_ser.length() == 1:
        out = n_ser * d_ser.inverse()
        return out if M is None else out.with_prec(prec)
    if M is None:
        raise QAdicError("non-polynomial in Q: an explicit order M is required")
    return n_ser.with_prec(prec) * d_ser.inverse_to(prec - vn + vd)


def qseries_pochhammer_inf(a: QSeries, base: QSeries, prec: int) -> QSeries:
    """(a; base)_inf modulo Q**prec; base must have positive valuation."""
    vb = base.valuation()
    if vb <= 0:
        raise QAdicError("infinite product needs a base of positive valuation")
    out = QSeries.const(1)
    x = a
    while x.valuation() < prec:
        out = (out * (1 - x)).with_prec(prec)
        x = (x * base).with_prec(prec)
    return out.with_prec(prec)
