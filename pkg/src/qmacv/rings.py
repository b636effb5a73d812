"""Coefficient rings shared by the series, operator and eigen code.

The same algorithms run in three modes:

* ``symbolic``: ParamScalar, optionally with some parameters fixed to rationals;
* ``sampled``: every parameter (Q included) fixed, coefficients are ``gmpy2.mpq``;
* ``q-adic``: QSeries in Q, every other parameter fixed to a rational (or a
  Laurent monomial in Q for alpha).
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2

from .qadic import INF, InsufficientOrder, QSeries, qadic_truncate
from .scalar import ParamScalar, PoleError, var


def _mpq(x):
    if type(x).__name__ == "mpq":
        return x
    if isinstance(x, ParamScalar):
        return x.to_mpq()
    f = Fraction(x)
    return gmpy2.mpq(f.numerator, f.denominator)


class Ring:
    mode = "abstract"

    def coerce(self, x):
        raise NotImplementedError

    def var(self, name: str):
        return self.coerce(var(name))

    @property
    def q(self):
        return self.var("Q") ** 2

    @property
    def t(self):
        return self.var("T") ** 2

    def s(self, i: int):
        return self.var(f"S{i}")

    @property
    def one(self):
        return self.coerce(1)

    @property
    def zero(self):
        return self.coerce(0)

    def is_zero(self, x) -> bool:
        return x == 0

    def inv(self, x):
        if self.is_zero(x):
            raise PoleError("division by zero in coefficient ring")
        return 1 / x

    def div(self, a, b):
        return a * self.inv(b)

    def describe(self) -> dict:
        return {"mode": self.mode}


class SymbolicRing(Ring):
    """ParamScalar arithmetic with an optional partial specialization."""

    mode = "symbolic"

    def __init__(self, point: dict | None = None):
        self.point = {k: ParamScalar.coerce(v) for k, v in (point or {}).items()}
        self._cache: dict[str, ParamScalar] = {}

    def coerce(self, x):
        if isinstance(x, ParamScalar):
            return x.subs(self.point) if self.point and x.variables() & set(self.point) else x
        return ParamScalar.coerce(x)

    def var(self, name: str):
        if name not in self._cache:
            self._cache[name] = self.coerce(var(name))
        return self._cache[name]

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def inv(self, x):
        return x.inverse()

    def describe(self) -> dict:
        return {"mode": self.mode, "point": {k: str(v) for k, v in sorted(self.point.items())}}


class SampledRing(Ring):
    """Exact rationals at a fixed point (all parameters assigned)."""

    mode = "sampled"

    def __init__(self, point: dict):
        self.point = {k: _mpq(v) for k, v in point.items()}

    def coerce(self, x):
        if isinstance(x, ParamScalar):
            return _mpq(x.eval(self.point))
        return _mpq(x)

    def var(self, name: str):
        return self.point[name]

    def describe(self) -> dict:
        return {"mode": self.mode, "point": {k: str(v) for k, v in sorted(self.point.items())}}


class QAdicRing(Ring):
    """QSeries modulo Q**prec; every other parameter is a rational (alpha may carry Q powers)."""

    mode = "q-adic"

    def __init__(self, point: dict, prec: int):
        self.prec = prec
        self.point = {}
        for k, v in point.items():
            self.point[k] = ParamScalar.coerce(v) if not isinstance(v, ParamScalar) else v
        self._cache: dict[str, QSeries] = {}

    def coerce(self, x):
        if isinstance(x, QSeries):
            return x
        if isinstance(x, ParamScalar):
            if self.point and x.variables() & set(self.point):
                x = x.subs(self.point)
            try:
                return qadic_truncate(x, None, allow_laurent=True)
            except Exception:
                return qadic_truncate(x, self.prec - 1, allow_laurent=True)
        return QSeries.const(x)

    def var(self, name: str):
        if name not in self._cache:
            self._cache[name] = self.coerce(var(name))
        return self._cache[name]

    def is_zero(self, x) -> bool:
        return x.is_zero()

    def inv(self, x):
        if x.is_zero():
            raise PoleError("division by a q-adically vanishing series")
        if x.is_exact():
            if x.length() == 1:
                return x.inverse()
            return x.inverse_to(self.prec)
        return x.inverse()

    def div(self, a, b):
        return self.trunc(a * self.inv(b))

    def trunc(self, x):
        return x.with_prec(self.prec) if isinstance(x, QSeries) and x.prec > self.prec else x

    def describe(self) -> dict:
        return {"mode": self.mode, "prec": self.prec,
                "point": {k: str(v) for k, v in sorted(self.point.items())}}


class ShiftedRing(Ring):
    """A view of ``base`` whose s_i are replaced by given ring elements."""

    def __init__(self, base: Ring, s_values: dict):
        self.base = base
        self.s_values = dict(s_values)
        self.mode = base.mode

    def coerce(self, x):
        return self.base.coerce(x)

    def var(self, name: str):
        if name.startswith("S") and int(name[1:]) in self.s_values:
            return self.s_values[int(name[1:])]
        return self.base.var(name)

    def s(self, i: int):
        return self.s_values[i] if i in self.s_values else self.base.s(i)

    def is_zero(self, x) -> bool:
        return self.base.is_zero(x)

    def inv(self, x):
        return self.base.inv(x)

    def div(self, a, b):
        return self.base.div(a, b)

    def describe(self) -> dict:
        d = self.base.describe()
        d["s"] = {str(k): str(v) for k, v in sorted(self.s_values.items())}
        return d


def with_s(ring: Ring, values: dict) -> Ring:
    """Ring whose s_i are the given values (other s_i unchanged)."""
    return ShiftedRing(ring, {i: ring.coerce(v) if not _is_elem(v) else v for i, v in values.items()})


def _is_elem(v) -> bool:
    return isinstance(v, (ParamScalar, QSeries)) or type(v).__name__ == "mpq"


def coeff_is_zero(c) -> bool:
    if isinstance(c, (ParamScalar, QSeries)):
        return c.is_zero()
    return c == 0


def coeff_equal(a, b) -> bool:
    if isinstance(a, QSeries) or isinstance(b, QSeries):
        return (a - b).is_zero() if isinstance(a, QSeries) else (b - a).is_zero()
    return coeff_is_zero(a - b)


__all__ = [
    "Ring", "SymbolicRing", "ShiftedRing", "with_s", "SampledRing", "QAdicRing", "coeff_is_zero", "coeff_equal",
    "INF", "InsufficientOrder",
]
