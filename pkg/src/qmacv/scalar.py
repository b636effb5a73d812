"""Exact rational functions over Q in the formal parameters.

Every scalar is a normalized fraction of two ``fmpq_mpoly`` polynomials in a
single fixed context.  The substitutions ``q = Q**2`` and ``t = T**2`` are
definitional, so half-integer powers of q and t stay polynomial.
"""

from __future__ import annotations

import random
import re
from fractions import Fraction
from functools import reduce

import flint
import gmpy2

MAX_S = 6
MAX_Z = 6

# flint's deglex puts the first generator highest; the canonical order is
# graded lex with Q < T < S1 < ... < Sn < A (auxiliaries above A).
VAR_NAMES = (
    tuple(f"Z{i}" for i in range(MAX_Z, 0, -1))
    + ("A",)
    + tuple(f"S{i}" for i in range(MAX_S, 0, -1))
    + ("E", "U", "T", "Q")
)
CTX = flint.fmpq_mpoly_ctx.get(VAR_NAMES, "deglex")
_INDEX = {name: i for i, name in enumerate(VAR_NAMES)}
_GENS = dict(zip(VAR_NAMES, CTX.gens()))
_ZERO = CTX.from_dict({})
_ONE = CTX.constant(1)


class ScalarError(ArithmeticError):
    pass


class PoleError(ScalarError):
    """A denominator vanished (division by zero, pole at a point, q-Pochhammer pole)."""


def _const(x):
    if isinstance(x, int):
        return CTX.constant(x)
    if isinstance(x, Fraction):
        return CTX.constant(flint.fmpq(x.numerator, x.denominator))
    if type(x).__name__ == "mpq":
        return CTX.constant(flint.fmpq(int(x.numerator), int(x.denominator)))
    if isinstance(x, flint.fmpq):
        return CTX.constant(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to a scalar")


def _fmpq_to_mpq(c):
    return gmpy2.mpq(int(c.p), int(c.q))


class ParamScalar:
    """Normalized element of Q(Q, T, U, E, S1..S6, A, Z1..Z6).

    Invariants: the denominator is nonzero and monic under the fixed
    monomial order, and gcd(num, den) = 1.
    """

    __slots__ = ("num", "den", "_key")

    def __init__(self, num, den=None, _normalized=False):
        if not isinstance(num, flint.fmpq_mpoly):
            num = _const(num)
        if den is None:
            den = _ONE
            _normalized = True
        elif not isinstance(den, flint.fmpq_mpoly):
            den = _const(den)
        self._key = None
        if _normalized:
            self.num, self.den = num, den
            return
        if den.is_zero():
            raise PoleError("division by zero")
        if num.is_zero():
            self.num, self.den = _ZERO, _ONE
            return
        if not den.is_constant():
            g = num.gcd(den)
            if not g.is_one():
                num = num / g
                den = den / g
        lc = den.leading_coefficient()
        if lc != 1:
            num = num / lc
            den = den / lc
        self.num, self.den = num, den

    # -- construction helpers -------------------------------------------------
    @classmethod
    def coerce(cls, x) -> "ParamScalar":
        if isinstance(x, ParamScalar):
            return x
        return cls(_const(x), _ONE, True)

    @classmethod
    def var(cls, name: str) -> "ParamScalar":
        return cls(_GENS[name], _ONE, True)

    # -- arithmetic ---------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, ParamScalar):
            try:
                other = ParamScalar.coerce(other)
            except TypeError:
                return NotImplemented
        if self.den.is_one() and other.den.is_one():
            return ParamScalar(self.num + other.num, _ONE, True)
        if self.den == other.den:
            return ParamScalar(self.num + other.num, self.den)
        return ParamScalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return ParamScalar(-self.num, self.den, True)

    def __sub__(self, other):
        if not isinstance(other, ParamScalar):
            try:
                other = ParamScalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, ParamScalar):
            try:
                other = ParamScalar.coerce(other)
            except TypeError:
                return NotImplemented
        if self.den.is_one() and other.den.is_one():
            return ParamScalar(self.num * other.num, _ONE, True)
        # cross-cancel before multiplying keeps the operands small
        g1 = self.num.gcd(other.den) if not other.den.is_one() else _ONE
        g2 = other.num.gcd(self.den) if not self.den.is_one() else _ONE
        n1 = self.num / g1 if not g1.is_one() else self.num
        d2 = other.den / g1 if not g1.is_one() else other.den
        n2 = other.num / g2 if not g2.is_one() else other.num
        d1 = self.den / g2 if not g2.is_one() else self.den
        return ParamScalar(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def inverse(self):
        if self.num.is_zero():
            raise PoleError("division by zero")
        return ParamScalar(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, ParamScalar):
            try:
                other = ParamScalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ParamScalar.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k >= 0:
            return ParamScalar(self.num**k, self.den**k, True)
        return self.inverse() ** (-k)

    # -- comparison ---------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        if not isinstance(other, ParamScalar):
            try:
                other = ParamScalar.coerce(other)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash(self.key())

    def key(self) -> str:
        if self._key is None:
            self._key = self.to_text()
        return self._key

    # -- structure ------------------------------------------------------------------
    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        c = self.num.coefficient(0) if not self.num.is_zero() else flint.fmpq(0)
        return Fraction(int(c.p), int(c.q))

    def to_mpq(self):
        f = self.to_fraction()
        return gmpy2.mpq(f.numerator, f.denominator)

    def variables(self) -> set[str]:
        used = set()
        for poly in (self.num, self.den):
            for i, d in enumerate(poly.degrees()):
                if d > 0:
                    used.add(VAR_NAMES[i])
        return used

    def degree_in(self, name: str) -> tuple[int, int]:
        i = _INDEX[name]
        return self.num.degrees()[i], self.den.degrees()[i]

    # -- substitution / evaluation -------------------------------------------------
    def subs(self, mapping: dict) -> "ParamScalar":
        """Substitute variables by scalars (ParamScalar or rationals)."""
        if not mapping:
            return self
        vals = {k: ParamScalar.coerce(v) for k, v in mapping.items()}
        return _poly_subs(self.num, vals) / _poly_subs(self.den, vals)

    def eval(self, point: dict):
        """Exact rational value; every variable present must be assigned."""
        missing = self.variables() - set(point)
        if missing:
            raise ValueError(f"unassigned variables {sorted(missing)}")
        args = [flint.fmpq(0)] * len(VAR_NAMES)
        for name, v in point.items():
            f = Fraction(v) if not type(v).__name__ == "mpq" else Fraction(int(v.numerator), int(v.denominator))
            args[_INDEX[name]] = flint.fmpq(f.numerator, f.denominator)
        d = self.den(*args)
        if d == 0:
            raise PoleError(f"denominator vanishes at {point}")
        r = self.num(*args) / d
        return Fraction(int(r.p), int(r.q))

    # -- text ---------------------------------------------------------------------------
    def to_text(self) -> str:
        return f"{_poly_text(self.num)}/{_poly_text(self.den)}"

    @classmethod
    def from_text(cls, text: str) -> "ParamScalar":
        text = text.strip()
        depth = 0
        split = None
        for i, ch in enumerate(text):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "/" and depth == 0:
                split = i
        if split is None:
            return cls(parse_poly(text))
        return cls(parse_poly(text[:split]), parse_poly(text[split + 1:]))

    def __repr__(self):
        if self.den.is_one():
            return _poly_text(self.num)
        return self.to_text()

    __str__ = __repr__


def _poly_text(p) -> str:
    if p.is_zero():
        return "(0)"
    return f"({p.str()})"


_TERM_RE = re.compile(r"\s*([+-])?\s*([^+-]+)")


def parse_poly(text: str):
    """Parse flint's ``str`` output (optionally parenthesized) back to a polynomial."""
    s = text.strip()
    while s.startswith("(") and s.endswith(")"):
        s = s[1:-1].strip()
    if s in ("", "0"):
        return _ZERO
    out = _ZERO
    # split on top-level + and -, tolerating a leading sign
    tokens = re.findall(r"[+-]?\s*[^+-]+", s.replace("- ", "-").replace("+ ", "+"))
    for tok in tokens:
        tok = tok.replace(" ", "")
        sign = -1 if tok.startswith("-") else 1
        tok = tok.lstrip("+-")
        coeff = flint.fmpq(sign)
        mono = _ONE
        for factor in tok.split("*"):
            if not factor:
                continue
            if factor[0].isdigit():
                if "/" in factor:
                    a, b = factor.split("/")
                    coeff *= flint.fmpq(int(a), int(b))
                else:
                    coeff *= int(factor)
            else:
                name, _, e = factor.partition("^")
                mono = mono * _GENS[name] ** (int(e) if e else 1)
        out = out + mono * coeff
    return out


def _poly_subs(p, vals: dict) -> ParamScalar:
    """Evaluate polynomial p with some generators replaced by ParamScalars."""
    idx = sorted(_INDEX[k] for k in vals)
    if not idx:
        return ParamScalar(p, _ONE, True)
    # group terms by the exponents of the substituted variables
    groups: dict[tuple, dict] = {}
    for exps, c in p.to_dict().items():
        exps = tuple(int(e) for e in exps)
        key = tuple(exps[i] for i in idx)
        rest = list(exps)
        for i in idx:
            rest[i] = 0
        groups.setdefault(key, {})[tuple(rest)] = c
    names = [VAR_NAMES[i] for i in idx]
    powers: dict[tuple[str, int], ParamScalar] = {}

    def power(name, e):
        k = (name, e)
        if k not in powers:
            powers[k] = vals[name] ** e
        return powers[k]

    total = ParamScalar(_ZERO, _ONE, True)
    for key, d in groups.items():
        term = ParamScalar(CTX.from_dict(d), _ONE, True)
        for name, e in zip(names, key):
            if e:
                term = term * power(name, e)
        total = total + term
    return total


# -- public symbols ------------------------------------------------------------
def var(name: str) -> ParamScalar:
    return ParamScalar.var(name)


Q = var("Q")
T = var("T")
U = var("U")
E = var("E")
A = var("A")
ONE = ParamScalar.coerce(1)
ZERO = ParamScalar.coerce(0)
q = Q**2
t = T**2


def S(i: int) -> ParamScalar:
    if not 1 <= i <= MAX_S:
        raise ValueError(f"S index {i} out of range 1..{MAX_S}")
    return var(f"S{i}")


def Z(i: int) -> ParamScalar:
    if not 1 <= i <= MAX_Z:
        raise ValueError(f"Z index {i} out of range 1..{MAX_Z}")
    return var(f"Z{i}")


def normalize(num, den=1) -> ParamScalar:
    """Canonical form of num/den; raises PoleError on a zero denominator."""
    return ParamScalar.coerce(num) / ParamScalar.coerce(den) if not isinstance(den, int) or den != 1 else ParamScalar.coerce(num)


def coerce(x):
    return ParamScalar.coerce(x)


def qpow(k) -> ParamScalar:
    """q**k for integer or half-integer k (as Q**(2k))."""
    e = Fraction(k) * 2
    if e.denominator != 1:
        raise ValueError("q exponent must be a multiple of 1/2")
    return Q ** int(e)


def qpoch(a, k: int, base=None):
    """q-shifted factorial (a; base)_k, base defaulting to q.

    Negative k follows (a;q)_{-m} = 1/(a q^{-m}; q)_m.  Works for any ring
    element type supporting * and - (ParamScalar, rationals, QSeries).
    """
    if base is None:
        base = q
    one = 1
    if k >= 0:
        out = None
        x = a
        for _ in range(k):
            f = one - x
            out = f if out is None else out * f
            x = x * base
        if out is None:
            return ONE if isinstance(a, ParamScalar) else _unit_like(a)
        return out
    m = -k
    shifted = a * base ** (-m) if isinstance(base, ParamScalar) else a / base**m
    denom = qpoch(shifted, m, base)
    if _is_zero(denom):
        x = shifted
        for j in range(m):
            if _is_zero(one - x):
                raise PoleError(f"q-Pochhammer pole: factor (1 - a q^{j - m}) vanishes")
            x = x * base
        raise PoleError("q-Pochhammer pole")
    return 1 / denom


def qpoch_multi(params, k: int, base=None):
    return reduce(lambda x, y: x * y, (qpoch(a, k, base) for a in params), ONE)


def _is_zero(x) -> bool:
    if isinstance(x, ParamScalar):
        return x.is_zero()
    return x == 0


def _unit_like(a):
    try:
        return a * 0 + 1
    except TypeError:
        return 1


def qint(n: int, x) -> ParamScalar:
    """[n]_x = (1 - x^n)/(1 - x)."""
    x = ParamScalar.coerce(x)
    out = ZERO
    for k in range(n):
        out = out + x**k
    return out


def qfactorial(n: int, x) -> ParamScalar:
    out = ONE
    for k in range(1, n + 1):
        out = out * qint(k, x)
    return out


def qbinom(n: int, k: int, x) -> ParamScalar:
    if k < 0 or k > n:
        return ZERO
    return qfactorial(n, x) / (qfactorial(k, x) * qfactorial(n - k, x))


# -- epsilon expansion ---------------------------------------------------------
def eps_expand(f: ParamScalar, pivot: str, order: int) -> dict[int, ParamScalar]:
    """Laurent expansion of f at pivot = 1 in eps = 1 - pivot, through eps**order.

    Returns {exponent: coefficient}; the lowest exponent is minus the pole
    order.  Coefficients are free of the pivot variable.
    """
    f = ParamScalar.coerce(f)
    g = f.subs({pivot: ONE - E}) if pivot != "E" else f
    num, den = _split_univariate(g.num, "E"), _split_univariate(g.den, "E")
    if not den:
        raise ScalarError("expansion failure: zero denominator")
    v_den = min(den)
    v_num = min(num) if num else None
    if v_num is None:
        return {}
    shift = v_num - v_den
    # power-series division of (num / eps^v_num) by (den / eps^v_den)
    d0 = den[v_den]
    if d0.is_zero():
        raise ScalarError("expansion failure")
    n_terms = order - shift + 1
    if n_terms <= 0:
        return {}
    coeffs = []
    inv_d0 = d0.inverse()
    for k in range(n_terms):
        acc = num.get(v_num + k, ZERO)
        for j in range(1, k + 1):
            dj = den.get(v_den + j)
            if dj is not None:
                acc = acc - dj * coeffs[k - j]
        coeffs.append(acc * inv_d0)
    return {shift + k: c for k, c in enumerate(coeffs) if not c.is_zero()}


def _split_univariate(p, name: str) -> dict[int, ParamScalar]:
    i = _INDEX[name]
    parts: dict[int, dict] = {}
    for exps, c in p.to_dict().items():
        exps = tuple(int(x) for x in exps)
        e = exps[i]
        rest = list(exps)
        rest[i] = 0
        parts.setdefault(e, {})[tuple(rest)] = c
    return {e: ParamScalar(CTX.from_dict(d), _ONE, True) for e, d in parts.items()}


def split_powers(f: ParamScalar, name: str) -> tuple[dict[int, ParamScalar], dict[int, ParamScalar]]:
    """Numerator and denominator of f as polynomials in one variable."""
    return _split_univariate(f.num, name), _split_univariate(f.den, name)


# -- evaluation / sampling -----------------------------------------------------
def eval_rational(f, point: dict) -> Fraction:
    return ParamScalar.coerce(f).eval(point)


def random_rational(rng: random.Random, lo: int = 2, hi: int = 97) -> Fraction:
    """A random nonzero rational away from 0 and +-1."""
    while True:
        num = rng.randint(lo, hi) * rng.choice((1, -1))
        den = rng.randint(lo, hi)
        f = Fraction(num, den)
        if abs(f) not in (0, 1):
            return f


def random_point(rng: random.Random, names) -> dict:
    return {name: random_rational(rng) for name in names}


def as_mpq(x):
    if type(x).__name__ == "mpq":
        return x
    if isinstance(x, ParamScalar):
        return x.to_mpq()
    f = Fraction(x)
    return gmpy2.mpq(f.numerator, f.denominator)
