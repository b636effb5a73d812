"""Truncated series in the ratio variables x_k = zeta_{k+1}/zeta_k.

A RatioSeries with n zeta variables has n-1 ratio variables.  Terms are
kept sparse, keyed by exponent tuples, and truncated at a total-degree cap.
A per-variable negative window gives the Laurent extension.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable

from .rings import coeff_equal, coeff_is_zero


class SeriesError(ValueError):
    pass


class WindowError(SeriesError):
    pass


def grlex_key(e: tuple[int, ...]):
    """Graded lex: total degree first, then larger x_1 exponent first."""
    return (sum(e), tuple(-x for x in e))


def monomials(nvars: int, cap: int, window: tuple[int, ...] | None = None) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree <= cap respecting the window, in grlex order."""
    if nvars == 0:
        return [()]
    window = window or (0,) * nvars
    out = []
    lo_total = sum(window)

    def rec(prefix, k, remaining):
        if k == nvars - 1:
            for e in range(window[k], remaining + 1):
                out.append(prefix + (e,))
            return
        rest_min = sum(window[k + 1:])
        for e in range(window[k], remaining - rest_min + 1):
            rec(prefix + (e,), k + 1, remaining - e)

    if cap >= lo_total:
        rec((), 0, cap)
    out.sort(key=grlex_key)
    return out


def ratio_exponent(n: int, i: int, j: int) -> tuple[int, ...]:
    """Exponent vector of zeta_j/zeta_i (1-based, i < j) in the ratio variables."""
    if not 1 <= i < j <= n:
        raise SeriesError(f"zeta_{j}/zeta_{i} is not a ratio monomial for n={n}")
    return tuple(1 if i <= k + 1 < j else 0 for k in range(n - 1))


def zeta_to_ratio(n: int, zeta_exps: Iterable[int]) -> tuple[int, ...]:
    """Convert a degree-0 zeta monomial prod zeta_i^{e_i} to ratio exponents."""
    e = list(zeta_exps)
    if len(e) != n:
        raise SeriesError("wrong zeta exponent length")
    if sum(e) != 0:
        raise SeriesError("not translation invariant: zeta degree is nonzero")
    # zeta_i carries j_{i-1} - j_i, so j_k = -(e_1 + ... + e_k)
    out = []
    acc = 0
    for k in range(n - 1):
        acc -= e[k]
        out.append(acc)
    return tuple(out)


def ratio_to_zeta(x_exps: tuple[int, ...]) -> tuple[int, ...]:
    """Zeta exponents of a ratio monomial: zeta_i gets j_{i-1} - j_i."""
    j = (0,) + tuple(x_exps) + (0,)
    return tuple(j[i - 1] - j[i] for i in range(1, len(j)))


class RatioSeries:
    """Element of F[[x_1..x_{n-1}]] (or its windowed Laurent extension) mod degree > cap."""

    __slots__ = ("n", "cap", "window", "terms")

    def __init__(self, n: int, cap: int, terms: dict | None = None, window: tuple[int, ...] | None = None,
                 _clean: bool = False):
        if n < 1:
            raise SeriesError("n must be >= 1")
        self.n = n
        self.cap = cap
        self.window = tuple(window) if window is not None else (0,) * (n - 1)
        if len(self.window) != n - 1:
            raise SeriesError("window length must be n-1")
        if _clean:
            self.terms = terms or {}
            return
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != n - 1:
                raise SeriesError(f"exponent {e} has wrong length for n={n}")
            if sum(e) > cap or coeff_is_zero(c):
                continue
            if any(a < w for a, w in zip(e, self.window)):
                raise WindowError(f"exponent {e} below window {self.window}")
            clean[e] = c
        self.terms = clean

    # -- constructors ----------------------------------------------------------------
    @classmethod
    def constant(cls, n: int, cap: int, c, window=None) -> "RatioSeries":
        return cls(n, cap, {(0,) * (n - 1): c}, window)

    @classmethod
    def monomial(cls, n: int, cap: int, e, c=1, window=None) -> "RatioSeries":
        return cls(n, cap, {tuple(e): c}, window)

    @property
    def nvars(self) -> int:
        return self.n - 1

    # -- basic access ----------------------------------------------------------------
    def __getitem__(self, e):
        return self.terms.get(tuple(e), 0)

    def coefficient(self, e, zero=0):
        return self.terms.get(tuple(e), zero)

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.terms, key=grlex_key)

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int | None:
        return min((sum(e) for e in self.terms), default=None)

    def _check(self, other: "RatioSeries"):
        if not isinstance(other, RatioSeries):
            raise TypeError("expected a RatioSeries")
        if other.n != self.n:
            raise SeriesError(f"shape mismatch: n={self.n} vs n={other.n}")

    # -- ring operations --------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, RatioSeries):
            return self + RatioSeries.constant(self.n, self.cap, other, self.window)
        self._check(other)
        cap = min(self.cap, other.cap)
        window = tuple(min(a, b) for a, b in zip(self.window, other.window))
        out = {e: c for e, c in self.terms.items() if sum(e) <= cap}
        for e, c in other.terms.items():
            if sum(e) > cap:
                continue
            if e in out:
                s = out[e] + c
                if coeff_is_zero(s):
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return RatioSeries(self.n, cap, out, window, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return RatioSeries(self.n, self.cap, {e: -c for e, c in self.terms.items()}, self.window, _clean=True)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "RatioSeries":
        out = {}
        for e, a in self.terms.items():
            p = a * c
            if not coeff_is_zero(p):
                out[e] = p
        return RatioSeries(self.n, self.cap, out, self.window, _clean=True)

    def __mul__(self, other):
        if not isinstance(other, RatioSeries):
            return self.scale(other)
        self._check(other)
        cap = min(self.cap, other.cap)
        window = tuple(a + b for a, b in zip(self.window, other.window))
        out: dict = {}
        b_items = list(other.terms.items())
        for ea, ca in self.terms.items():
            da = sum(ea)
            for eb, cb in b_items:
                if da + sum(eb) > cap:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                p = ca * cb
                if e in out:
                    out[e] = out[e] + p
                else:
                    out[e] = p
        out = {e: c for e, c in out.items() if not coeff_is_zero(c)}
        return RatioSeries(self.n, cap, out, window, _clean=True)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise SeriesError("negative power of a series")
        out = RatioSeries.constant(self.n, self.cap, 1, self.window)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, RatioSeries):
            return NotImplemented
        return self.first_mismatch(other) is None

    __hash__ = None

    def first_mismatch(self, other: "RatioSeries", cap: int | None = None):
        """First (grlex) exponent where the two series differ up to the common cap."""
        self._check(other)
        cap = min(self.cap, other.cap) if cap is None else cap
        keys = set(e for e in self.terms if sum(e) <= cap) | set(e for e in other.terms if sum(e) <= cap)
        for e in sorted(keys, key=grlex_key):
            a = self.terms.get(e, 0)
            b = other.terms.get(e, 0)
            if not coeff_equal(a, b):
                return e
        return None

    # -- structural operations -------------------------------------------------------------
    def truncate(self, cap: int) -> "RatioSeries":
        cap = min(cap, self.cap)
        return RatioSeries(self.n, cap, {e: c for e, c in self.terms.items() if sum(e) <= cap}, self.window,
                           _clean=True)

    def restrict(self, pred: Callable[[tuple], bool]) -> "RatioSeries":
        return RatioSeries(self.n, self.cap, {e: c for e, c in self.terms.items() if pred(e)}, self.window,
                           _clean=True)

    def map_coeffs(self, fn: Callable) -> "RatioSeries":
        out = {}
        for e, c in self.terms.items():
            v = fn(c)
            if not coeff_is_zero(v):
                out[e] = v
        return RatioSeries(self.n, self.cap, out, self.window, _clean=True)

    def map_terms(self, fn: Callable) -> "RatioSeries":
        """fn(exponent, coeff) -> coeff."""
        out = {}
        for e, c in self.terms.items():
            v = fn(e, c)
            if not coeff_is_zero(v):
                out[e] = v
        return RatioSeries(self.n, self.cap, out, self.window, _clean=True)

    def with_window(self, window) -> "RatioSeries":
        return RatioSeries(self.n, self.cap, dict(self.terms), tuple(window))

    def laurent_shift(self, k: int, m: int) -> "RatioSeries":
        """Multiply by x_k**m (k is 0-based), keeping the window fixed."""
        out = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[k] += m
            e2 = tuple(e2)
            if e2[k] < self.window[k]:
                raise WindowError(f"shift of {e} by x_{k + 1}^{m} leaves window {self.window}")
            if sum(e2) <= self.cap:
                out[e2] = c
        return RatioSeries(self.n, self.cap, out, self.window, _clean=True)

    def __repr__(self):
        parts = []
        for e, c in self.items_sorted()[:12]:
            parts.append(f"{e}:{c}")
        more = "" if len(self.terms) <= 12 else f" ... (+{len(self.terms) - 12})"
        return f"RatioSeries(n={self.n}, cap={self.cap}, {{{', '.join(parts)}{more}}})"


# -- expansion primitives ---------------------------------------------------------------
def geometric_terms(n: int, cap: int, e: tuple[int, ...], coeff_fn: Callable[[int], object],
                    window=None) -> RatioSeries:
    """Sum_k coeff_fn(k) * x^(k e) truncated at cap; e must have positive degree."""
    d = sum(e)
    if d <= 0:
        raise SeriesError("geometric expansion needs a monomial of positive degree")
    terms = {}
    k = 0
    while k * d <= cap:
        c = coeff_fn(k)
        terms[tuple(k * x for x in e)] = c
        k += 1
    return RatioSeries(n, cap, terms, window)


def expand_qbinomial(a, b, z: tuple[tuple[int, ...], object], n: int, cap: int, ring) -> RatioSeries:
    """(a z; q)_inf / (b z; q)_inf = sum_k prod_{j<k} (b - a q^j)/(1 - q^{j+1}) * (c x^e)^k.

    ``z`` is (exponent vector, scalar c).  b = 0 gives the pure numerator
    product.  All arithmetic happens in ``ring``.
    """
    e, c = z
    q = ring.q
    coeffs = [ring.one]

    def coeff(k):
        while len(coeffs) <= k:
            j = len(coeffs) - 1
            nxt = coeffs[-1] * (b - a * q**j) * c
            nxt = ring.div(nxt, ring.one - q ** (j + 1))
            coeffs.append(nxt)
        return coeffs[k]

    return geometric_terms(n, cap, tuple(e), coeff)


def expand_ratio_factor(n: int, cap: int, i: int, j: int, coeff_fn: Callable[[int], object]) -> RatioSeries:
    """Sum_k coeff_fn(k) (zeta_j/zeta_i)^k."""
    return geometric_terms(n, cap, ratio_exponent(n, i, j), coeff_fn)


def zeta_substitute(n: int, cap: int, factors: Iterable[tuple[int, int, Callable[[int], object]]],
                    one=1) -> RatioSeries:
    """Product over (i, j, coeff_fn) of sum_k coeff_fn(k) (zeta_j/zeta_i)^k."""
    out = RatioSeries.constant(n, cap, one)
    for i, j, fn in factors:
        out = out * expand_ratio_factor(n, cap, i, j, fn)
    return out


def pairs(n: int):
    return list(itertools.combinations(range(1, n + 1), 2))
