"""Basic hypergeometric series and a verification suite for the summation
and transformation formulas used elsewhere in the package.

The product sides of identities are expanded by ``qproduct_coeffs``, which
solves the functional equation P(z) D(z) = N(z) P(pz) term by term and so
never reuses the series being tested.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

from .report import FAIL, PASS, CheckReport, PreconditionError, compare_series, timed
from .rings import Ring, SymbolicRing, coeff_equal, coeff_is_zero
from .scalar import PoleError, random_rational
from .series import RatioSeries, geometric_terms


@dataclass(frozen=True)
class PhiSpec:
    num: tuple
    den: tuple
    arg: object = 1
    base: object = None

    @property
    def r(self) -> int:
        return len(self.num) - 1

    @property
    def s(self) -> int:
        return len(self.den)


def phi_terms(num, den, K: int, ring: Ring, base=None, arg=None) -> list:
    """Coefficients c_0..c_K of r+1 phi s in its argument (times arg^k if given).

    Includes the GR balancing factor [(-1)^k p^{k(k-1)/2}]^{1+s-r}.  Stops
    early (zeros) once a numerator parameter terminates the series; raises
    PoleError if a denominator factor vanishes first.
    """
    p = ring.q if base is None else base
    one = ring.one
    extra = 1 + len(den) - len(num)
    out = [one]
    cur = one
    pk = one  # p^k
    for k in range(1, K + 1):
        j = k - 1
        pj = pk
        numf = one
        for a in num:
            numf = numf * (one - a * pj)
        if coeff_is_zero(numf):
            out.extend([ring.zero] * (K - len(out) + 1))
            return out
        denf = one - p * pj
        for b in den:
            denf = denf * (one - b * pj)
        if coeff_is_zero(denf):
            raise PoleError(f"denominator parameter pole at k={k}")
        cur = ring.div(cur * numf, denf)
        if arg is not None:
            cur = cur * arg
        if extra:
            cur = cur * ((-pj) ** extra) if extra > 0 else ring.div(cur, (-pj) ** (-extra))
        out.append(cur)
        pk = pj * p
    return out


def phi_series(spec: PhiSpec, exponent: tuple[int, ...], n: int, cap: int, ring: Ring) -> RatioSeries:
    """spec evaluated at arg * x^exponent, as a RatioSeries truncated at cap."""
    d = sum(exponent)
    K = cap // d if d > 0 else 0
    terms = phi_terms(spec.num, spec.den, K, ring, spec.base, spec.arg)
    return geometric_terms(n, cap, exponent, lambda k: terms[k])


def phi_value(num, den, arg, ring: Ring, base=None, K: int | None = None):
    """Sum of a terminating series (or its first K+1 terms)."""
    if K is None:
        K = _termination_index(num, ring, base)
        if K is None:
            raise PreconditionError("series does not terminate; give an explicit K")
    terms = phi_terms(num, den, K, ring, base, arg)
    total = ring.zero
    for c in terms:
        total = total + c
    return total


def _termination_index(num, ring: Ring, base=None, limit: int = 200):
    p = ring.q if base is None else base
    one = ring.one
    pk = one
    for k in range(limit):
        for a in num:
            if coeff_is_zero(one - a * pk):
                return k + 1
        pk = pk * p
    return None


def qproduct_coeffs(num, den, K: int, ring: Ring, base=None) -> list:
    """Coefficients of prod (a z;p)_inf / prod (b z;p)_inf through z^K.

    With P(z) D(z) = N(z) P(pz), N = prod(1 - a z), D = prod(1 - b z):
    P_m (1 - p^m) = sum_{k>=1} (N_k p^{m-k} - D_k) P_{m-k}.
    """
    p = ring.q if base is None else base
    one = ring.one
    N = _poly_from_roots(num, ring)
    D = _poly_from_roots(den, ring)
    P = [one]
    for m in range(1, K + 1):
        acc = ring.zero
        for k in range(1, m + 1):
            nk = N[k] if k < len(N) else None
            dk = D[k] if k < len(D) else None
            if nk is None and dk is None:
                continue
            term = ring.zero
            if nk is not None:
                term = term + nk * p ** (m - k)
            if dk is not None:
                term = term - dk
            acc = acc + term * P[m - k]
        P.append(ring.div(acc, one - p**m))
    return P


def _poly_from_roots(params, ring: Ring) -> list:
    """Coefficients of prod (1 - a z)."""
    poly = [ring.one]
    for a in params:
        new = poly + [ring.zero]
        for k in range(len(poly)):
            new[k + 1] = new[k + 1] - a * poly[k]
        poly = new
    return poly


def qproduct_series(num, den, exponent: tuple[int, ...], coeff, n: int, cap: int, ring: Ring,
                    base=None) -> RatioSeries:
    """prod (a c x^e;p)_inf / prod (b c x^e;p)_inf as a RatioSeries."""
    d = sum(exponent)
    K = cap // d
    cs = qproduct_coeffs([a * coeff for a in num], [b * coeff for b in den], K, ring, base)
    return geometric_terms(n, cap, exponent, lambda k: cs[k])


# -- identity suite -----------------------------------------------------------------------
@dataclass
class Identity:
    tag: str
    description: str
    make_instance: Callable[[random.Random], dict]
    precondition: Callable[[dict, Ring], None]
    run: Callable[[dict, int, Ring, CheckReport], None]


def _z_series(terms: list, cap: int) -> RatioSeries:
    return geometric_terms(2, cap, (1,), lambda k: terms[k])


def _ring_for(instance: dict) -> SymbolicRing:
    return SymbolicRing()


def _no_precondition(inst, ring):
    return None


# q-binomial: 2phi1(a, b; b; q, z) = (az;q)_inf/(z;q)_inf
def _qbinom_instance(rng):
    return {"a": random_rational(rng), "b": random_rational(rng)}


def _qbinom_run(inst, cap, ring, rep):
    a, b = ring.coerce(inst["a"]), ring.coerce(inst["b"])
    lhs = _z_series(phi_terms([a, b], [b], cap, ring), cap)
    rhs = _z_series(qproduct_coeffs([a], [ring.one], cap, ring), cap)
    compare_series(rep, lhs, rhs, "2phi1(a,b;b) vs product")
    # the b = 0 degenerate form is the pure q-binomial sum
    lhs0 = _z_series(phi_terms([a], [], cap, ring), cap)
    compare_series(rep, lhs0, rhs, "1phi0(a) vs product")


# product forms (2phi1-2) and (2phi1-3)
def _pf_instance(rng):
    return {"a": random_rational(rng)}


def _pf_run(inst, cap, ring, rep):
    a = ring.coerce(inst["a"])
    q = ring.q
    lhs = _z_series(phi_terms([a * a, a * q], [a], cap, ring), cap)
    prod = _z_series(qproduct_coeffs([a * a * q], [ring.one], cap, ring), cap)
    rhs = prod * RatioSeries(2, cap, {(0,): ring.one, (1,): a})
    compare_series(rep, lhs, rhs, "2phi1(a^2,aq;a) vs (1+az) product")
    lhs = _z_series(phi_terms([a, -a], [-q], cap, ring), cap)
    rhs = _z_series(qproduct_coeffs([a * a], [ring.one], cap, ring, base=q * q), cap)
    compare_series(rep, lhs, rhs, "2phi1(a,-a;-q) vs base q^2 product")


# q-Pfaff-Saalschutz
def _ps_instance(rng):
    return {"a": random_rational(rng), "b": random_rational(rng), "c": random_rational(rng)}


def _ps_params(inst, N, ring):
    a, b, c = (ring.coerce(inst[k]) for k in "abc")
    q = ring.q
    qn = q ** (-N) if hasattr(q, "inverse") else 1 / q**N
    return [a, b, qn], [c, ring.div(a * b * q * qn, c)], q


def _ps_pre(inst, ring):
    for N in range(0, 3):
        num, den, q = _ps_params(inst, N, ring)
        # balanced: product of denominators equals q times product of numerators
        if not coeff_equal(den[0] * den[1], q * num[0] * num[1] * num[2]):
            raise PreconditionError("3phi2 is not balanced")


def _ps_run(inst, cap, ring, rep):
    from .scalar import qpoch
    a, b, c = (ring.coerce(inst[k]) for k in "abc")
    for N in range(cap + 1):
        num, den, q = _ps_params(inst, N, ring)
        lhs = phi_value(num, den, q, ring)
        rhs = ring.div(qpoch(c / a, N) * qpoch(c / b, N), qpoch(c, N) * qpoch(ring.div(c, a * b), N))
        if not coeff_equal(lhs, rhs):
            rep.fail({"n": N, "lhs": str(lhs), "rhs": str(rhs)})
            return


# very-well-poised 6phi5, terminating with d = q^{-n}
def _vwp_instance(rng):
    return {"u": random_rational(rng), "b": random_rational(rng), "c": random_rational(rng)}


def _vwp_params(inst, N, ring):
    u, b, c = (ring.coerce(inst[k]) for k in "ubc")
    q = ring.q
    a = u * u
    d = ring.one / q**N
    num = [a, q * u, -q * u, b, c, d]
    den = [u, -u, ring.div(a * q, b), ring.div(a * q, c), ring.div(a * q, d)]
    arg = ring.div(a * q, b * c * d)
    return num, den, arg, a, b, c


def _vwp_pre(inst, ring):
    num, den, arg, a, b, c = _vwp_params(inst, 2, ring)
    q = ring.q
    # very-well-poised: a q = num_i * den_i pairing, with the +-q a^{1/2} / +-a^{1/2} pair
    if not coeff_equal(num[1] * num[2], -q * q * a) or not coeff_equal(den[0] * den[1], -a):
        raise PreconditionError("not very-well-poised: square-root pair mismatch")
    for x, y in zip(num[3:], den[2:]):
        if not coeff_equal(x * y, a * q):
            raise PreconditionError("not well-poised")
    if not coeff_equal(arg * num[3] * num[4] * num[5], a * q):
        raise PreconditionError("argument is not aq/(bcd)")


def _vwp_run(inst, cap, ring, rep):
    from .scalar import qpoch
    for N in range(cap + 1):
        num, den, arg, a, b, c = _vwp_params(inst, N, ring)
        q = ring.q
        lhs = phi_value(num, den, arg, ring)
        rhs = ring.div(qpoch(a * q, N) * qpoch(ring.div(a * q, b * c), N),
                       qpoch(ring.div(a * q, b), N) * qpoch(ring.div(a * q, c), N))
        if not coeff_equal(lhs, rhs):
            rep.fail({"n": N, "lhs": str(lhs), "rhs": str(rhs)})
            return


# Jackson: 2phi1(q^-n, b; c; q, z) = (c/b)_n/(c)_n 3phi2(q^-n, b, b z q^-n/c; b q^{1-n}/c, 0; q, q)
def _jk_instance(rng):
    return {"b": random_rational(rng), "c": random_rational(rng), "z": random_rational(rng)}


def _jk_run(inst, cap, ring, rep):
    from .scalar import qpoch
    b, c, z = (ring.coerce(inst[k]) for k in "bcz")
    q = ring.q
    for N in range(cap + 1):
        qn = ring.one / q**N
        lhs = phi_value([qn, b], [c], z, ring)
        inner = phi_value([qn, b, ring.div(b * z * qn, c)], [ring.div(b * q * qn, c), ring.zero], q, ring)
        rhs = ring.div(qpoch(ring.div(c, b), N), qpoch(c, N)) * inner
        if not coeff_equal(lhs, rhs):
            rep.fail({"n": N, "lhs": str(lhs), "rhs": str(rhs)})
            return


# the n = 3 resummation behind the product formula
def _n3_instance(rng):
    return {"T": random_rational(rng)}


def _n3_run(inst, cap, ring, rep):
    ring = SymbolicRing({"T": inst["T"]})
    q, t = ring.q, ring.t
    one = ring.one
    lhs = RatioSeries(2, cap, {})
    for k in range(cap + 1):
        from .scalar import qpoch
        ck = ring.div(qpoch(t, k) * qpoch(t, k), qpoch(q, k) * qpoch(ring.div(q, t * t), k))
        ck = ck * ring.div(q, t * t) ** k
        inner = phi_terms([q ** (k + 1) / t, ring.div(q, t**3)], [ring.div(q ** (k + 1), t * t)],
                          cap - k, ring, arg=t)
        for m, cm in enumerate(inner):
            key = (k + m,)
            lhs.terms[key] = lhs.terms.get(key, ring.zero) + ck * cm
    lhs = RatioSeries(2, cap, lhs.terms)
    mid_terms = []
    for m in range(cap + 1):
        from .scalar import qpoch
        qm = one / q**m
        pref = ring.div(qpoch(q / t, m) * qpoch(ring.div(q, t**3), m), qpoch(ring.div(q, t * t), m) * qpoch(q, m))
        inner = phi_value([t, t, qm], [q / t, qm * t**3], q, ring)
        mid_terms.append(pref * t**m * inner)
    mid = _z_series(mid_terms, cap)
    rhs = _z_series(qproduct_coeffs([q / t], [t], cap, ring), cap)
    compare_series(rep, lhs, mid, "double sum vs 3phi2 form")
    compare_series(rep, mid, rhs, "3phi2 form vs product")


IDENTITIES: dict[str, Identity] = {
    "q-binomial": Identity("q-binomial", "2phi1(a,b;b;q,z) = (az;q)_inf/(z;q)_inf", _qbinom_instance,
                           _no_precondition, _qbinom_run),
    "product-forms": Identity("product-forms", "2phi1(a^2,aq;a) and 2phi1(a,-a;-q) product forms",
                              _pf_instance, _no_precondition, _pf_run),
    "pfaff-saalschutz": Identity("pfaff-saalschutz", "balanced terminating 3phi2 summation", _ps_instance,
                                 _ps_pre, _ps_run),
    "6phi5": Identity("6phi5", "terminating very-well-poised 6phi5 summation", _vwp_instance, _vwp_pre,
                      _vwp_run),
    "jackson": Identity("jackson", "terminating 2phi1 to 3phi2 transformation", _jk_instance,
                        _no_precondition, _jk_run),
    "n3-resummation": Identity("n3-resummation", "double sum of the n=3 product formula", _n3_instance,
                               _no_precondition, _n3_run),
}


def verify_identity(tag: str, instance: dict | None = None, cap: int = 10, seed: int = 0,
                    ring: Ring | None = None) -> CheckReport:
    """Expand both sides of a tagged identity at one instance and compare exactly."""
    if tag not in IDENTITIES:
        raise KeyError(f"unknown identity tag {tag!r}")
    ident = IDENTITIES[tag]
    if instance is None:
        instance = ident.make_instance(random.Random(seed))
    ring = ring or _ring_for(instance)
    rep = CheckReport(f"qhyper.{tag}", {"instance": instance, "cap": cap}, mode="symbolic", seeds=[seed])
    with timed(rep):
        try:
            ident.precondition(instance, ring)
        except PreconditionError as exc:
            rep.verdict = "precondition-error"
            rep.witness = {"reason": str(exc)}
            return rep
        ident.run(instance, cap, ring, rep)
    return rep


def verify_identity_suite(tag: str, instances: int = 3, cap: int = 10, seed: int = 0) -> CheckReport:
    rep = CheckReport(f"qhyper.{tag}", {"instances": instances, "cap": cap}, mode="symbolic", seeds=[seed])
    with timed(rep):
        rng = random.Random(seed)
        for i in range(instances):
            sub_seed = rng.randrange(1 << 30)
            sub = verify_identity(tag, cap=cap, seed=sub_seed)
            rep.merge(sub, f"instance-{i}")
            rep.details.setdefault("instances", []).append(sub.params["instance"])
    return rep


__all__ = [
    "PhiSpec", "phi_terms", "phi_series", "phi_value", "qproduct_coeffs", "qproduct_series",
    "IDENTITIES", "verify_identity", "verify_identity_suite", "PASS", "FAIL",
]
