"""Registry of named checks and the default verification manifest."""

from __future__ import annotations

import traceback
from dataclasses import dataclass, field
from typing import Callable

from .report import BUDGET, FAIL, PRECONDITION, BudgetExceeded, CheckReport, PreconditionError


@dataclass
class CheckSpec:
    check_id: str
    area: str
    run: Callable[[dict], CheckReport]
    defaults: dict = field(default_factory=dict)
    doc: str = ""


REGISTRY: dict[str, CheckSpec] = {}


def register(check_id: str, area: str, defaults: dict | None = None, doc: str = ""):
    def deco(fn):
        REGISTRY[check_id] = CheckSpec(check_id, area, fn, dict(defaults or {}), doc or (fn.__doc__ or "").strip())
        return fn
    return deco


class UnknownCheck(KeyError):
    pass


class BadParameter(ValueError):
    pass


def _tuple(x):
    if isinstance(x, str):
        return tuple(int(v) for v in x.split(",") if v.strip() != "")
    if isinstance(x, int):
        return (x,)
    return tuple(x)


# -- qhyper ---------------------------------------------------------------------------------------------
def _register_qhyper():
    from .qhyper import IDENTITIES, verify_identity_suite
    for tag in IDENTITIES:
        def run(p, tag=tag):
            return verify_identity_suite(tag, p["instances"], p["cap"], p["seed"])
        register(f"qhyper.{tag}", "q-hypergeometric identities", {"instances": 3, "cap": 10, "seed": 0},
                 IDENTITIES[tag].description)(run)


_register_qhyper()


# -- operators ------------------------------------------------------------------------------------------
@register("operators.theta_kernel", "integral operator", {"qorder": 12, "seed": 0})
def _theta(p):
    """Bilateral kernel sum against the theta-function quotient."""
    from .operators import theta_kernel_check
    return theta_kernel_check(p["qorder"], p["seed"])


@register("operators.prefactor", "integral operator", {"qorder": 12, "seed": 0})
def _prefactor(p):
    """Simplified per-variable prefactor against the unsimplified product."""
    from .operators import prefactor_identity_check
    return prefactor_identity_check(p["qorder"], p["seed"])


@register("operators.integral_vs_spectral", "integral operator", {"n": 2, "cap": 3, "qorder": 8, "seed": 0})
def _ivs(p):
    """Constant-term evaluation of I(alpha) against P Lambda P^-1."""
    from .operators import integral_vs_spectral_check
    return integral_vs_spectral_check(p["n"], p["cap"], p["qorder"], p["seed"])


@register("operators.commute_ID", "integral operator",
          {"n": 2, "cap": 3, "qorder": 8, "points": 2, "seed": 0})
def _commute_id(p):
    """[I(alpha), D] = 0 with I evaluated by constant terms."""
    from .operators import commute_ID_check
    return commute_ID_check(p["n"], p["cap"], p["qorder"], p["points"], p["seed"])


@register("operators.spectral_commute", "integral operator", {"n": 2, "cap": 4, "seed": 0})
def _spec_commute(p):
    """[I(alpha), I(beta)] = 0 in spectral mode."""
    from .operators import spectral_commute_check
    return spectral_commute_check(p["n"], p["cap"], p["seed"])


@register("operators.eigenvalues", "integral operator", {"jmax": 4})
def _eigs(p):
    """I(alpha) eigenvalue formula consistency."""
    from .operators import eigenvalue_consistency_check
    return eigenvalue_consistency_check(p["jmax"])


@register("operators.structure", "difference operator", {"n": 3, "cap": 4})
def _structure(p):
    """Triangularity and diagonal of D."""
    from .operators import structure_check
    return structure_check(p["n"], p["cap"])


# -- spectral -------------------------------------------------------------------------------------------
@register("spectral.closed_form", "eigenfunctions", {"n": 2, "cap": 8})
def _closed(p):
    """Back-substitution eigenfunction f_0 against its closed form."""
    from .spectral import closed_form_check
    return closed_form_check(p["n"], p["cap"])


@register("spectral.shift_relation", "eigenfunctions", {"n": 2, "j": "1", "cap": 4})
def _shift(p):
    """f_j from f_0 by shifting s."""
    from .spectral import shift_relation_check
    return shift_relation_check(p["n"], _tuple(p["j"]), p["cap"])


@register("spectral.product_f0", "eigenfunctions", {"n": 2, "cap": 8, "routes": "a,b"})
def _prod_f0(p):
    """f_0 at the principal specialization against the infinite product."""
    from .spectral import product_f0_check
    routes = tuple(r for r in str(p["routes"]).split(",") if r)
    return product_f0_check(p["n"], p["cap"], routes)


@register("spectral.weyl_relations", "Weyl symmetry", {"n": 3, "m": 1, "samples": 5, "seed": 0})
def _weyl_rel(p):
    """Coxeter relations of the level-m Weyl action."""
    from .spectral import weyl_relations_check
    return weyl_relations_check(p["n"], p["m"], p["samples"], p["seed"])


@register("spectral.termination", "Weyl symmetry", {"n": 2, "m": 1, "cap": 6})
def _term(p):
    """Termination at t = q^m and antisymmetry of the resulting polynomial."""
    from .spectral import termination_and_antisymmetry
    return termination_and_antisymmetry(p["n"], p["m"], p["cap"])


@register("spectral.homogeneous_limit", "degenerate spectrum", {"n": 3, "cap": 4, "seed": 0})
def _homog(p):
    """Finiteness of f_j as s -> (1, ..., 1)."""
    from .spectral import homogeneous_limit_check
    return homogeneous_limit_check(p["n"], p["cap"], seed=p["seed"])


@register("spectral.jordan", "degenerate spectrum", {"n": 3, "cap": 3, "seed": 0})
def _jordan(p):
    """Generalized eigenspaces of D at s = 1 against Weyl orbits."""
    from .spectral import jordan_structure
    return jordan_structure(p["n"], p["cap"], seed=p["seed"])


@register("spectral.lemma_expansion", "degenerate spectrum", {"cap": 4, "imax": 2})
def _lemma(p):
    """First-order expansions of eigenfunctions near s_1 = s_2."""
    from .spectral import lemma_expansion_check
    return lemma_expansion_check(p["cap"], p["imax"])


@register("spectral.jordan_I", "degenerate spectrum", {"cap": 3, "qorder": 6, "seed": 0})
def _jordan_i(p):
    """I(alpha) on a Jordan pair: I h = lambda h + nu g."""
    from .spectral import jordan_I_check
    return jordan_I_check(p["cap"], p["qorder"], p["seed"])


@register("spectral.commute_I_homogeneous", "degenerate spectrum", {"n": 3, "cap": 2, "qorder": 6, "seed": 0})
def _commute_ih(p):
    """[I(alpha), I(beta)] = 0 at s = 1 (constant-term mode)."""
    from .spectral import commute_I_homogeneous
    return commute_I_homogeneous(p["n"], p["cap"], p["qorder"], p["seed"])


# -- quasi ---------------------------------------------------------------------------------------------
@register("quasi.iterative", "quasi-eigenfunction", {"n": 2, "K": 2, "cap": 3, "qorder": 8, "seed": 0})
def _iter(p):
    """Iterated integral samples against the closed form."""
    from .quasi import iterative_check
    return iterative_check(p["n"], p["K"], p["cap"], p["qorder"], p["seed"])


@register("quasi.covariance", "quasi-eigenfunction",
          {"n": 2, "variant": "I", "cap": 3, "qorder": 8, "points": 3, "seed": 0})
def _cov(p):
    """Covariance of F(alpha) under I (variant I or I')."""
    from .quasi import covariance_check
    return covariance_check(p["n"], p["variant"], p["cap"], p["qorder"], p["points"], p["seed"])


@register("quasi.reconstruct", "quasi-eigenfunction", {"n": 2, "cap": 3, "seed": 0})
def _recon(p):
    """Rational reconstruction in alpha from exact samples."""
    from .quasi import reconstruct_check
    return reconstruct_check(p["n"], p["cap"], p["seed"])


@register("quasi.eigen_expansion", "quasi-eigenfunction", {"cap": 4})
def _eexp(p):
    """F(alpha) = sum f_i b_i for n = 2, with the inverse matrix d_ij."""
    from .quasi import eigen_expansion_n2
    return eigen_expansion_n2(p["cap"])


@register("quasi.product_simple", "special values", {"n": 2, "which": "neg-sqrt-t", "cap": 4})
def _psimple(p):
    """Product formulas at alpha = -t^1/2, t, and -1 (n = 2)."""
    from .quasi import product_check_simple
    return product_check_simple(p["n"], p["which"], p["cap"])


@register("quasi.product_pfaffian", "special values", {"n": 2, "sign": 1, "cap": 6})
def _ppf(p):
    """Pfaffian times product at alpha = +-q^1/2 t^1/2."""
    from .quasi import product_check_pfaffian
    return product_check_pfaffian(p["n"], p["sign"], p["cap"])


@register("quasi.product_Gl", "special values", {"n": 2, "l": 1, "sign": -1, "cap": 3})
def _pgl(p):
    """Spin-sum formula at alpha = -+q^l t^1/2."""
    from .quasi import product_check_Gl
    return product_check_Gl(p["n"], p["l"], p["sign"], p["cap"])


@register("quasi.embed", "special values", {"cap": 3, "points": 2, "seed": 0})
def _embed(p):
    """F(alpha) for n = 3 lies in the k theta generalized eigenspaces."""
    from .quasi import embed_check
    return embed_check(p["cap"], p["points"], p["seed"])


# -- fock ------------------------------------------------------------------------------------------------
@register("fock.hr", "Fock space", {"r": 1, "s": 2, "cap": 6})
def _hr(p):
    """[H_r, H_s] = 0 on every power-sum vector of degree <= cap."""
    from .fock import commute_check_Hr
    return commute_check_Hr(p["r"], p["s"], p["cap"])


@register("fock.h1_eigen", "Fock space", {"cap": 5})
def _h1(p):
    """H_1 eigenvalues on Macdonald Q_lambda."""
    from .fock import H1_eigen_check
    return H1_eigen_check(p["cap"])


@register("fock.raising", "Fock space", {"lambda": "1,1"})
def _raising(p):
    """Raising-operator integral proportional to Q_lambda."""
    from .fock import raising_check
    lam = _tuple(p["lambda"])
    return raising_check(lam, sum(lam))


@register("fock.oracle", "Fock space", {"cap": 4})
def _oracle(p):
    """Gram-Schmidt oracle: duality of Q and P, one-row case."""
    from .fock import oracle_check
    return oracle_check(p["cap"])


@register("fock.eqhr", "Fock space", {"r": 1, "n": 2, "cap": 3})
def _eqhr(p):
    """H_r on phi(x_1)...phi(x_n)|0> against Macdonald operators in x."""
    from .fock import eqHr_crosscheck
    return eqHr_crosscheck(p["r"], p["n"], p["cap"])


@register("fock.family_commute", "Fock space", {"r": 1, "s": 2, "n": 3, "cap": 4, "mode": "symbolic", "seed": 0})
def _family(p):
    """[D^r, D^s] = 0 on the truncated ratio-series space."""
    from .fock import family_commute_check
    return family_commute_check(p["r"], p["s"], p["n"], p["cap"], p["mode"], p["seed"])


@register("fock.ope", "Fock space", {"cap": 3})
def _ope(p):
    """Operator product, difference property and symmetrization identity."""
    from .fock import ope_checks
    return ope_checks(p["cap"])


@register("fock.kernel", "Fock space", {"cap": 4})
def _kernel(p):
    """One-sided H_r kernel against the bilateral omega kernel (r <= 2)."""
    from .fock import kernel_crosscheck
    return kernel_crosscheck(p["cap"])


@register("fock.triangularity", "Fock space", {"r": 1, "cap": 4})
def _tri(p):
    """Triangularity of H_r on the g_lambda basis."""
    from .fock import triangularity_check
    return triangularity_check(p["r"], p["cap"])


# -- fixtures --------------------------------------------------------------------------------------------
def _register_fixtures():
    from .fixtures import GOLDEN, fixture_check
    for name, (desc, _) in GOLDEN.items():
        def run(p, name=name):
            pert = p.get("perturb")
            if pert:
                key, _, delta = str(pert).rpartition(":")
                return fixture_check(name, (key or None, delta or "1"))
            return fixture_check(name)
        register(f"fixture.{name}", "golden fixtures", {"perturb": ""}, desc)(run)


_register_fixtures()


# -- running --------------------------------------------------------------------------------------------
def resolve_params(check_id: str, overrides: dict | None = None) -> dict:
    if check_id not in REGISTRY:
        raise UnknownCheck(check_id)
    spec = REGISTRY[check_id]
    params = dict(spec.defaults)
    for k, v in (overrides or {}).items():
        if k not in params:
            raise BadParameter(f"{check_id} has no parameter {k!r} (known: {', '.join(sorted(params)) or 'none'})")
        default = params[k]
        if isinstance(default, int) and not isinstance(default, bool) and isinstance(v, str):
            try:
                v = int(v)
            except ValueError as exc:
                raise BadParameter(f"{k} expects an integer") from exc
        params[k] = v
    return params


def run_check(check_id: str, overrides: dict | None = None) -> CheckReport:
    """Run one registered check; exceptions become verdicts, never propagate."""
    params = resolve_params(check_id, overrides)
    try:
        rep = REGISTRY[check_id].run(params)
    except PreconditionError as exc:
        rep = CheckReport(check_id, verdict=PRECONDITION, witness={"error": str(exc)})
    except BudgetExceeded as exc:
        rep = CheckReport(check_id, verdict=BUDGET, witness={"error": str(exc)})
    except Exception as exc:  # isolation: a crash is a failure with a witness
        rep = CheckReport(check_id, verdict=FAIL,
                          witness={"exception": f"{type(exc).__name__}: {exc}",
                                   "where": traceback.extract_tb(exc.__traceback__)[-1].name})
    rep.check_id = check_id
    rep.params = params
    return rep


# -- the default manifest: the acceptance suite --------------------------------------------------------
def _m(check_id, **params):
    return {"id": check_id, "params": params}


def default_manifest() -> list[dict]:
    from .fixtures import GOLDEN
    from .qhyper import IDENTITIES
    out = [
        _m("spectral.closed_form", n=2, cap=8),
        _m("spectral.closed_form", n=3, cap=5),
        _m("operators.integral_vs_spectral", n=2, cap=3, qorder=8),
        _m("operators.commute_ID", n=2, cap=3, qorder=8, points=2),
        _m("operators.commute_ID", n=3, cap=2, qorder=6, points=2),
    ]
    for n, m in ((2, 1), (2, 2), (2, 3), (3, 1), (3, 2)):
        out.append(_m("spectral.termination", n=n, m=m, cap=6))
    out.append(_m("spectral.termination", n=4, m=1, cap=4))
    out += [
        _m("spectral.product_f0", n=2, cap=8, routes="a,b"),
        _m("spectral.product_f0", n=3, cap=5, routes="a,b"),
        _m("spectral.product_f0", n=4, cap=4, routes="b"),
    ]
    for variant in ("I", "I'"):
        out.append(_m("quasi.covariance", n=2, variant=variant, cap=3, qorder=8, points=3))
        out.append(_m("quasi.covariance", n=3, variant=variant, cap=2, qorder=6, points=2))
    out.append(_m("quasi.reconstruct", n=2, cap=3))
    for n in (2, 3):
        for which in ("neg-sqrt-t", "t"):
            out.append(_m("quasi.product_simple", n=n, which=which, cap=4))
    out.append(_m("quasi.product_simple", n=2, which="neg-one-n2", cap=6))
    out += [
        _m("quasi.product_pfaffian", n=2, sign=1, cap=6),
        _m("quasi.product_pfaffian", n=2, sign=-1, cap=6),
        _m("quasi.product_pfaffian", n=3, sign=1, cap=4),
        _m("quasi.product_pfaffian", n=3, sign=-1, cap=4),
    ]
    for n, l in ((2, 1), (3, 1), (2, 2)):
        for sign in (-1, 1):
            out.append(_m("quasi.product_Gl", n=n, l=l, sign=sign, cap=3))
    for r, s in ((1, 2), (1, 3), (2, 3)):
        out.append(_m("fock.hr", r=r, s=s, cap=6))
    out.append(_m("fock.h1_eigen", cap=5))
    for lam in ("1", "2", "1,1", "2,1,0", "2,1", "3,1", "2,2", "2,1,1", "1,1,1"):
        out.append(_m("fock.raising", **{"lambda": lam}))
    for r, n in ((1, 1), (1, 2), (2, 2)):
        out.append(_m("fock.eqhr", r=r, n=n, cap=3))
    out += [
        _m("fock.family_commute", r=1, s=2, n=3, cap=4),
        _m("fock.ope", cap=3),
    ]
    for tag in IDENTITIES:
        out.append(_m(f"qhyper.{tag}", instances=3, cap=10))
    out += [
        _m("spectral.jordan", n=3, cap=3),
        _m("spectral.lemma_expansion", cap=4),
    ]
    for name in GOLDEN:
        out.append(_m(f"fixture.{name}"))
    return out
