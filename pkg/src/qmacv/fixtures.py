"""Golden fixtures: small exact objects stored as text and recomputed on demand.

Every fixture is a flat map ``key : scalar-text``.  A fixture check rebuilds
the object and compares it entry by entry; ``perturb`` adds a rational to one
stored entry first, which must make the check fail with that key as witness.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .report import CheckReport, PreconditionError, timed
from .scalar import ParamScalar

_DIR = "fixtures"


def _key(e) -> str:
    return ",".join(map(str, e)) if e else "0"


def _series_map(f) -> dict:
    return {_key(e): ParamScalar.coerce(c) for e, c in f.items_sorted()}


def _build_D_n2():
    from .operators import build_D
    from .rings import SymbolicRing
    D = build_D(2, SymbolicRing(), 3)
    return {f"{_key(r)}|{_key(c)}": ParamScalar.coerce(v)
            for c in D.basis for r, v in D.cols[c].items_sorted()}


def _build_I_n2():
    from .operators import build_I_spectral
    from .rings import SymbolicRing
    ring = SymbolicRing()
    M = build_I_spectral(ring.var("A"), 2, ring, 3)
    return {f"{_key(r)}|{_key(c)}": ParamScalar.coerce(v)
            for c in M.basis for r, v in M.cols[c].items_sorted()}


def _build_f0_n2():
    from .rings import SymbolicRing
    from .spectral import solve_eigen
    return _series_map(solve_eigen(2, SymbolicRing(), None, 8).series)


def _build_F_n2():
    from .quasi import F_closed_n2
    return _series_map(F_closed_n2(3))


def _build_F_n4():
    from .quasi import F_fixture_n4
    return _series_map(F_fixture_n4(3))


def _build_macdonald():
    from .fock import macdonald_oracle, partitions
    out = {}
    for d in range(1, 4):
        for lam in partitions(d):
            for mu, c in sorted(macdonald_oracle(lam, 3).terms.items()):
                out[f"{_key(lam)}|{_key(mu)}"] = c
    return out


GOLDEN = {
    "D-n2-cap3": ("matrix of D for n = 2, degree <= 3", _build_D_n2),
    "I-n2-cap3": ("spectral matrix of I(alpha) for n = 2, degree <= 3", _build_I_n2),
    "f0-n2-cap8": ("eigenfunction f_0 for n = 2 to degree 8", _build_f0_n2),
    "F-n2-cap3": ("quasi-eigenfunction F(alpha), n = 2, degree <= 3", _build_F_n2),
    "F-n4-sub-cap3": ("partial n = 4 quasi-eigenfunction on i_3 <= 1, degree <= 3", _build_F_n4),
    "macdonald-Q-deg3": ("Macdonald Q_lambda in the power-sum basis, |lambda| <= 3", _build_macdonald),
}


def fixture_path(name: str) -> Path:
    return Path(__file__).parent / _DIR / f"{name}.txt"


def dump(entries: dict) -> str:
    return "".join(f"{k} : {v.to_text()}\n" for k, v in entries.items())


def load(name: str) -> dict:
    if name not in GOLDEN:
        raise PreconditionError(f"unknown fixture {name}")
    out = {}
    for line in fixture_path(name).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        k, v = line.split(" : ", 1)
        out[k.strip()] = ParamScalar.from_text(v)
    return out


def write_all(directory: Path | None = None) -> list[Path]:
    directory = directory or fixture_path("x").parent
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (desc, build) in GOLDEN.items():
        p = directory / f"{name}.txt"
        p.write_text(f"# {desc}\n" + dump(build()))
        paths.append(p)
    return paths


_BUILT: dict = {}


def rebuild(name: str) -> dict:
    if name not in _BUILT:
        _BUILT[name] = GOLDEN[name][1]()
    return _BUILT[name]


def fixture_check(name: str, perturb: tuple | None = None) -> CheckReport:
    """Recompute fixture ``name`` and compare with the stored text.

    ``perturb = (key, delta)`` adds delta to the stored entry (key None: the first entry).
    """
    rep = CheckReport(f"fixture.{name}", {"perturb": list(perturb) if perturb else None})
    with timed(rep):
        stored = load(name)
        if perturb is not None:
            k, delta = perturb
            k = k if k is not None else next(iter(stored))
            stored[k] = stored.get(k, ParamScalar.coerce(0)) + ParamScalar.coerce(Fraction(delta))
        fresh = rebuild(name)
        for k in list(stored) + [k for k in fresh if k not in stored]:
            a = stored.get(k, ParamScalar.coerce(0))
            b = fresh.get(k, ParamScalar.coerce(0))
            if not (a - b).is_zero():
                return rep.fail({"entry": k, "stored": a.to_text(), "computed": b.to_text()})
        rep.details["entries"] = len(stored)
    return rep
