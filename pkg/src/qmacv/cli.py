"""qmacv: batch verification harness.

    qmacv list
    qmacv check <id> [--n N --cap C --qorder M --seed S --mode MODE --param k=v ... --out FILE]
    qmacv suite [manifest.json] [--jobs N] [--out FILE] [--report-dir DIR] [--timing]
    qmacv fixtures [--write DIR]

Exit codes: 0 all checks passed, 1 some check did not pass, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .checks import REGISTRY, BadParameter, UnknownCheck, default_manifest, resolve_params, run_check
from .report import PASS, VERDICTS

log = logging.getLogger("qmacv")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _overrides(args) -> dict:
    out = {}
    for name in ("n", "cap", "qorder", "seed", "mode"):
        v = getattr(args, name, None)
        if v is not None:
            out[name] = v
    for item in args.param or []:
        if "=" not in item:
            raise BadParameter(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = _parse_value(v)
    return out


def load_manifest(path: str | None) -> list[dict]:
    if path is None:
        return default_manifest()
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data.get("checks", [])
    out = []
    for entry in data:
        if isinstance(entry, str):
            entry = {"id": entry}
        out.append({"id": entry["id"], "params": dict(entry.get("params", {})), "expect": entry.get("expect")})
    return out


def _run_entry(entry: dict) -> dict:
    rep = run_check(entry["id"], entry.get("params"))
    return rep.to_dict()


def run_suite(manifest: list[dict], jobs: int = 1) -> list[dict]:
    """Run every manifest entry (independently) and return reports in manifest order."""
    for entry in manifest:
        resolve_params(entry["id"], entry.get("params"))
    if jobs <= 1 or len(manifest) <= 1:
        return [_run_entry(e) for e in manifest]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_entry, manifest))


def _area(check_id: str) -> str:
    spec = REGISTRY.get(check_id)
    return spec.area if spec else ""


def write_report_dir(directory: Path, reports: list[dict], timing: bool) -> None:
    """report.json, summary.tsv and a verdict/timing figure."""
    directory.mkdir(parents=True, exist_ok=True)
    body = reports if timing else [{**r, "timing-ms": 0} for r in reports]
    (directory / "report.json").write_text(_dumps({"checks": body, "summary": _summary(reports)}))
    with open(directory / "summary.tsv", "w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(["check-id", "area", "params", "verdict", "timing-ms"])
        for r in reports:
            w.writerow([r["check-id"], _area(r["check-id"]), json.dumps(r["params"], sort_keys=True),
                        r["verdict"], f"{r['timing-ms']:.1f}"])
    plot_summary(reports, directory / "summary.png")


def plot_summary(reports: list[dict], path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    colors = {"pass": "#4c9a52", "fail": "#c0392b", "precondition-error": "#d68910", "budget-exceeded": "#7f8c8d"}
    labels = [f"{r['check-id']} {_short(r['params'])}" for r in reports]
    times = [max(r["timing-ms"], 1e-3) / 1000.0 for r in reports]
    fig, ax = plt.subplots(figsize=(9, 0.22 * len(reports) + 1.2))
    ypos = range(len(reports))
    ax.barh(list(ypos), times, color=[colors.get(r["verdict"], "k") for r in reports])
    ax.set_yticks(list(ypos))
    ax.set_yticklabels(labels, fontsize=6)
    ax.invert_yaxis()
    ax.set_xscale("log")
    ax.set_xlabel("time [s]")
    counts = _summary(reports)
    ax.set_title(", ".join(f"{k}: {v}" for k, v in counts.items() if k != "total"), fontsize=9)
    for verdict, c in colors.items():
        ax.bar(0, 0, color=c, label=verdict)
    ax.legend(fontsize=6, loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _short(params: dict) -> str:
    keep = {k: v for k, v in params.items() if v not in ("", None)}
    return ",".join(f"{k}={v}" for k, v in sorted(keep.items()))[:40]


def _summary(reports: list[dict]) -> dict:
    out = {v: 0 for v in VERDICTS}
    for r in reports:
        out[r["verdict"]] = out.get(r["verdict"], 0) + 1
    out["total"] = len(reports)
    return out


def _cmd_list(args) -> int:
    for cid in sorted(REGISTRY):
        spec = REGISTRY[cid]
        defaults = " ".join(f"{k}={v}" for k, v in spec.defaults.items())
        print(f"{cid:34s} {spec.area:28s} {defaults}")
    return 0


def _cmd_check(args) -> int:
    rep = run_check(args.id, _overrides(args))
    text = _dumps(rep.to_dict(timing=args.timing))
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0 if rep.verdict == PASS else 1


def _expected_ok(entry: dict, report: dict) -> bool:
    return report["verdict"] == (entry.get("expect") or PASS)


def _cmd_suite(args) -> int:
    manifest = load_manifest(args.manifest)
    reports = run_suite(manifest, args.jobs)
    for entry, r in zip(manifest, reports):
        mark = "ok " if _expected_ok(entry, r) else "BAD"
        print(f"{mark} {r['verdict']:18s} {r['timing-ms'] / 1000:8.2f}s  {r['check-id']} {_short(r['params'])}")
        if r["verdict"] != PASS and r.get("witness"):
            print(f"      witness: {json.dumps(r['witness'], sort_keys=True)[:300]}")
    body = reports if args.timing else [{**r, "timing-ms": 0} for r in reports]
    if args.out:
        Path(args.out).write_text(_dumps({"checks": body, "summary": _summary(reports)}))
    if args.report_dir:
        write_report_dir(Path(args.report_dir), reports, args.timing)
    print(json.dumps(_summary(reports), sort_keys=True))
    return 0 if all(r["verdict"] == PASS for r in reports) else 1


def _cmd_fixtures(args) -> int:
    from .fixtures import GOLDEN, fixture_path, write_all
    if args.write:
        for p in write_all(Path(args.write)):
            print(p)
    else:
        for name, (desc, _) in GOLDEN.items():
            print(f"{name:20s} {desc}  [{fixture_path(name)}]")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qmacv", description="Exact verification suite.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("list", help="list registered checks")
    sp.set_defaults(func=_cmd_list)

    sp = sub.add_parser("check", help="run one check")
    sp.add_argument("id")
    sp.add_argument("--n", type=int)
    sp.add_argument("--cap", type=int)
    sp.add_argument("--qorder", type=int, help="q-adic order M (results modulo Q^(M+1))")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--mode", choices=["symbolic", "sampled", "q-adic"])
    sp.add_argument("--param", action="append", metavar="KEY=VALUE", help="any other check parameter")
    sp.add_argument("--out")
    sp.add_argument("--timing", action="store_true", help="keep wall-clock timing in the JSON")
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("suite", help="run a manifest (default: the full acceptance suite)")
    sp.add_argument("manifest", nargs="?")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    sp.add_argument("--report-dir")
    sp.add_argument("--timing", action="store_true", help="keep wall-clock timing in the JSON")
    sp.set_defaults(func=_cmd_suite)

    sp = sub.add_parser("fixtures", help="list or regenerate golden fixtures")
    sp.add_argument("--write", metavar="DIR")
    sp.set_defaults(func=_cmd_fixtures)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UnknownCheck as exc:
        parser.error(f"unknown check id {exc.args[0]!r}; see `qmacv list`")
    except (BadParameter, json.JSONDecodeError, FileNotFoundError, KeyError) as exc:
        parser.error(str(exc))
    return 2


if __name__ == "__main__":
    sys.exit(main())
