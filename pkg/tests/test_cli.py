import json
import subprocess
import sys

import pytest

from qmacv.cli import main

PERTURBED = {"id": "fixture.F-n2-cap3", "params": {"perturb": "0:1"}, "expect": "fail"}
SMALL = {"id": "spectral.closed_form", "params": {"n": 2, "cap": 3}}


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr().out


def test_list(capsys):
    code, out = run(["list"], capsys)
    assert code == 0
    ids = [line.split()[0] for line in out.splitlines()]
    assert "fock.hr" in ids and "quasi.covariance" in ids and "qhyper.jackson" in ids


def test_check_pass(capsys):
    code, out = run(["check", "spectral.closed_form", "--n", "2", "--cap", "4"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["verdict"] == "pass"
    assert rep["check-id"] == "spectral.closed_form"
    assert rep["params"]["cap"] == 4
    assert set(rep) >= {"check-id", "params", "verdict", "timing-ms", "mode", "seeds"}


def test_check_param_override(capsys):
    code, out = run(["check", "fock.raising", "--param", "lambda=2,1"], capsys)
    assert code == 0 and json.loads(out)["verdict"] == "pass"


def test_check_fail_exit_code(capsys):
    code, out = run(["check", "fixture.F-n2-cap3", "--param", "perturb=0:1"], capsys)
    rep = json.loads(out)
    assert code == 1
    assert rep["verdict"] == "fail" and rep["witness"]["entry"] == "0"


def test_unknown_id_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", "no.such.check"])
    assert exc.value.code == 2
    assert "unknown check id" in capsys.readouterr().err


def test_malformed_param_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["check", "fock.ope", "--param", "cap"])
    assert exc.value.code == 2


def test_empty_manifest(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text("[]")
    out_file = tmp_path / "r.json"
    code, out = run(["suite", str(m), "--out", str(out_file)], capsys)
    assert code == 0
    rep = json.loads(out_file.read_text())
    assert rep["checks"] == [] and rep["summary"]["total"] == 0


def test_forced_fail_manifest(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"checks": [SMALL, PERTURBED]}))
    out_file = tmp_path / "r.json"
    code, out = run(["suite", str(m), "--out", str(out_file)], capsys)
    assert code == 1
    assert "witness" in out
    checks = json.loads(out_file.read_text())["checks"]
    assert [c["verdict"] for c in checks] == ["pass", "fail"]
    assert checks[1]["witness"]["entry"] == "0"


def test_reports_are_deterministic(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(["check", "quasi.covariance", "--n", "2", "--cap", "2", "--qorder", "6", "--seed", "4",
             "--param", "points=1", "--out", str(p)], capsys)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_parallel_suite_matches_serial(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps([SMALL, PERTURBED, {"id": "fock.ope", "params": {"cap": 2}}]))
    outs = []
    for jobs in ("1", "3"):
        out_file = tmp_path / f"r{jobs}.json"
        run(["suite", str(m), "--jobs", jobs, "--out", str(out_file)], capsys)
        outs.append(out_file.read_bytes())
    assert outs[0] == outs[1]


def test_report_dir(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps([SMALL, PERTURBED]))
    d = tmp_path / "report"
    code, _ = run(["suite", str(m), "--report-dir", str(d)], capsys)
    assert code == 1
    rows = (d / "summary.tsv").read_text().splitlines()
    assert rows[0].split("\t") == ["check-id", "area", "params", "verdict", "timing-ms"]
    assert [r.split("\t")[3] for r in rows[1:]] == ["pass", "fail"]
    assert json.loads((d / "report.json").read_text())["summary"]["fail"] == 1
    assert (d / "summary.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_fixtures_command(capsys):
    code, out = run(["fixtures"], capsys)
    assert code == 0 and "F-n2-cap3" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmacv.cli", "check", "qhyper.q-binomial",
                           "--param", "instances=1", "--cap", "4"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["verdict"] == "pass"
