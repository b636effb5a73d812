"""The eleven acceptance criteria, each as one test printing one pass/fail line.

The default suite manifest is run once; each criterion then collects its
entries by check id, requires every one of them to pass, and compares the
summed check time with the criterion's budget.
"""

import os
import time

import pytest

from qmacv.checks import default_manifest
from qmacv.cli import run_suite
from qmacv.fixtures import GOLDEN, fixture_check, load

CRITERIA = {
    1: ("eigen-solver vs closed forms", 30, lambda cid: cid == "spectral.closed_form"),
    2: ("integral vs spectral oracle", 120, lambda cid: cid == "operators.integral_vs_spectral"),
    3: ("commutativity of I and D", 600, lambda cid: cid == "operators.commute_ID"),
    4: ("Weyl termination suite", 300, lambda cid: cid == "spectral.termination"),
    5: ("product formula for f_0", 180, lambda cid: cid == "spectral.product_f0"),
    6: ("quasi-eigenfunction covariance", 600,
        lambda cid: cid in ("quasi.covariance", "quasi.reconstruct")),
    7: ("special-value product suite", 600, lambda cid: cid.startswith("quasi.product_")),
    8: ("Fock space suite", 900, lambda cid: cid.startswith("fock.")),
    9: ("q-hypergeometric identities", 60, lambda cid: cid.startswith("qhyper.")),
    10: ("Jordan structure", 300, lambda cid: cid in ("spectral.jordan", "spectral.lemma_expansion")),
    11: ("negative controls on fixtures", 60, lambda cid: cid.startswith("fixture.")),
}


@pytest.fixture(scope="module")
def suite():
    manifest = default_manifest()
    return list(zip(manifest, run_suite(manifest, jobs=os.cpu_count() or 1)))


def perturbation_controls() -> tuple[list, float]:
    """Perturb every stored coefficient of every fixture; each must fail naming that entry."""
    bad = []
    start = time.perf_counter()
    for name in GOLDEN:
        for key in load(name):
            rep = fixture_check(name, (key, "1/3"))
            if rep.verdict != "fail" or rep.witness.get("entry") != key:
                bad.append(f"{name}:{key}")
    return bad, time.perf_counter() - start


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, suite, capsys):
    title, budget, select = CRITERIA[number]
    rows = [(e, r) for e, r in suite if select(e["id"])]
    failures = [f"{r['check-id']} {r['params']}: {r['verdict']}" for _, r in rows if r["verdict"] != "pass"]
    seconds = sum(r["timing-ms"] for _, r in rows) / 1000
    count = len(rows)
    if number == 11:
        bad, extra = perturbation_controls()
        failures += [f"perturbation not detected: {b}" for b in bad]
        seconds += extra
        count += sum(len(load(name)) for name in GOLDEN)
    over = seconds > budget
    ok = rows and not failures and not over
    with capsys.disabled():
        print(f"\ncriterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {count} checks, "
              f"{seconds:.1f}s of {budget}s budget")
    assert rows, "no checks selected"
    assert not failures, failures
    assert not over, f"{seconds:.1f}s exceeds {budget}s"
