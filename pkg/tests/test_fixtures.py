import pytest

from qmacv.checks import run_check
from qmacv.fixtures import GOLDEN, fixture_check, fixture_path, load, write_all
from qmacv.report import FAIL, PASS


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_fixture_matches(name):
    rep = fixture_check(name)
    assert rep.verdict == PASS, rep.witness
    assert rep.details["entries"] == len(load(name))


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_every_perturbation_is_caught(name):
    for key in load(name):
        rep = fixture_check(name, (key, "1/7"))
        assert rep.verdict == FAIL
        assert rep.witness["entry"] == key
        assert rep.witness["stored"] != rep.witness["computed"]


def test_perturbation_of_missing_entry_is_caught():
    rep = fixture_check("D-n2-cap3", ("9|9", 1))
    assert rep.verdict == FAIL and rep.witness["entry"] == "9|9"


def test_perturb_through_registry():
    rep = run_check("fixture.F-n2-cap3", {"perturb": "0:1"})
    assert rep.verdict == FAIL and rep.witness["entry"] == "0"


def test_regenerated_files_are_identical(tmp_path):
    for p in write_all(tmp_path):
        assert p.read_text() == fixture_path(p.stem).read_text()
