"""CheckReport: the common result record of every verification."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
PRECONDITION = "precondition-error"
BUDGET = "budget-exceeded"
VERDICTS = (PASS, FAIL, PRECONDITION, BUDGET)


class PreconditionError(ValueError):
    """Inputs violate a check's side conditions; reported, never a failure verdict."""


class BudgetExceeded(RuntimeError):
    pass


def _text(x) -> str:
    if hasattr(x, "to_text"):
        return x.to_text()
    return str(x)


@dataclass
class CheckReport:
    check_id: str
    params: dict = field(default_factory=dict)
    verdict: str = PASS
    witness: dict | None = None
    timing_ms: float = 0.0
    mode: str = "symbolic"
    seeds: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self, timing: bool = True) -> dict[str, Any]:
        d: dict[str, Any] = {
            "check-id": self.check_id,
            "params": _jsonable(self.params),
            "verdict": self.verdict,
        }
        if self.witness is not None:
            d["witness"] = _jsonable(self.witness)
        d["timing-ms"] = round(self.timing_ms, 3) if timing else 0
        d["mode"] = self.mode
        d["seeds"] = list(self.seeds)
        if self.details:
            d["details"] = _jsonable(self.details)
        return d

    def fail(self, witness: dict) -> "CheckReport":
        self.verdict = FAIL
        self.witness = witness
        return self

    def merge(self, sub: "CheckReport", label: str | None = None) -> "CheckReport":
        """Fold a sub-check in: first failure wins, details are nested."""
        key = label or sub.check_id
        self.details.setdefault("parts", {})[key] = sub.verdict
        if sub.verdict != PASS and self.verdict == PASS:
            self.verdict = sub.verdict
            self.witness = {"part": key, **(sub.witness or {})}
        for s in sub.seeds:
            if s not in self.seeds:
                self.seeds.append(s)
        return self


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return _text(x)


def series_witness(e, lhs, rhs) -> dict:
    return {"monomial": list(e), "lhs": _text(lhs), "rhs": _text(rhs)}


def compare_series(report: CheckReport, lhs, rhs, label: str | None = None, cap: int | None = None) -> bool:
    """Compare two RatioSeries; on mismatch record the first differing monomial."""
    e = lhs.first_mismatch(rhs, cap)
    if e is None:
        return True
    w = series_witness(e, lhs.coefficient(e, 0), rhs.coefficient(e, 0))
    if label:
        w["where"] = label
    if report.verdict == PASS:
        report.fail(w)
    return False


@contextmanager
def timed(report: CheckReport):
    t0 = time.perf_counter()
    try:
        yield report
    finally:
        report.timing_ms = (time.perf_counter() - t0) * 1000.0
