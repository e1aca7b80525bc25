"""The record every inequality check produces."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
VACUOUS = "vacuous"
BUG_SUSPECTED = "bug_suspected"


@dataclass
class CheckReport:
    """One evaluation of one inequality ``lhs <= rhs`` on one instance.

    ``margin`` is ``rhs - lhs`` (for identities, ``-|rhs - lhs|``).
    ``status`` is ``pass`` iff ``margin >= -tolerance``; ``vacuous`` marks an
    infinite right-hand side or an implication whose premise is false.
    """

    check_id: str
    lhs: float
    rhs: float
    margin: float
    status: str
    instance_digest: str = ""
    seed: int | None = None
    tolerance: float = 0.0
    note: str = ""
    instance: dict[str, Any] | None = field(default=None, repr=False)

    @property
    def failed(self) -> bool:
        return self.status in (FAIL, BUG_SUSPECTED)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if d["instance"] is None:
            del d["instance"]
        if not d["note"]:
            del d["note"]
        return d


def judge(check_id: str, lhs: float, rhs: float, tolerance: float, note: str = "") -> CheckReport:
    """Build a report for the inequality ``lhs <= rhs``."""
    if math.isinf(rhs) and rhs > 0 or math.isnan(rhs):
        return CheckReport(check_id, lhs, rhs, math.inf, VACUOUS, tolerance=tolerance, note=note or "infinite rhs")
    margin = rhs - lhs
    status = PASS if margin >= -tolerance else FAIL
    return CheckReport(check_id, lhs, rhs, margin, status, tolerance=tolerance, note=note)


def judge_identity(check_id: str, lhs: float, rhs: float, tolerance: float) -> CheckReport:
    margin = -abs(rhs - lhs)
    return CheckReport(check_id, lhs, rhs, margin, PASS if margin >= -tolerance else FAIL, tolerance=tolerance)


def vacuous(check_id: str, note: str, lhs: float = math.nan, rhs: float = math.nan) -> CheckReport:
    return CheckReport(check_id, lhs, rhs, math.inf, VACUOUS, note=note)
