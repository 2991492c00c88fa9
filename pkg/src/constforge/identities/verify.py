"""Digit-agreement verification of identities."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..numkern import ConstforgeError, agreed_digits, make_context, to_decimal_string
from .evaluate import eval_stabilized
from .registry import Identity

DEFAULT_SLACK = 2


@dataclass(frozen=True)
class VerificationReport:
    name: str
    requested_digits: int
    lhs_value: str
    rhs_value: str
    matched_digits: int
    passed: bool
    elapsed: float
    methods: dict = field(default_factory=dict)
    reason: str | None = None

    def to_json(self, deterministic: bool = False) -> dict:
        return {
            "name": self.name,
            "requested_digits": self.requested_digits,
            "lhs": self.lhs_value,
            "rhs": self.rhs_value,
            "matched_digits": self.matched_digits,
            "pass": self.passed,
            "elapsed_ms": 0 if deterministic else round(self.elapsed * 1000, 3),
            "methods": self.methods,
            "reason": self.reason,
        }


def _point(identity, env, digits, ctx):
    lhs_notes, rhs_notes = set(), set()
    lhs = eval_stabilized(identity.lhs, ctx, env, lhs_notes)
    rhs = eval_stabilized(identity.rhs, ctx, env, rhs_notes)
    matched = min(agreed_digits(lhs.value, rhs.value, cap=digits),
                  lhs.certified_digits, rhs.certified_digits)
    return matched, lhs, rhs, lhs_notes, rhs_notes


def verify(identity: Identity, digits: int, slack: int = DEFAULT_SLACK,
           guard: int = 10) -> VerificationReport:
    """Evaluate both sides and compare them digit by digit.

    Evaluation errors give a failed report carrying the error's reason
    rather than raising. With a grid, every point is checked and the worst
    one is reported.
    """
    ctx = make_context(digits, guard)
    start = time.perf_counter()
    try:
        worst = None
        per_point = []
        lhs_notes, rhs_notes = set(), set()
        for env, label in identity.points():
            matched, lhs, rhs, ln, rn = _point(identity, env, digits, ctx)
            lhs_notes |= ln
            rhs_notes |= rn
            if label:
                per_point.append(f"{identity.grid_var}={label}: {matched}")
            if worst is None or matched < worst[0]:
                worst = (matched, lhs, rhs, label)
    except ConstforgeError as exc:
        return VerificationReport(
            identity.name, digits, "", "", 0, False, time.perf_counter() - start,
            {}, f"{getattr(exc, 'reason', 'error')}: {exc}")
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        return VerificationReport(
            identity.name, digits, "", "", 0, False, time.perf_counter() - start,
            {}, f"error: {exc}")
    matched, lhs, rhs, label = worst
    methods = {
        "lhs": sorted(lhs_notes),
        "rhs": sorted(rhs_notes),
        "certified": {"lhs": lhs.certified_digits, "rhs": rhs.certified_digits},
    }
    if per_point:
        methods["grid"] = per_point
        methods["reported_point"] = f"{identity.grid_var}={label}"
    return VerificationReport(
        identity.name,
        digits,
        to_decimal_string(lhs.value, digits),
        to_decimal_string(rhs.value, digits),
        matched,
        matched >= digits - slack,
        time.perf_counter() - start,
        methods,
    )


def verify_all(identities, digits: int, slack: int = DEFAULT_SLACK) -> list:
    reports = [verify(identity, digits, slack) for identity in identities]
    return sorted(reports, key=lambda r: r.name)
