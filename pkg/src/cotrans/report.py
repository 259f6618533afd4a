"""Structured verification reports.

Every verifier in the package returns a :class:`Report`: a list of named
checks, each with a sample count, the largest residual seen and a few
witnesses for failures.  Reports serialize to plain JSON-ready dicts and
render as a small text table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

MAX_WITNESSES = 5


@dataclass
class Check:
    name: str
    samples: int = 0
    max_residual: float = 0.0
    failures: int = 0
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    @property
    def status(self) -> str:
        return "ok" if self.passed else "fail"

    def record(self, residual: float, ok: bool, witness: Any = None) -> None:
        self.samples += 1
        if residual is not None and not math.isnan(residual):
            self.max_residual = max(self.max_residual, float(residual))
        elif residual is not None:
            self.max_residual = math.inf
        if not ok:
            self.failures += 1
            if len(self.witnesses) < MAX_WITNESSES:
                self.witnesses.append(witness)

    def to_dict(self) -> dict:
        return {
            "axiom": self.name,
            "samples": self.samples,
            "max_residual": _jsonable_float(self.max_residual),
            "failures": self.failures,
            "status": self.status,
            "witness": self.witnesses[0] if self.witnesses else None,
            "witnesses": self.witnesses,
        }


@dataclass
class Report:
    title: str
    checks: list[Check] = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        c = Check(name)
        self.checks.append(c)
        return c

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def merge(self, other: "Report", prefix: str = "") -> "Report":
        for c in other.checks:
            c.name = prefix + c.name
            self.checks.append(c)
        for k, v in other.extras.items():
            self.extras[prefix + k] = v
        return self

    def failing(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "extras": self.extras,
        }


def _jsonable_float(x: float):
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return x


def render(report: Report | dict) -> str:
    """Human-readable table: name, samples, max residual, status.

    Failing rows come first and are followed by their witnesses.
    """
    data = report.to_dict() if isinstance(report, Report) else report
    checks = data.get("checks", [])
    if not checks:
        return "no checks run"
    rows = sorted(checks, key=lambda c: c["status"] == "ok")
    width = max(len("check"), *(len(c["axiom"]) for c in rows))
    lines = [f"{'check':<{width}}  {'samples':>8}  {'max residual':>12}  status"]
    for c in rows:
        res = c["max_residual"]
        res_s = f"{res:.3e}" if isinstance(res, (int, float)) else str(res)
        lines.append(f"{c['axiom']:<{width}}  {c['samples']:>8}  {res_s:>12}  {c['status']}")
        if c["status"] != "ok":
            for w in c.get("witnesses", []):
                lines.append(f"    witness: {w}")
    return "\n".join(lines)
