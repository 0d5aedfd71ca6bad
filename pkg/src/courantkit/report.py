"""Structured check verdicts with canonically printed residuals.

A CheckRecord holds the residuals of one verified identity.  Residual values
are kept both as live objects (BaseCoeff tensors or GradedPoly, for
cross-module tests) and as canonical strings (for byte-stable reports).
The wall time is informational only and is excluded from machine output so
that identical inputs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def residual_entries(value, indices: str = "") -> list[tuple[str, str]]:
    """Flatten a residual (GradedPoly, BaseCoeff or nested list) to printed entries.

    Returns [(component-label, canonical-string)] for nonzero components only;
    empty list means the residual is identically zero.  Component indices are
    printed 1-based to match the input-file convention.
    """
    out = []

    def walk(v, idx):
        if isinstance(v, list):
            for pos, u in enumerate(v):
                walk(u, idx + (pos,))
            return
        if not v.is_zero():
            label = "[" + ",".join(str(i + 1) for i in idx) + "]" if idx else ""
            out.append((label, str(v)))

    walk(value, ())
    return out


@dataclass
class CheckRecord:
    name: str                      # stable identifier, e.g. "courant.anchor-isotropy"
    subject: str                   # one-line description of the identity checked
    entries: list = field(default_factory=list)   # printed nonzero residual components
    passed: bool = True
    data: dict = field(default_factory=dict)      # live residual objects for callers

    @staticmethod
    def from_residuals(name: str, subject: str, residuals: dict) -> "CheckRecord":
        rec = CheckRecord(name=name, subject=subject, data=dict(residuals))
        for label, value in residuals.items():
            for idx, text in residual_entries(value):
                rec.entries.append((label + idx, text))
        rec.passed = not rec.entries
        return rec


@dataclass
class Report:
    title: str
    records: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def add(self, record: CheckRecord) -> "Report":
        self.records.append(record)
        return self

    def record(self, name: str):
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)
