"""Value objects returned by the reversibility checks."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional


class Verdict(str, enum.Enum):
    REVERSIBLE = "Reversible"
    NOT_REVERSIBLE = "NotReversible"
    UNKNOWN = "Unknown"

    @classmethod
    def from_bool(cls, ok: Optional[bool]) -> "Verdict":
        if ok is None:
            return cls.UNKNOWN
        return cls.REVERSIBLE if ok else cls.NOT_REVERSIBLE


@dataclass
class Statement:
    """Outcome of one criterion statement; ``passed=None`` means undecided."""

    passed: Optional[bool]
    residual: float = float("nan")
    note: str = ""


@dataclass
class CriterionReport:
    verdict: Verdict
    statements: dict[str, Statement] = field(default_factory=dict)
    witnesses: dict[str, Any] = field(default_factory=dict)
    m_value: Optional[int] = None
    tolerance: float = 1e-9
    restricted: bool = False
    warnings: list[str] = field(default_factory=list)
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def reversible(self) -> bool:
        return self.verdict is Verdict.REVERSIBLE

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict.value}"]
        for name, st in self.statements.items():
            flag = {True: "pass", False: "fail", None: "unknown"}[st.passed]
            lines.append(f"  {name:<6} {flag:<8} residual={st.residual:.3e} {st.note}".rstrip())
        return "\n".join(lines)


def combine(statements: dict[str, Statement], required: tuple[str, ...]) -> tuple[Verdict, list[str]]:
    """Verdict from statements that should all agree.

    Statements in ``required`` must be decided; any other decided statement
    must match them.  Disagreement gives ``Unknown`` plus a note.
    """
    decided = {k: s.passed for k, s in statements.items() if s.passed is not None}
    missing = [k for k in required if k not in decided]
    if missing:
        return Verdict.UNKNOWN, [f"undecided statements: {', '.join(missing)}"]
    values = set(decided.values())
    if len(values) > 1:
        detail = ", ".join(f"{k}={v}" for k, v in decided.items())
        return Verdict.UNKNOWN, [f"statements disagree ({detail})"]
    return Verdict.from_bool(values.pop()), []
