"""Report records shared by the audit functions and the CLI."""

from __future__ import annotations

import dataclasses
import operator
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

_RELATIONS = {"==": operator.eq, ">=": operator.ge, "<=": operator.le}


def jsonable(x: Any) -> Any:
    """Convert rationals to ``"num/den"``, big ints to strings, containers recursively."""
    if isinstance(x, bool) or x is None or isinstance(x, (str, float)):
        return x
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x if abs(x) < 1 << 53 else str(x)
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    if dataclasses.is_dataclass(x):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [jsonable(v) for v in items]
    return str(x)


@dataclass
class AuditReport:
    """One exact comparison ``lhs <relation> rhs``, optionally with sub-checks.

    ``verdict`` is the comparison itself together with every part's verdict.
    """

    check: str
    inputs: dict
    lhs: int | Fraction
    rhs: int | Fraction
    relation: str = "=="
    parts: list["AuditReport"] = field(default_factory=list)
    witness: Any = None
    wall_time: float = 0.0

    def __post_init__(self):
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def comparison(self) -> bool:
        return _RELATIONS[self.relation](self.lhs, self.rhs)

    @property
    def verdict(self) -> bool:
        return self.comparison and all(p.verdict for p in self.parts)

    def to_dict(self, include_time: bool = False) -> dict:
        """Serializable form; wall time is left out unless asked for so reruns compare equal."""
        out = {
            "check": self.check,
            "inputs": jsonable(self.inputs),
            "lhs": jsonable(self.lhs),
            "rhs": jsonable(self.rhs),
            "relation": self.relation,
            "verdict": "holds" if self.verdict else "fails",
        }
        if self.parts:
            out["parts"] = [p.to_dict(include_time) for p in self.parts]
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        if include_time:
            out["wall_time"] = round(self.wall_time, 6)
        return out
