"""Verification reports and their JSON / text serializations."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

MAX_WITNESSES = 20


def _clean(obj: Any) -> Any:
    # JSON has no infinities; encode them as strings so output stays standard
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return _clean(obj.item())
    return obj


@dataclass
class VerificationReport:
    """Outcome of one check.

    ``worst_margin`` is signed so that negative means a violation; the check
    passes when it stays above ``-tolerance``. ``table`` holds optional
    plot-ready rows (for example scale vs. functional value).
    """

    check: str
    params: dict = field(default_factory=dict)
    worst_margin: float = 0.0
    empirical_constant: float = float("nan")
    passed: bool = True
    tolerance: float = 0.0
    witnesses: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    table: list = field(default_factory=list)
    table_header: tuple = ()

    def add_witness(self, item) -> None:
        if len(self.witnesses) < MAX_WITNESSES:
            self.witnesses.append(item)

    def to_dict(self) -> dict:
        return _clean(
            {
                "check": self.check,
                "params": self.params,
                "worst_margin": float(self.worst_margin),
                "empirical_constant": float(self.empirical_constant),
                "passed": bool(self.passed),
                "tolerance": float(self.tolerance),
                "witnesses": self.witnesses[:MAX_WITNESSES],
                "notes": self.notes,
                "table_header": list(self.table_header),
                "table": self.table,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        d = self.to_dict()
        rows = [
            ("check", d["check"]),
            ("verdict", "PASS" if d["passed"] else "FAIL"),
            ("worst_margin", f"{self.worst_margin:.6g}"),
            ("empirical_constant", f"{self.empirical_constant:.6g}"),
        ]
        rows += [(f"param.{k}", str(v)) for k, v in sorted(d["params"].items())]
        rows += [("note", n) for n in d["notes"]]
        rows += [("witness", str(w)) for w in d["witnesses"]]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)

    def table_csv(self) -> str:
        lines = [",".join(self.table_header)]
        lines += [",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in row) for row in self.table]
        return "\n".join(lines) + "\n"


def merge(check: str, parts: list[VerificationReport], params: dict | None = None) -> VerificationReport:
    """Combine sub-reports in order: fails if any part fails, margin is the minimum."""
    out = VerificationReport(check=check, params=params or {})
    if not parts:
        out.notes.append("no sub-checks")
        return out
    out.worst_margin = min(p.worst_margin for p in parts)
    consts = [p.empirical_constant for p in parts if not math.isnan(p.empirical_constant)]
    out.empirical_constant = max(consts) if consts else float("nan")
    out.passed = all(p.passed for p in parts)
    for p in parts:
        out.notes.append(f"{p.check}: {'pass' if p.passed else 'FAIL'} (margin {p.worst_margin:.3g})")
        out.notes.extend(f"{p.check}: {n}" for n in p.notes)
        for w in p.witnesses:
            out.add_witness({"sub": p.check, "at": w})
    return out
