"""Structured PASS/FAIL reports for checked theorem clauses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .errors import ClauseFailure


@dataclass
class Clause:
    anchor: str
    passed: bool
    witness: Any = None
    detail: str = ""
    count: int = 1

    def to_dict(self) -> dict:
        out = {"anchor": self.anchor, "status": "PASS" if self.passed else "FAIL", "checks": self.count}
        if self.witness is not None:
            out["witness"] = _plain(self.witness)
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    """Ordered collection of clauses plus free-form facts.

    Library operations take an optional ``report``; when given, every clause
    they verify is appended to it.  :meth:`require` raises on failure so a
    broken conclusion can never pass silently.
    """

    title: str
    clauses: list[Clause] = field(default_factory=list)
    facts: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.clauses)

    def check(self, anchor: str, passed: bool, witness: Any = None, detail: str = "") -> Clause:
        # repeated passing checks of one clause collapse into a counter
        if passed:
            for c in self.clauses:
                if c.passed and c.anchor == anchor and c.detail == detail:
                    c.count += 1
                    return c
        clause = Clause(anchor, bool(passed), None if passed else witness, detail)
        self.clauses.append(clause)
        return clause

    def require(self, anchor: str, passed: bool, witness: Any = None, detail: str = "") -> None:
        clause = self.check(anchor, passed, witness, detail)
        if not clause.passed:
            raise ClauseFailure(clause, self)

    def note(self, text: str) -> None:
        self.notes.append(text)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "status": "PASS" if self.ok else "FAIL",
            "facts": _plain(self.facts),
            "notes": list(self.notes),
            "clauses": [c.to_dict() for c in self.clauses],
        }

    def to_text(self) -> str:
        lines = [f"== {self.title} =="]
        for key, value in self.facts.items():
            lines.append(f"{key}: {_fmt(value)}")
        for text in self.notes:
            lines.append(f"note: {text}")
        for c in self.clauses:
            line = f"{c.anchor}: {'PASS' if c.passed else 'FAIL'}"
            if c.count > 1:
                line += f" [{c.count} checks]"
            if not c.passed and c.witness is not None:
                line += f"  witness={_fmt(c.witness)}"
            if c.detail:
                line += f"  ({c.detail})"
            lines.append(line)
        lines.append(f"status: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value, key=repr) if isinstance(value, (set, frozenset)) else value
        return [_plain(v) for v in items]
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def _fmt(value: Any) -> str:
    plain = _plain(value)
    if isinstance(plain, str):
        return plain
    return json.dumps(plain, ensure_ascii=False)
