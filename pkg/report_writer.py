from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from space import Region, format_number

VERSION = "0.1.0"
REPORT_SCHEMA = "gcontract-report/1"


def to_jsonable(value: Any) -> Any:
    """Fractions become "p/q" strings; regions keep their description and parts."""
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, Fraction):
        return format_number(value)
    if isinstance(value, float):
        return value if math.isfinite(value) else str(value)
    if isinstance(value, Region):
        return {
            "description": value.describe(),
            "parts": [part.describe() for part in value.parts],
            "points": [format_number(p) for p in value.points],
            "heuristic": value.heuristic,
        }
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (frozenset, set)):
        return sorted(to_jsonable(item) for item in value)
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    return str(value)


class AnalysisReport:
    """Ordered report sections plus provenance, rendered as JSON or indented text."""

    def __init__(self, command: str, config_name: str, config_hash: str, seed: Optional[int]) -> None:
        self._command = command
        self._provenance = {
            "config": config_name,
            "config_hash": config_hash,
            "seed": seed,
            "version": VERSION,
            "command": command,
        }
        self._sections: dict[str, Any] = {}
        self._violations: list[str] = []

    @property
    def exit_code(self) -> int:
        return 1 if self._violations else 0

    @property
    def violations(self) -> list[str]:
        return list(self._violations)

    def add_section(self, name: str, payload: Any) -> None:
        self._sections[name] = to_jsonable(payload)

    def record_violation(self, what: str) -> None:
        if what not in self._violations:
            self._violations.append(what)

    def document(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "provenance": dict(self._provenance),
            "sections": dict(self._sections),
            "violations": list(self._violations),
            "exit_code": self.exit_code,
        }

    def render_json(self) -> str:
        return json.dumps(self.document(), ensure_ascii=False, sort_keys=True, indent=2)

    def render_text(self) -> str:
        lines: list[str] = []
        _render_lines(self.document(), 0, lines)
        return "\n".join(lines)

    def write(self, path: str | Path, as_json: bool = True) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        body = self.render_json() if as_json else self.render_text()
        with target.open("w", encoding="utf-8") as handle:
            handle.write(body)
            handle.write("\n")
        return target


def _scalar(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def _render_lines(value: Any, depth: int, lines: list[str]) -> None:
    pad = "  " * depth
    if isinstance(value, dict):
        for key in sorted(value):
            item = value[key]
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                _render_lines(item, depth + 1, lines)
            else:
                lines.append(f"{pad}{key}: {_scalar(item) if not isinstance(item, (dict, list)) else '(none)'}")
        return
    if isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}-")
                _render_lines(item, depth + 1, lines)
            else:
                lines.append(f"{pad}- {_scalar(item)}")
        return
    lines.append(f"{pad}{_scalar(value)}")
