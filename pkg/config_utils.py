from __future__ import annotations

import os
from fractions import Fraction
from typing import Optional

ENV_PREFIX = "GCONTRACT_"


def env_name(name: str) -> str:
    return name if name.startswith(ENV_PREFIX) else f"{ENV_PREFIX}{name}"


def parse_number(raw: str) -> Fraction:
    """Parse `3`, `-0.25`, `5/2` or `1e-6` into an exact Fraction.

    Infinite values are rejected here; interval parsing handles `inf` itself.
    """
    text = raw.strip().replace(" ", "")
    if not text:
        raise ValueError("empty number")
    if text.lower().lstrip("+-") in {"inf", "infinity", "nan"}:
        raise ValueError(f"non-finite number {raw!r}")
    if "/" in text:
        num, _, den = text.partition("/")
        value = Fraction(parse_number(num)) / parse_number(den)
        return value
    return Fraction(text)


def read_str_env(name: str, default: Optional[str] = None) -> Optional[str]:
    raw = (os.getenv(env_name(name)) or "").strip()
    return raw or default


def read_number_env(name: str, default: Optional[Fraction]) -> Optional[Fraction]:
    raw = (os.getenv(env_name(name)) or "").strip()
    if not raw:
        return default
    try:
        value = parse_number(raw)
    except (ValueError, ZeroDivisionError):
        return default
    return value if value > 0 else default


def read_float_env(name: str, default: float) -> float:
    raw = (os.getenv(env_name(name)) or "").strip()
    if not raw:
        return default
    try:
        value = float(raw)
    except ValueError:
        return default
    return value if value > 0 else default


def read_int_env(name: str, default: int) -> int:
    raw = (os.getenv(env_name(name)) or "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value > 0 else default


def read_bool_env(name: str, default: bool) -> bool:
    raw = (os.getenv(env_name(name)) or "").strip().lower()
    if not raw:
        return default
    return parse_bool(raw, default)


def parse_bool(raw: str, default: bool) -> bool:
    lowered = raw.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    return default
