"""Utility helpers shared across CLI commands."""

import math
from typing import Any, Dict, Iterable, Optional, Tuple

from services.common import ConfigurationError
from services.interval import Interval


def _parse_float(text: str, what: str) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{what}: número inválido {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigurationError(f"{what}: valor não finito {text!r}")
    return value


def parse_vector(text: Optional[Any], what: str = "vetor") -> Optional[Tuple[float, ...]]:
    """Comma-separated reals (or a TOML array) into a tuple of floats."""

    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        items = [str(v) for v in text]
    else:
        items = [part.strip() for part in str(text).split(",")]
    if not items or any(not item for item in items):
        raise ConfigurationError(f"{what}: vetor malformado {text!r}")
    return tuple(_parse_float(item, what) for item in items)


def parse_param_value(text: str) -> Any:
    """``3`` -> int, ``0.5`` -> float, ``lo,hi`` -> (lo, hi) decimal strings, else the text."""

    text = text.strip()
    if "," in text:
        lo, _, hi = text.partition(",")
        return (lo.strip(), hi.strip())
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return _parse_float(text, "parâmetro")
    except ConfigurationError:
        return text


def parse_params(pairs: Optional[Iterable[str]]) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"parâmetro malformado {pair!r} (use nome=valor)")
        params[key.strip()] = parse_param_value(value)
    return params


def format_interval(value: Optional[Interval], digits: int = 17) -> str:
    if value is None:
        return "—"
    return f"[{value.lo:.{digits}g}, {value.hi:.{digits}g}]"
