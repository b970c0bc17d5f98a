"""Componentes compartilhados entre os serviços de validação.

Hierarquia de exceções e configuração de logs usadas por todos os serviços.
"""

from __future__ import annotations

import logging
import threading
from typing import Optional


class BlowupError(RuntimeError):
    """Base exception for validation failures."""


class ConfigurationError(BlowupError):
    """Raised when a problem, chart or run is not properly configured."""


class IntervalDomainError(BlowupError):
    """Raised when an interval operation leaves its domain."""


class VerificationError(BlowupError):
    """Raised when an interval proof (contraction, definiteness, ...) fails."""


class ChartError(BlowupError):
    """Raised when a point lies outside the domain of a compactification chart."""


class IntegrationError(BlowupError):
    """Raised when a rigorous integration cannot be continued."""


class StepUnderflowError(IntegrationError):
    """Raised when the accepted step size drops below h_min."""


class IntegrationLimitError(IntegrationError):
    """Raised when the stop predicate is not met before tau_max."""


_LOGGER_ROOT = "blowup"
_configured_level: Optional[int] = None
_logger_lock = threading.Lock()


def _resolve_level(value: str) -> int:
    text = (value or "").strip().upper()
    if text.isdigit():
        return int(text)
    level = logging.getLevelName(text)
    return level if isinstance(level, int) else logging.WARNING


def _configure_root() -> logging.Logger:
    global _configured_level

    from app.config import BLOWUP_LOG

    root = logging.getLogger(_LOGGER_ROOT)
    with _logger_lock:
        level = _resolve_level(BLOWUP_LOG)
        if _configured_level is None:
            handler = logging.StreamHandler()
            handler.setFormatter(logging.Formatter("[%(name)s] %(message)s"))
            root.addHandler(handler)
            root.propagate = False
        if _configured_level != level:
            root.setLevel(level)
            _configured_level = level
    return root


def get_logger(module_name: str) -> logging.Logger:
    """Return the ``blowup.<module>`` logger, configuring the tree on first use."""

    _configure_root()
    short = module_name.rsplit(".", 1)[-1]
    return logging.getLogger(f"{_LOGGER_ROOT}.{short}")


__all__ = [
    "BlowupError",
    "ChartError",
    "ConfigurationError",
    "IntegrationError",
    "IntegrationLimitError",
    "IntervalDomainError",
    "StepUnderflowError",
    "VerificationError",
    "get_logger",
]
