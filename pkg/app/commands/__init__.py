"""Command modules, one per subcommand."""

from . import catalog, trace, validate

__all__ = ["catalog", "trace", "validate"]
