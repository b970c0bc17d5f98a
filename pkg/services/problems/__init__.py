"""Pacote com os problemas embutidos e o registro por identificador.

Cada módulo monta um ProblemSpec: modelo polinomial, tipo quase-homogêneo,
dado inicial padrão, sementes de equilíbrio e execuções de referência.
"""

from typing import Callable, Dict, List, Tuple

from ..common import ConfigurationError
from . import common, fvks, kk
from .common import ParameterSpec, ProblemSpec, ReferenceRow, parse_chart

_REGISTRY: Dict[str, Tuple[Callable[..., ProblemSpec], Tuple[ParameterSpec, ...]]] = {
    "fvks": (fvks.make_fvks, fvks.FVKS_PARAMETERS),
    "kk": (kk.make_kk, kk.KK_PARAMETERS),
    "kk-simple": (kk.make_kk_simple, kk.KK_SIMPLE_PARAMETERS),
}


def get_problem(problem_id: str, **params) -> ProblemSpec:
    """Build a registered problem; unknown ids and parameters raise ConfigurationError."""

    try:
        factory, schema = _REGISTRY[problem_id]
    except KeyError as exc:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigurationError(f"problema desconhecido: {problem_id!r} (disponíveis: {known})") from exc
    allowed = {p.name for p in schema}
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ConfigurationError(f"parâmetros desconhecidos para {problem_id}: {', '.join(unknown)}")
    return factory(**params)


def list_problems() -> List[Tuple[str, Tuple[ParameterSpec, ...]]]:
    return [(name, _REGISTRY[name][1]) for name in sorted(_REGISTRY)]


__all__ = [
    "ParameterSpec",
    "ProblemSpec",
    "ReferenceRow",
    "common",
    "fvks",
    "get_problem",
    "kk",
    "list_problems",
    "parse_chart",
]
