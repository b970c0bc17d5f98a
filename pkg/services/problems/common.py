"""Componentes compartilhados entre os problemas embutidos.

ProblemSpec, esquemas de parâmetros, execuções de referência e leitura de cartas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..common import ConfigurationError
from ..compact import CompactChart, QHType, para_inverse
from ..field import VectorFieldModel
from ..interval import Interval, IntervalVector


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    kind: str
    default: object
    description: str = ""

    def describe(self) -> str:
        return f"{self.name}: {self.kind} = {self.default}"


@dataclass(frozen=True)
class ReferenceRow:
    """Published reference run used by the acceptance tests."""

    label: str
    chart: str
    x0: Optional[Tuple[float, ...]] = None
    y0: Optional[Tuple[float, ...]] = None
    eps: Optional[float] = None
    tau_N: Optional[float] = None
    t_max: Optional[Tuple[str, str]] = None
    width_max: Optional[float] = None
    status: str = "succeeded"
    provenance: str = ""

    def t_max_interval(self) -> Optional[Interval]:
        if self.t_max is None:
            return None
        return Interval.from_decimal(*self.t_max)


SeedFinder = Callable[["ProblemSpec", CompactChart, Optional[Sequence[float]]], Optional[np.ndarray]]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    id: str
    model: VectorFieldModel
    parameters: Mapping[str, object] = field(default_factory=dict)
    default_chart_label: str = "para"
    default_x0: Optional[Tuple[float, ...]] = None
    default_y0: Optional[Tuple[float, ...]] = None
    seeds: Mapping[str, Tuple[float, ...]] = field(default_factory=dict)
    reference_data: Tuple[ReferenceRow, ...] = ()
    seed_finder: Optional[SeedFinder] = None

    @property
    def qh_type(self) -> QHType:
        return self.model.qh_type

    def chart(self, label: Optional[str] = None) -> CompactChart:
        return parse_chart(label or self.default_chart_label, self.qh_type)

    def default_chart(self) -> CompactChart:
        return self.chart(self.default_chart_label)

    def initial_data(self) -> Tuple[float, ...]:
        """Default initial data in the original variables."""

        if self.default_y0 is not None:
            return self.default_y0
        if self.default_x0 is None:
            raise ConfigurationError(f"problema {self.id} não tem dado inicial padrão")
        y = para_inverse(IntervalVector.point(np.array(self.default_x0)), self.qh_type)
        return tuple(float(v) for v in y.mid())

    def equilibrium_seed(self, chart: CompactChart, y0: Optional[Sequence[float]] = None) -> Optional[np.ndarray]:
        seed = self.seeds.get(chart.label)
        if seed is not None:
            return np.array(seed, dtype=float)
        if self.seed_finder is not None:
            return self.seed_finder(self, chart, y0)
        return None


def parse_chart(label: str, qh_type: QHType) -> CompactChart:
    """``para`` or ``dir:<index>:<+|->`` with a 1-based index."""

    text = (label or "").strip().lower()
    if text == "para":
        return CompactChart.para(qh_type)
    parts = text.split(":")
    if len(parts) != 3 or parts[0] != "dir" or parts[2] not in ("+", "-"):
        raise ConfigurationError(f"carta inválida: {label!r} (use 'para' ou 'dir:i:+|-')")
    try:
        index = int(parts[1])
    except ValueError as exc:
        raise ConfigurationError(f"índice de carta inválido: {parts[1]!r}") from exc
    return CompactChart.directional(qh_type, index, 1 if parts[2] == "+" else -1)


IntervalLike = Union[Interval, float, int, str, Tuple[object, object]]


def as_interval(value: IntervalLike, name: str) -> Interval:
    """Accept intervals, numbers, decimal strings or (lo, hi) pairs; reject non-finite."""

    if isinstance(value, Interval):
        result = value
    elif isinstance(value, str):
        result = Interval.from_decimal(value)
    elif isinstance(value, (tuple, list)) and len(value) == 2:
        lo, hi = value
        result = Interval.from_decimal(str(lo), str(hi))
    elif isinstance(value, (int, float, Fraction)):
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigurationError(f"constante {name} não finita: {value}")
        result = Interval.coerce(value)
    else:
        raise ConfigurationError(f"constante {name} com tipo inválido: {type(value).__name__}")
    if not (math.isfinite(result.lo) and math.isfinite(result.hi)):
        raise ConfigurationError(f"constante {name} não finita: {result}")
    return result


def exact_rational(value: Union[int, float, str, Fraction], name: str) -> Fraction:
    try:
        result = Fraction(str(value)) if isinstance(value, float) else Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigurationError(f"parâmetro {name} inválido: {value!r}") from exc
    return result


__all__ = [
    "ParameterSpec",
    "ProblemSpec",
    "ReferenceRow",
    "as_interval",
    "exact_rational",
    "parse_chart",
]
