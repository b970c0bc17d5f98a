"""Tipos quase-homogêneos e cartas de compactificação.

A carta quase-parabólica leva todo o espaço de fase em {p(x) < 1}; a carta
direcional i com sinal +/- cobre o cone em que y_i mantém o sinal e manda o
infinito para {s = 0}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .common import ChartError, ConfigurationError, VerificationError, get_logger
from .interval import Interval, IntervalVector, interval_sum, krawczyk_scalar, pow_int

logger = get_logger(__name__)


@dataclass(frozen=True)
class QHType:
    """Type alpha, exponents beta with alpha_i beta_i = c, and order k + 1."""

    alpha: Tuple[int, ...]
    beta: Tuple[int, ...]
    c: int
    order_k: int

    @property
    def n(self) -> int:
        return len(self.alpha)

    def __post_init__(self) -> None:
        if len(self.alpha) != len(self.beta):
            raise ConfigurationError("alpha e beta com tamanhos diferentes")
        if any(a * b != self.c for a, b in zip(self.alpha, self.beta)):
            raise ConfigurationError(f"alpha_i beta_i != c para alpha={self.alpha}, beta={self.beta}")


def make_type(alpha: Sequence[int], order_k: int) -> QHType:
    alpha = tuple(int(a) for a in alpha)
    if not alpha:
        raise ConfigurationError("alpha vazio")
    if any(a <= 0 for a in alpha):
        raise ConfigurationError(f"todos os alpha_i devem ser positivos: {alpha}")
    if order_k < 0:
        raise ConfigurationError(f"ordem k deve ser não negativa: {order_k}")
    c = math.lcm(*alpha)
    return QHType(alpha=alpha, beta=tuple(c // a for a in alpha), c=c, order_k=int(order_k))


@dataclass(frozen=True)
class CompactChart:
    kind: str
    qh_type: QHType
    index: int = 0
    sign: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("para", "dir"):
            raise ConfigurationError(f"tipo de carta desconhecido: {self.kind}")
        if self.kind == "dir":
            if not 1 <= self.index <= self.qh_type.n:
                raise ConfigurationError(f"índice da carta fora de 1..{self.qh_type.n}: {self.index}")
            if self.sign not in (1, -1):
                raise ConfigurationError(f"sinal da carta deve ser +1 ou -1: {self.sign}")

    @classmethod
    def para(cls, qh_type: QHType) -> "CompactChart":
        return cls("para", qh_type)

    @classmethod
    def directional(cls, qh_type: QHType, index: int, sign: int) -> "CompactChart":
        return cls("dir", qh_type, index, sign)

    @property
    def is_para(self) -> bool:
        return self.kind == "para"

    @property
    def label(self) -> str:
        if self.is_para:
            return "para"
        return f"dir:{self.index}:{'+' if self.sign > 0 else '-'}"

    @property
    def dim(self) -> int:
        return self.qh_type.n

    def other_indices(self) -> Tuple[int, ...]:
        """0-based original indices carried by the x-part of a directional state."""

        return tuple(j for j in range(self.qh_type.n) if j != self.index - 1)


# ---------------------------------------------------------------------------
# p functional
# ---------------------------------------------------------------------------


def p_power(x: IntervalVector, t: QHType) -> Interval:
    """Enclosure of p(x)^{2c} = sum x_i^{2 beta_i}."""

    if len(x) != t.n:
        raise ConfigurationError(f"dimensão {len(x)} != {t.n}")
    return interval_sum(pow_int(x[i], 2 * t.beta[i]) for i in range(t.n))


def p_functional(x: IntervalVector, t: QHType) -> Interval:
    return p_power(x, t).root(2 * t.c)


def p_power_float(x: np.ndarray, t: QHType) -> float:
    x = np.asarray(x, dtype=float)
    return float(sum(x[i] ** (2 * t.beta[i]) for i in range(t.n)))


# ---------------------------------------------------------------------------
# quasi-parabolic chart
# ---------------------------------------------------------------------------


def kappa_polynomial(kappa: Interval, p_pow: Interval, c: int) -> Interval:
    """F_y(kappa) = kappa^{2c} - kappa^{2c-1} - p(y)^{2c}."""

    return pow_int(kappa, 2 * c) - pow_int(kappa, 2 * c - 1) - p_pow


def kappa_derivative(kappa: Interval, c: int) -> Interval:
    return pow_int(kappa, 2 * c - 1) * (2 * c) - pow_int(kappa, 2 * c - 2) * (2 * c - 1)


def _kappa_float(p_pow: float, c: int) -> float:
    # F is increasing and convex on kappa >= 1, Newton from the right is monotone
    kappa = 2.0 * max(1.0, p_pow ** (1.0 / (2 * c))) + 1.0
    for _ in range(200):
        value = kappa ** (2 * c) - kappa ** (2 * c - 1) - p_pow
        slope = 2 * c * kappa ** (2 * c - 1) - (2 * c - 1) * kappa ** (2 * c - 2)
        step = value / slope
        kappa -= step
        if abs(step) <= 1e-16 * kappa:
            break
    return kappa


def solve_kappa(p_pow: Interval, c: int) -> Interval:
    """Verified enclosure of the unique root kappa > max(1, p) of F_y."""

    def f(k: Interval) -> Interval:
        return kappa_polynomial(k, p_pow, c)

    def df(k: Interval) -> Interval:
        return kappa_derivative(k, c)

    guess = _kappa_float(p_pow.mid(), c)
    try:
        return krawczyk_scalar(f, df, Interval(guess).inflate(1e-14, 1e-12))
    except VerificationError:
        logger.debug("kappa: retrying from the coarse candidate, p^2c=%s", p_pow)
    p_hi = p_pow.root(2 * c).hi
    lower = max(1.0, p_pow.root(2 * c).lo)
    return krawczyk_scalar(f, df, Interval(lower, 2.0 * max(1.0, p_hi) + 1.0))


def para_forward(y: IntervalVector, t: QHType) -> Tuple[IntervalVector, Interval]:
    """T_para(y) = (y_i / kappa^{alpha_i}), with the verified kappa."""

    kappa = solve_kappa(p_power(y, t), t.c)
    x = IntervalVector.from_intervals(y[i] / pow_int(kappa, t.alpha[i]) for i in range(t.n))
    return x, kappa


def para_inverse(x: IntervalVector, t: QHType) -> IntervalVector:
    """S(x) = x_j / (1 - p(x)^{2c})^{alpha_j}."""

    w = 1 - p_power(x, t)
    if w.lo <= 0.0:
        raise ChartError(f"ponto no horizonte ou além dele: 1 - p^2c = {w}")
    return IntervalVector.from_intervals(x[j] / pow_int(w, t.alpha[j]) for j in range(t.n))


def quasi_poincare_kappa(y: np.ndarray, t: QHType) -> float:
    """Float kappa of the quasi-Poincaré compactification, (1 + p^{2c})^{1/2c}."""

    return (1.0 + p_power_float(y, t)) ** (1.0 / (2 * t.c))


# ---------------------------------------------------------------------------
# directional charts
# ---------------------------------------------------------------------------


def dir_forward(y: IntervalVector, chart: CompactChart) -> Tuple[Interval, IntervalVector]:
    """y -> (s, x) with y_i = sign / s^{alpha_i}, y_j = x_j / s^{alpha_j}."""

    t = chart.qh_type
    i = chart.index - 1
    signed = y[i] * chart.sign
    if signed.lo <= 0.0:
        raise ChartError(f"y_{chart.index} = {y[i]} fora da carta {chart.label}")
    s = (1 / signed).root(t.alpha[i])
    x = IntervalVector.from_intervals(y[j] * pow_int(s, t.alpha[j]) for j in chart.other_indices())
    return s, x


def dir_inverse(s: Interval, x: IntervalVector, chart: CompactChart) -> IntervalVector:
    t = chart.qh_type
    if s.lo <= 0.0:
        raise ChartError(f"s = {s} toca o horizonte")
    i = chart.index - 1
    entries = [None] * t.n
    entries[i] = Interval(chart.sign) / pow_int(s, t.alpha[i])
    for pos, j in enumerate(chart.other_indices()):
        entries[j] = x[pos] / pow_int(s, t.alpha[j])
    return IntervalVector.from_intervals(entries)


def dir_state(s: Interval, x: IntervalVector) -> IntervalVector:
    """Directional state vector (s, x)."""

    return IntervalVector.from_intervals([s]).concat(x)


def chart_forward(y: IntervalVector, chart: CompactChart) -> IntervalVector:
    """Compactified state of an original-space point for either chart kind."""

    if chart.is_para:
        return para_forward(y, chart.qh_type)[0]
    return dir_state(*dir_forward(y, chart))


def chart_inverse(state: IntervalVector, chart: CompactChart) -> IntervalVector:
    if chart.is_para:
        return para_inverse(state, chart.qh_type)
    return dir_inverse(state[0], state[1:], chart)


def horizon_point_from_direction(chart: CompactChart, x_dir: Sequence[float]) -> np.ndarray:
    """Quasi-parabolic horizon point of the direction (s = 0, x) of a directional chart."""

    t = chart.qh_type
    direction = np.empty(t.n)
    direction[chart.index - 1] = chart.sign
    direction[list(chart.other_indices())] = np.asarray(x_dir, dtype=float)
    p = p_power_float(direction, t) ** (1.0 / (2 * t.c))
    return np.array([direction[l] / p ** t.alpha[l] for l in range(t.n)])


def reflect(x, t: QHType):
    """x_i -> (-1)^{alpha_i} x_i."""

    signs = np.array([(-1) ** a for a in t.alpha], dtype=float)
    if isinstance(x, IntervalVector):
        return IntervalVector(np.where(signs > 0, x.lo, -x.hi), np.where(signs > 0, x.hi, -x.lo))
    return np.asarray(x, dtype=float) * signs


__all__ = [
    "CompactChart",
    "QHType",
    "chart_forward",
    "chart_inverse",
    "dir_forward",
    "dir_inverse",
    "dir_state",
    "horizon_point_from_direction",
    "kappa_derivative",
    "kappa_polynomial",
    "make_type",
    "p_functional",
    "p_power",
    "p_power_float",
    "para_forward",
    "para_inverse",
    "quasi_poincare_kappa",
    "reflect",
    "solve_kappa",
]
