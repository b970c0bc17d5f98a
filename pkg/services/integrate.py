"""Integração de Taylor rigorosa dos campos dessingularizados no tempo tau.

O conjunto de soluções é um conjunto de Lohner {c + B r}: c é um centro em
ponto flutuante, B uma base ortogonal renovada por QR a cada passo e r uma
caixa intervalar. A integral de dt/dtau (tempo t) é acumulada junto do estado.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from app.config import INTEGRATOR_TOL, STEP_H0, STEP_H_MAX, STEP_H_MIN, TAYLOR_ORDER

from .common import IntegrationLimitError, IntervalDomainError, StepUnderflowError, VerificationError, get_logger
from .field import DesingularizedField
from .interval import Interval, IntervalMatrix, IntervalVector, down_array, pow_int, up_array, verified_inverse

logger = get_logger(__name__)


@dataclass(frozen=True)
class IntegratorSettings:
    order: int = TAYLOR_ORDER
    tol: float = INTEGRATOR_TOL
    h0: float = STEP_H0
    h_min: float = STEP_H_MIN
    h_max: float = STEP_H_MAX
    apriori_rounds: int = 4
    max_steps: int = 200_000


@dataclass(frozen=True)
class LohnerSet:
    center: np.ndarray
    basis: np.ndarray
    basis_inv: IntervalMatrix
    radius: IntervalVector
    box: IntervalVector

    @classmethod
    def from_box(cls, box: IntervalVector) -> "LohnerSet":
        center = box.mid()
        n = len(box)
        return cls(center, np.eye(n), IntervalMatrix.identity(n), box - center, box)


@dataclass(frozen=True)
class StepRecord:
    index: int
    tau: Interval
    h: float
    coarse_box: IntervalVector
    endpoint: IntervalVector
    t_elapsed: Interval


@dataclass(frozen=True)
class StepResult:
    h: float
    coarse_box: IntervalVector
    endpoint: IntervalVector
    lohner: LohnerSet
    dt: Interval
    h_next: float


@dataclass
class TrajectoryEnclosure:
    initial: IntervalVector
    steps: List[StepRecord] = field(default_factory=list)
    t_elapsed: Interval = field(default_factory=lambda: Interval(0.0))
    tau_end: float = 0.0

    @property
    def endpoint(self) -> IntervalVector:
        return self.steps[-1].endpoint if self.steps else self.initial


def _widen(box: IntervalVector, factor: float) -> IntervalVector:
    delta = factor * box.width() + 1e-15 * (1.0 + box.mag()) + 1e-300
    return IntervalVector(down_array(box.lo - delta), up_array(box.hi + delta))


def apriori_enclosure(g: DesingularizedField, X: IntervalVector, h: float, rounds: int = 4) -> Optional[IntervalVector]:
    """Y with X + [0, h] g(Y) inside int(Y); returns the tightened image or None."""

    span = Interval(0.0, h)
    Y = _widen(X + g.eval_g(X) * span, 0.1)
    for _ in range(rounds + 1):
        Z = X + g.eval_g(Y) * span
        if Z.interior_of(Y):
            return Z
        Y = _widen(Z.hull(Y), 0.2)
    return None


def accumulate_time(g: DesingularizedField, coarse_box: IntervalVector, h: float) -> Interval:
    """First-order bound dt/dtau(Y) h on the t-time elapsed over one step."""

    return g.dt_dtau(coarse_box) * Interval(h)


def _powers(h: float, count: int) -> List[Interval]:
    base = Interval(h)
    return [pow_int(base, k) for k in range(count)]


def _variational(dg_lo: np.ndarray, dg_hi: np.ndarray, n: int, order: int) -> List[IntervalMatrix]:
    """Taylor coefficients V_k of dx(tau)/dx0 from the Dg series, k < order."""

    D = [IntervalMatrix(dg_lo[:, l].reshape(n, n), dg_hi[:, l].reshape(n, n)) for l in range(order)]
    V = [IntervalMatrix.identity(n)]
    for k in range(order - 1):
        acc = D[0] @ V[k]
        for l in range(1, k + 1):
            acc = acc + D[l] @ V[k - l]
        V.append(acc * Interval.from_fraction(Fraction(1, k + 1)))
    return V


def step(
    g: DesingularizedField,
    state: Union[IntervalVector, LohnerSet],
    h_target: float,
    tol: Optional[float] = None,
    settings: Optional[IntegratorSettings] = None,
) -> StepResult:
    """One validated Taylor step of order p, shrinking h until the remainder fits tol."""

    settings = settings or IntegratorSettings()
    tol = settings.tol if tol is None else tol
    S = state if isinstance(state, LohnerSet) else LohnerSet.from_box(state)
    X = S.box
    n = len(X)
    p = settings.order
    tol_eff = tol * (1.0 + float(np.max(X.mag())))
    tape = g.taylor_tape

    h = min(h_target, settings.h_max)
    while True:
        if h < settings.h_min:
            raise StepUnderflowError(f"passo {h:.3e} abaixo de h_min={settings.h_min:.1e}")
        Y = apriori_enclosure(g, X, h, settings.apriori_rounds)
        if Y is None:
            logger.debug("a-priori enclosure failed at h=%.3e", h)
            h *= 0.5
            continue
        y_states, y_outputs = tape.ode_series(Y, p)
        hp = pow_int(Interval(h), p)
        remainder = y_states.coefficient(p) * hp
        r_width = float(np.max(remainder.width()))
        if r_width > tol_eff and h > 2.0 * settings.h_min:
            shrink = 0.9 * (tol_eff / r_width) ** (1.0 / p)
            h *= min(0.5, max(0.1, shrink))
            continue
        break

    powers = _powers(h, p + 2)
    c_states, _ = tape.ode_series(IntervalVector.point(S.center), p - 1)
    phi_c = IntervalVector.zeros(n)
    for k in range(p):
        phi_c = phi_c + c_states.coefficient(k) * powers[k]

    x_states, x_outputs = tape.ode_series(X, p - 1)
    dg = g.dg_tape.series(x_states)
    V = _variational(dg.lo, dg.hi, n, p)
    J = V[0]
    for k in range(1, p):
        J = J + V[k] * powers[k]

    z = phi_c + remainder
    center = z.mid()
    w = z - center
    A = J @ S.basis
    A_mid = A.mid()
    scores = np.linalg.norm(A_mid, axis=0) * np.maximum(S.radius.width(), 1e-300)
    perm = np.argsort(-scores, kind="stable")
    Q, _ = np.linalg.qr(A_mid[:, perm])
    try:
        Q_inv = verified_inverse(Q)
    except VerificationError:
        Q, Q_inv = np.eye(n), IntervalMatrix.identity(n)
    radius = (Q_inv @ A) @ S.radius + Q_inv @ w
    lohner_box = IntervalMatrix.point(Q) @ radius + center
    direct_box = phi_c + J @ (X - S.center) + remainder
    try:
        endpoint = lohner_box.intersect(direct_box)
    except IntervalDomainError:
        endpoint = direct_box

    q_row = n
    dt = Interval(0.0)
    for k in range(p):
        q_k = Interval(x_outputs.lo[q_row, k], x_outputs.hi[q_row, k])
        dt = dt + q_k * powers[k + 1] / (k + 1)
    q_p = Interval(y_outputs.lo[q_row, p], y_outputs.hi[q_row, p])
    dt = dt + q_p * powers[p + 1] / (p + 1)
    try:
        dt = dt.intersect(accumulate_time(g, Y, h))
    except IntervalDomainError:
        dt = accumulate_time(g, Y, h)

    if r_width > 0.0:
        growth = min(2.0, 0.9 * (tol_eff / r_width) ** (1.0 / p))
    else:
        growth = 2.0
    h_next = min(settings.h_max, h * max(growth, 0.1))
    lohner = LohnerSet(center, Q, Q_inv, radius, endpoint)
    return StepResult(h=h, coarse_box=Y, endpoint=endpoint, lohner=lohner, dt=dt, h_next=h_next)


StopPredicate = Callable[[IntervalVector], bool]


def integrate_until(
    g: DesingularizedField,
    x0: IntervalVector,
    stop: StopPredicate,
    tau_max: float,
    tol: Optional[float] = None,
    settings: Optional[IntegratorSettings] = None,
    on_step: Optional[Callable[[StepRecord], None]] = None,
) -> TrajectoryEnclosure:
    """Integrate until ``stop`` holds on the tight endpoint.

    Raises IntegrationLimitError when tau_max passes first and
    StepUnderflowError when a step cannot be validated.
    """

    settings = settings or IntegratorSettings()
    tol = settings.tol if tol is None else tol
    trajectory = TrajectoryEnclosure(initial=x0)
    if stop(x0):
        return trajectory
    state: Union[IntervalVector, LohnerSet] = x0
    h = settings.h0
    tau = 0.0
    for index in range(settings.max_steps):
        remaining = tau_max - tau
        if remaining <= 0.0 or remaining < settings.h_min:
            break
        result = step(g, state, min(h, settings.h_max, remaining), tol, settings)
        tau_next = tau + result.h
        trajectory.t_elapsed = trajectory.t_elapsed + result.dt
        record = StepRecord(
            index=index,
            tau=Interval(tau, max(tau, tau_next)),
            h=result.h,
            coarse_box=result.coarse_box,
            endpoint=result.endpoint,
            t_elapsed=trajectory.t_elapsed,
        )
        trajectory.steps.append(record)
        trajectory.tau_end = tau_next
        if on_step is not None:
            on_step(record)
        if index % 100 == 0:
            logger.debug(
                "step %d tau=%.6f h=%.3e width=%.3e",
                index, tau_next, result.h, float(np.max(result.endpoint.width())),
            )
        if stop(result.endpoint):
            logger.info("stop condition met at tau=%.12g after %d steps", tau_next, index + 1)
            return trajectory
        state = result.lohner
        h = result.h_next
        tau = tau_next
    raise IntegrationLimitError(f"condição de parada não atingida até tau_max={tau_max}")


__all__ = [
    "IntegratorSettings",
    "LohnerSet",
    "StepRecord",
    "StepResult",
    "TrajectoryEnclosure",
    "accumulate_time",
    "apriori_enclosure",
    "integrate_until",
    "step",
]
