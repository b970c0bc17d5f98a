"""Equilíbrios no horizonte e certificados de Lyapunov quadráticos.

L(x) = (x - x*)^T Y (x - x*) é centrada no equilíbrio exato; toda cota vale
para qualquer x* dentro do invólucro validado.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.integrate
import scipy.linalg

from app.config import COND_MAX, RADIUS0, RADIUS_REFINE, RADIUS_STEPS, SHOOT_TAU

from .common import VerificationError, get_logger
from .compact import QHType, p_power, p_power_float
from .field import DesingularizedField
from .interval import (
    Interval,
    IntervalMatrix,
    IntervalVector,
    down_array,
    fraction_bounds,
    interval_sum,
    krawczyk,
    pow_int,
    sym_eig_bounds,
    up_array,
    verify_negative_definite,
)

logger = get_logger(__name__)


@dataclass(frozen=True)
class LyapunovCert:
    x_star: IntervalVector
    Y: np.ndarray
    domain_radius: float
    domain: IntervalVector
    c_A: Interval
    lam_min_Y: Interval
    lam_max_Y: Interval
    c1: Interval
    c_tildeN: Interval
    eps: float

    @property
    def decay_rate(self) -> float:
        """Lower bound of c_tildeN c1 = c_A / lambda_max(Y)."""

        return (Interval(self.c_A.lo) / Interval(self.lam_max_Y.hi)).lo

    def value(self, box: IntervalVector) -> Interval:
        return lyapunov_value(self.Y, self.x_star, box)


def lyapunov_value(Y: np.ndarray, x_star: IntervalVector, box: IntervalVector) -> Interval:
    """Enclosure of L over ``box`` for every equilibrium in ``x_star``."""

    d = box - x_star
    n = len(d)
    terms: List[Interval] = []
    for i in range(n):
        terms.append(pow_int(d[i], 2) * float(Y[i, i]))
        for j in range(i + 1, n):
            if Y[i, j] != 0.0:
                terms.append(d[i] * d[j] * (2.0 * float(Y[i, j])))
    return interval_sum(terms)


# ---------------------------------------------------------------------------
# equilibria
# ---------------------------------------------------------------------------


def newton_refine(
    func: Callable[[np.ndarray], np.ndarray],
    jac: Callable[[np.ndarray], np.ndarray],
    x: Sequence[float],
    *,
    iterations: int = 60,
    tol: float = 1e-15,
) -> np.ndarray:
    x = np.array(x, dtype=float)
    for _ in range(iterations):
        try:
            delta = np.linalg.lstsq(jac(x), func(x), rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        x = x - delta
        if not np.all(np.isfinite(x)):
            raise VerificationError("iteração de Newton divergiu")
        if np.max(np.abs(delta)) <= tol * (1.0 + np.max(np.abs(x))):
            break
    return x


def _horizon_system(g: DesingularizedField):
    """Float residual and Jacobian whose zeros are equilibria on the horizon."""

    if g.chart is not None and not g.chart.is_para:
        sub = g.horizon_subsystem

        def func(x):
            return sub.g_float(x[1:])

        def jac(x):
            block = sub.Dg_float(x[1:])
            return np.hstack([np.zeros((block.shape[0], 1)), block])

        return func, jac, True

    t: Optional[QHType] = g.chart.qh_type if g.chart is not None else None

    def func_para(x):
        values = g.g_float(x)
        if t is None:
            return values
        return np.append(values, 1.0 - p_power_float(x, t))

    def jac_para(x):
        D = g.Dg_float(x)
        if t is None:
            return D
        grad = np.array([-2 * b * x[i] ** (2 * b - 1) for i, b in enumerate(t.beta)])
        return np.vstack([D, grad])

    return func_para, jac_para, False


def locate_equilibria(g: DesingularizedField, seeds: Sequence[Sequence[float]], *, tol: float = 1e-8) -> List[np.ndarray]:
    """Distinct horizon equilibria reached by Gauss-Newton from ``seeds``."""

    func, jac, directional = _horizon_system(g)
    found: List[np.ndarray] = []
    for seed in seeds:
        x = np.array(seed, dtype=float)
        if directional:
            x[0] = 0.0
        try:
            x = newton_refine(func, jac, x)
        except VerificationError:
            continue
        if directional:
            x[0] = 0.0
        if np.max(np.abs(func(x))) > 1e-10:
            continue
        if all(np.max(np.abs(x - other)) > tol for other in found):
            found.append(x)
    return found


def horizon_seeds(t: QHType, count: int = 64, seed: int = 0) -> List[np.ndarray]:
    """Random directions pushed onto the quasi-parabolic horizon p(x) = 1."""

    rng = np.random.default_rng(seed)
    seeds = []
    for _ in range(count):
        d = rng.standard_normal(t.n)
        p = p_power_float(d, t) ** (1.0 / (2 * t.c))
        seeds.append(np.array([d[i] / p ** t.alpha[i] for i in range(t.n)]))
    return seeds


def shoot_equilibrium(g: DesingularizedField, x0: Sequence[float], tau_max: float = SHOOT_TAU) -> np.ndarray:
    """Non-rigorous forward shooting to the attracting equilibrium, then Newton."""

    def rhs(_tau, x):
        return g.g_float(x)

    def settled(_tau, x):
        return float(np.linalg.norm(g.g_float(x))) - 1e-9

    settled.terminal = True
    settled.direction = -1
    sol = scipy.integrate.solve_ivp(rhs, (0.0, tau_max), np.asarray(x0, dtype=float), method="DOP853", rtol=1e-10, atol=1e-12, events=settled)
    end = sol.y[:, -1]
    logger.debug("shooting stopped at tau=%.3f, |g|=%.3e", sol.t[-1], float(np.linalg.norm(g.g_float(end))))
    func, jac, directional = _horizon_system(g)
    if directional:
        end = end.copy()
        end[0] = 0.0
    return newton_refine(func, jac, end)


def classify_equilibrium(g: DesingularizedField, x: Sequence[float]) -> str:
    eigenvalues = np.linalg.eigvals(g.Dg_float(np.asarray(x, dtype=float)))
    real = eigenvalues.real
    if np.all(real < 0):
        return "sink"
    if np.all(real > 0):
        return "source"
    if np.any(real < 0) and np.any(real > 0) and not np.any(real == 0):
        return "saddle"
    return "nonhyperbolic"


def validate_equilibrium(g: DesingularizedField, x_approx: Sequence[float], *, on_horizon: bool = True) -> IntervalVector:
    """Krawczyk-verified enclosure of the unique zero of g near ``x_approx``.

    Directional equilibria are validated on the invariant set {s = 0}, so the
    s-component of the enclosure is exactly zero.
    """

    x_approx = np.asarray(x_approx, dtype=float)
    if g.chart is not None and not g.chart.is_para:
        sub = g.horizon_subsystem
        inner = krawczyk(sub.g_point, sub.eval_Dg, x_approx[1:])
        x_star = IntervalVector.zeros(1).concat(inner)
    else:
        x_star = krawczyk(g.g_point, g.eval_Dg, x_approx)
        if on_horizon and g.chart is not None and not p_power(x_star, g.chart.qh_type).contains(1.0):
            raise VerificationError(f"equilíbrio validado fora do horizonte: p^2c = {p_power(x_star, g.chart.qh_type)}")
    logger.info("equilibrium validated, max radius %.3e", float(np.max(x_star.rad())))
    return x_star


# ---------------------------------------------------------------------------
# Lyapunov construction
# ---------------------------------------------------------------------------


def build_Y(J: np.ndarray, cond_max: float = COND_MAX) -> np.ndarray:
    """Y = Re(X^-H X^-1) from the eigenvectors of J.

    When the eigenvector matrix is ill conditioned the spectrum is read from the
    real Schur form of J and Y = I is used, as long as J^T + J is negative
    definite; otherwise Y solves J^T Y + Y J = -I.
    """

    J = np.asarray(J, dtype=float)
    eigenvalues, X = np.linalg.eig(J)
    if np.any(eigenvalues.real >= 0.0):
        raise VerificationError(f"espectro não estável: {eigenvalues}")
    cond = np.linalg.cond(X)
    if np.isfinite(cond) and cond <= cond_max:
        X_inv = np.linalg.inv(X)
        Y = (X_inv.conj().T @ X_inv).real
        return 0.5 * (Y + Y.T)

    logger.debug("eigenvector matrix ill conditioned (cond=%.3e), using the real Schur form", cond)
    T, _ = scipy.linalg.schur(J, output="real")
    if np.any(np.linalg.eigvals(T).real >= 0.0):
        raise VerificationError("espectro não estável na forma de Schur")
    identity = np.eye(J.shape[0])
    if np.linalg.eigvalsh(J.T + J).max() < 0.0:
        return identity
    logger.debug("Y = I is not a Lyapunov matrix for J, solving the Lyapunov equation")
    Y = scipy.linalg.solve_continuous_lyapunov(J.T, -identity)
    return 0.5 * (Y + Y.T)


def _box_around(center: np.ndarray, radius: float) -> IntervalVector:
    return IntervalVector(down_array(center - radius), up_array(center + radius))


def _certify_radius(g: DesingularizedField, center: np.ndarray, radius: float, Y_iv: IntervalMatrix) -> Optional[Interval]:
    box = _box_around(center, radius)
    D = g.eval_Dg(box)
    A = D.T @ Y_iv + Y_iv @ D
    verified, c_A = verify_negative_definite(A)
    return c_A if verified else None


def radius_schedule(r0: float = RADIUS0, steps: int = RADIUS_STEPS) -> List[float]:
    return [r0 * 2.0 ** (-m) for m in range(steps)]


def certify_domain(
    g: DesingularizedField,
    x_star: IntervalVector,
    Y: np.ndarray,
    radius_schedule_values: Optional[Sequence[float]] = None,
    *,
    refine: int = RADIUS_REFINE,
) -> LyapunovCert:
    """Largest box mid(x*) +/- r on which Dg^T Y + Y Dg is verified negative definite."""

    Y = np.asarray(Y, dtype=float)
    Y_iv = IntervalMatrix.point(Y)
    lam_min_Y, lam_max_Y = sym_eig_bounds(Y_iv)
    if lam_min_Y.lo <= 0.0:
        raise VerificationError("Y não é positiva definida")
    center = x_star.mid()
    slack = float(np.max(x_star.rad()))
    schedule = list(radius_schedule_values) if radius_schedule_values is not None else radius_schedule()

    passing: Optional[float] = None
    failing: Optional[float] = None
    c_A: Optional[Interval] = None
    for radius in schedule:
        if radius <= slack:
            break
        result = _certify_radius(g, center, radius, Y_iv)
        if result is not None:
            passing, c_A = radius, result
            break
        failing = radius
        logger.debug("radius %.3e rejected", radius)
    if passing is None or c_A is None:
        raise VerificationError("nenhum raio do cronograma certificou a definição negativa")
    if failing is not None:
        lo, hi = passing, failing
        for _ in range(refine):
            trial = 0.5 * (lo + hi)
            result = _certify_radius(g, center, trial, Y_iv)
            if result is not None:
                lo, c_A = trial, result
            else:
                hi = trial
        passing = lo

    # largest float not above lam_min(Y) (r - rad x*)^2
    margin = Fraction(passing) - Fraction(slack)
    eps = fraction_bounds(Fraction(lam_min_Y.lo) * margin * margin)[0]
    c1 = Interval(1.0) / lam_min_Y
    c_tildeN = c_A * lam_min_Y / lam_max_Y
    logger.info("domain certified: radius=%.6e eps=%.6e", passing, eps)
    return LyapunovCert(
        x_star=x_star,
        Y=Y,
        domain_radius=passing,
        domain=_box_around(center, passing),
        c_A=c_A,
        lam_min_Y=lam_min_Y,
        lam_max_Y=lam_max_Y,
        c1=c1,
        c_tildeN=c_tildeN,
        eps=eps,
    )


__all__ = [
    "LyapunovCert",
    "build_Y",
    "certify_domain",
    "classify_equilibrium",
    "horizon_seeds",
    "locate_equilibria",
    "lyapunov_value",
    "newton_refine",
    "radius_schedule",
    "shoot_equilibrium",
    "validate_equilibrium",
]
