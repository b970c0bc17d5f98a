"""Invólucros do tempo de blow-up.

``validate_blowup`` executa o pipeline em estágios: transformação inicial,
validação do equilíbrio, certificação do domínio de Lyapunov, integração
rigorosa até o conjunto de subnível e, por fim, a cota da cauda. Falhas
matemáticas viram um certificado ``failed`` com o nome do estágio.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import comb
from typing import TYPE_CHECKING, Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.integrate

from app.config import INTEGRATOR_TOL, STEP_H0, STEP_H_MAX, STEP_H_MIN, TAU_MAX, TAYLOR_ORDER

from .common import BlowupError, ConfigurationError, VerificationError, get_logger
from .compact import CompactChart, QHType, chart_forward, p_power_float
from .field import DesingularizedField, desingularize
from .integrate import IntegratorSettings, StepRecord, integrate_until
from .interval import Interval, IntervalVector, add_hi, pow_int
from .lyapunov import (
    LyapunovCert,
    build_Y,
    certify_domain,
    classify_equilibrium,
    shoot_equilibrium,
    validate_equilibrium,
)

if TYPE_CHECKING:
    from .problems.common import ProblemSpec

logger = get_logger(__name__)

STAGES = (
    "initial-transform",
    "equilibrium-validation",
    "domain-certification",
    "integration",
    "tail-bound",
)


# ---------------------------------------------------------------------------
# tail bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundCoefficients:
    """v_j with (v_j)_i = C(2 beta_i, j) (x*_i)^{2 beta_i - j}; a_1 = |v_1|_2, a_j = |v_j|_inf."""

    vectors: Tuple[IntervalVector, ...]
    norms: Tuple[Interval, ...]

    @property
    def upper(self) -> Tuple[float, ...]:
        return tuple(a.hi for a in self.norms)


def bound_coefficients(x_star: IntervalVector, t: QHType) -> BoundCoefficients:
    top = max(2 * b for b in t.beta)
    vectors = []
    norms = []
    for j in range(1, top + 1):
        entries = []
        for i in range(t.n):
            e = 2 * t.beta[i]
            if j <= e:
                entries.append(pow_int(x_star[i], e - j) * comb(e, j))
            else:
                entries.append(Interval(0.0))
        v = IntervalVector.from_intervals(entries)
        vectors.append(v)
        norms.append(v.norm2() if j == 1 else v.norm_inf())
    return BoundCoefficients(tuple(vectors), tuple(norms))


def c_bound(L: Interval, coeffs: BoundCoefficients, c1: Interval) -> Interval:
    """|1 - p(x)^{2c}| <= sum_j a_j (c1 L)^{j/2}."""

    L = Interval.coerce(L)
    if L.lo < 0.0:
        raise ConfigurationError(f"L deve ser não negativo: {L}")
    z = (Interval.coerce(c1) * L).sqrt()
    total = Interval(0.0)
    for j, a in enumerate(coeffs.norms, start=1):
        total = total + Interval(a.hi) * pow_int(z, j)
    return total


def _poly_power(coefficients: Sequence[Interval], k: int) -> List[Interval]:
    """Coefficients (index = power of z) of (sum_j a_j z^j)^k."""

    base = [Interval(0.0)] + list(coefficients)
    result = [Interval(1.0)]
    for _ in range(k):
        product = [Interval(0.0)] * (len(result) + len(base) - 1)
        for i, r in enumerate(result):
            for j, b in enumerate(base):
                if b.hi != 0.0 or b.lo != 0.0:
                    product[i + j] = product[i + j] + r * b
        result = product
    return result


def _check_order(k: int) -> None:
    if k < 1:
        raise ConfigurationError(f"ordem k={k} fora do escopo (precisa de k >= 1)")


def tmax_tail_para(cert: LyapunovCert, k: int, coeffs: BoundCoefficients, eps: Optional[float] = None) -> Interval:
    """(1 / (c_tildeN c1)) int_0^eps C(L)^k / L dL, term by term.

    With C(L)^k = sum_q b_q (c1 L)^{q/2} each term integrates to
    b_q c1^{q/2} (2/q) eps^{q/2}.
    """

    _check_order(k)
    eps = cert.eps if eps is None else eps
    if eps <= 0.0:
        return Interval(0.0)
    b = _poly_power([Interval(a) for a in coeffs.upper], k)
    root = Interval(cert.c1.hi).sqrt() * Interval(eps).sqrt()
    total = Interval(0.0)
    for q, b_q in enumerate(b):
        if q == 0 or b_q.hi == 0.0:
            continue
        total = total + b_q * pow_int(root, q) * 2 / q
    return total / Interval(cert.decay_rate)


def tmax_tail_dir(cert: LyapunovCert, k: int, eps: Optional[float] = None) -> Interval:
    """(1 / (c_tildeN c1)) int_0^eps (c1 L)^{k/2} / L dL = (2/k) c1^{k/2} eps^{k/2} / (c_tildeN c1)."""

    _check_order(k)
    eps = cert.eps if eps is None else eps
    if eps <= 0.0:
        return Interval(0.0)
    root = Interval(cert.c1.hi).sqrt() * Interval(eps).sqrt()
    return pow_int(root, k) * 2 / k / Interval(cert.decay_rate)


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationOptions:
    tol: float = INTEGRATOR_TOL
    tau_max: float = TAU_MAX
    order: int = TAYLOR_ORDER
    h0: float = STEP_H0
    h_min: float = STEP_H_MIN
    h_max: float = STEP_H_MAX
    eps_override: Optional[float] = None
    equilibrium_seed: Optional[Tuple[float, ...]] = None
    radius_schedule: Optional[Tuple[float, ...]] = None
    y_scale: float = 1.0

    def settings(self) -> IntegratorSettings:
        return IntegratorSettings(order=self.order, tol=self.tol, h0=self.h0, h_min=self.h_min, h_max=self.h_max)


@dataclass
class BlowUpCertificate:
    problem_id: str
    chart: CompactChart
    status: str = "failed"
    failed_stage: Optional[str] = None
    message: str = ""
    y0: Optional[Tuple[float, ...]] = None
    x0: Optional[IntervalVector] = None
    cert: Optional[LyapunovCert] = None
    classification: Optional[str] = None
    tau_N: Optional[float] = None
    t_N: Optional[Interval] = None
    L_end: Optional[float] = None
    tail_bound: Optional[Interval] = None
    t_max: Optional[Interval] = None
    steps: int = 0
    wall_time: float = 0.0
    parameters: dict = field(default_factory=dict)

    @property
    def succeeded(self) -> bool:
        return self.status == "succeeded"


class _StageFailure(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(message)
        self.stage = stage


def _run_stage(stage: str, action: Callable):
    try:
        return action()
    except (BlowupError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise _StageFailure(stage, f"{type(exc).__name__}: {exc}") from exc


def horizon_witness(g: DesingularizedField, cert: LyapunovCert) -> bool:
    """Prove the equilibrium in N lies on the horizon {p = 1}.

    An exact horizon point z is enclosed by solving p(z) = 1 for the
    best-conditioned coordinate; if L(z) < eps its trajectory stays on the
    invariant horizon inside N and converges to the unique equilibrium of N.
    """

    t = g.chart.qh_type
    m = cert.x_star.mid()
    scale = p_power_float(m, t) ** (1.0 / (2 * t.c))
    z = np.array([m[i] / scale ** t.alpha[i] for i in range(t.n)])
    lever = [abs(2 * t.beta[i] * z[i] ** (2 * t.beta[i] - 1)) for i in range(t.n)]
    l = int(np.argmax(lever))
    rest = Interval(0.0)
    for j in range(t.n):
        if j != l:
            rest = rest + pow_int(Interval(z[j]), 2 * t.beta[j])
    remaining = 1 - rest
    if remaining.lo <= 0.0:
        return False
    root = remaining.root(2 * t.beta[l])
    z_l = root if z[l] >= 0.0 else -root
    box = IntervalVector.point(z).with_entry(l, z_l)
    return cert.value(box).hi < cert.eps


def _initial_state(problem: "ProblemSpec", chart: CompactChart, y0, x0) -> Tuple[IntervalVector, Optional[Tuple[float, ...]]]:
    if x0 is None and y0 is None and chart.is_para and problem.default_x0 is not None:
        x0 = problem.default_x0
    if x0 is not None:
        x = np.asarray(x0, dtype=float)
        if x.shape != (chart.dim,):
            raise ConfigurationError(f"x0 com dimensão {x.shape}, esperado {chart.dim}")
        return IntervalVector.point(x), None
    y = problem.initial_data() if y0 is None else y0
    y = tuple(float(v) for v in y)
    if len(y) != chart.dim:
        raise ConfigurationError(f"y0 com dimensão {len(y)}, esperado {chart.dim}")
    return chart_forward(IntervalVector.point(np.array(y)), chart), y


def validate_blowup(
    problem: "ProblemSpec",
    chart: CompactChart,
    y0: Optional[Sequence[float]] = None,
    *,
    x0: Optional[Sequence[float]] = None,
    options: Optional[ValidationOptions] = None,
    on_step: Optional[Callable[[StepRecord], None]] = None,
) -> BlowUpCertificate:
    """Validate a blow-up solution and enclose its blow-up time."""

    options = options or ValidationOptions()
    started = time.perf_counter()
    result = BlowUpCertificate(problem_id=problem.id, chart=chart, parameters=dict(problem.parameters))
    model = problem.model
    if chart.qh_type != model.qh_type:
        raise ConfigurationError("a carta não usa o tipo quase-homogêneo do problema")
    try:
        g = desingularize(model, chart)

        x_init, y_used = _run_stage("initial-transform", lambda: _initial_state(problem, chart, y0, x0))
        result.x0, result.y0 = x_init, y_used
        logger.info("%s on %s: initial state %s", problem.id, chart.label, x_init)

        def find_equilibrium() -> IntervalVector:
            seed = options.equilibrium_seed
            if seed is None:
                seed = problem.equilibrium_seed(chart, y_used)
            if seed is None:
                seed = shoot_equilibrium(g, x_init.mid())
            return validate_equilibrium(g, seed)

        x_star = _run_stage("equilibrium-validation", find_equilibrium)
        result.classification = classify_equilibrium(g, x_star.mid())

        def certify() -> LyapunovCert:
            Y = build_Y(g.Dg_float(x_star.mid())) * options.y_scale
            return certify_domain(g, x_star, Y, options.radius_schedule)

        cert = _run_stage("domain-certification", certify)
        result.cert = cert

        if chart.is_para:

            def witness() -> None:
                if not horizon_witness(g, cert):
                    raise VerificationError("testemunha do horizonte fora do conjunto de subnível")

            _run_stage("equilibrium-validation", witness)

        threshold = cert.eps if options.eps_override is None else min(cert.eps, options.eps_override)

        def stop(box: IntervalVector) -> bool:
            return cert.value(box).hi < threshold

        trajectory = _run_stage(
            "integration",
            lambda: integrate_until(g, x_init, stop, options.tau_max, options.tol, options.settings(), on_step),
        )
        result.tau_N = trajectory.tau_end
        result.t_N = trajectory.t_elapsed
        result.steps = len(trajectory.steps)

        def tail() -> Interval:
            L_end = cert.value(trajectory.endpoint).hi
            result.L_end = L_end
            eps_eff = min(threshold, L_end)
            k = chart.qh_type.order_k
            if chart.is_para:
                return tmax_tail_para(cert, k, bound_coefficients(cert.x_star, chart.qh_type), eps_eff)
            return tmax_tail_dir(cert, k, eps_eff)

        result.tail_bound = _run_stage("tail-bound", tail)
        result.t_max = Interval(result.t_N.lo, add_hi(result.t_N.hi, result.tail_bound.hi))
        result.status = "succeeded"
        logger.info("%s on %s: t_max in %s", problem.id, chart.label, result.t_max)
    except _StageFailure as failure:
        result.status = "failed"
        result.failed_stage = failure.stage
        result.message = str(failure)
        logger.warning("%s on %s failed at %s: %s", problem.id, chart.label, failure.stage, failure)
    result.wall_time = time.perf_counter() - started
    return result


def estimate_blowup_time(problem: "ProblemSpec", y0: Sequence[float], threshold: float = 1e8, t_max: float = 1e3) -> Optional[float]:
    """Non-rigorous float integration of f until p(y) exceeds ``threshold``."""

    t = problem.model.qh_type
    model = problem.model

    def rhs(_t, y):
        return model.f_float(y)

    def escaped(_t, y):
        return p_power_float(y, t) ** (1.0 / (2 * t.c)) - threshold

    escaped.terminal = True
    escaped.direction = 1
    sol = scipy.integrate.solve_ivp(rhs, (0.0, t_max), np.asarray(y0, dtype=float), method="DOP853", rtol=1e-12, atol=1e-12, events=escaped)
    if sol.t_events[0].size:
        return float(sol.t_events[0][0])
    return None


__all__ = [
    "STAGES",
    "BlowUpCertificate",
    "BoundCoefficients",
    "ValidationOptions",
    "bound_coefficients",
    "c_bound",
    "estimate_blowup_time",
    "horizon_witness",
    "tmax_tail_dir",
    "tmax_tail_para",
    "validate_blowup",
]
