"""Semi-discretização de volumes finitos do sistema de Keller-Segel radial.

Incógnitas u_1..u_N (densidade, peso 2) e v_1..v_N (químico, peso 1) em
células de largura h = L / N, com faces r_{i+1/2} = i h e pontos de controle
r_i = (i - 1/2) h. Os fluxos se anulam nas duas faces de fronteira; o fluxo
quimiotático usa upwind com u_i. O sistema tem tipo (2,...,2, 1,...,1) e
ordem k + 1 = 2.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import List, Optional, Sequence, Union

import numpy as np
import sympy as sp

from ..common import BlowupError, ConfigurationError, get_logger
from ..compact import CompactChart, chart_forward, horizon_point_from_direction, make_type
from ..field import VectorFieldModel, desingularize
from ..interval import IntervalVector
from ..lyapunov import shoot_equilibrium
from .common import ParameterSpec, ProblemSpec, ReferenceRow, exact_rational

logger = get_logger(__name__)

FVKS_PARAMETERS = (
    ParameterSpec("d", "int", 4, "dimensão espacial (d >= 1)"),
    ParameterSpec("N", "int", 4, "número de células (N >= 2)"),
    ParameterSpec("L", "float", 1, "raio do domínio"),
    ParameterSpec("amplitude", "float", 100, "amplitude do dado inicial de u"),
)

_DIRECTIONAL_REFERENCE = {
    (4, 4): ReferenceRow(
        label="fvks d=4 N=4",
        chart="dir:1:+",
        eps=7.7787964060071189e-7,
        tau_N=2.2660030304331925,
        t_max=("0.041634995298971515", "0.041635093439395401"),
        width_max=1e-3,
        provenance="published run, fvks directional chart",
    ),
    (3, 4): ReferenceRow(
        label="fvks d=3 N=4",
        chart="dir:1:+",
        t_max=("0.04401634379731982", "0.044016564692126309"),
        width_max=1e-3,
        provenance="published run, fvks directional chart",
    ),
    (2, 4): ReferenceRow(
        label="fvks d=2 N=4",
        chart="dir:1:+",
        t_max=("0.052637126736797233", "0.052639096803538601"),
        width_max=1e-3,
        provenance="published run, fvks directional chart",
    ),
    (3, 11): ReferenceRow(
        label="fvks d=3 N=11",
        chart="dir:1:+",
        t_max=("0.040731730763463577", "0.040731730868847683"),
        width_max=1e-3,
        provenance="published run, fvks directional chart",
    ),
    (4, 12): ReferenceRow(
        label="fvks d=4 N=12",
        chart="dir:1:+",
        status="failed",
        provenance="published run, fvks directional chart, validation not achieved",
    ),
}

_PARA_REFERENCE = {
    (4, 4): ReferenceRow(
        label="fvks d=4 N=4 parabolic",
        chart="para",
        t_max=("0.041635002136609429", "0.041635154750508511"),
        width_max=1e-3,
        provenance="published run, fvks parabolic chart",
    ),
}


def _rational(value: Fraction) -> sp.Rational:
    return sp.Rational(value.numerator, value.denominator)


def fvks_rhs(d: int, N: int, L: Fraction, u: Sequence[sp.Symbol], v: Sequence[sp.Symbol]) -> List[sp.Expr]:
    """Right-hand side in the order (u_1..u_N, v_1..v_N) with exact rational coefficients."""

    h = L / N
    face = [i * h for i in range(N + 1)]
    point = [(i - Fraction(1, 2)) * h for i in range(1, N + 1)]

    def flux_u(j: int) -> sp.Expr:
        # face j lies between the 0-based cells j - 1 and j
        if j == 0 or j == N:
            return sp.Integer(0)
        weight = _rational(face[j] ** (d - 1))
        return weight * ((u[j] - u[j - 1]) - (v[j] - v[j - 1]) * u[j - 1])

    def flux_v(j: int) -> sp.Expr:
        if j == 0 or j == N:
            return sp.Integer(0)
        weight = _rational(face[j] ** (d - 1))
        return weight * (v[j] - v[j - 1])

    du: List[sp.Expr] = []
    dv: List[sp.Expr] = []
    for i in range(N):
        scale = _rational(point[i] ** (1 - d) / (h * h))
        du.append(sp.expand(scale * (flux_u(i + 1) - flux_u(i))))
        dv.append(sp.expand(scale * (flux_v(i + 1) - flux_v(i)) - v[i] + u[i]))
    return du + dv


def fvks_initial_data(N: int, L: Fraction, amplitude: float) -> tuple:
    h = float(L) / N
    u0 = [amplitude * (1.0 + math.cos(math.pi * (i - 0.5) * h)) for i in range(1, N + 1)]
    return tuple(u0) + (0.0,) * N


def _seed_through_direction(problem: ProblemSpec, chart: CompactChart, y0: Optional[Sequence[float]]) -> Optional[np.ndarray]:
    """Parabolic seeds come from the directional sink along the first density axis."""

    if not chart.is_para:
        return None
    y = np.asarray(problem.initial_data() if y0 is None else y0, dtype=float)
    if y[0] <= 0.0:
        return None
    directional = CompactChart.directional(chart.qh_type, 1, 1)
    g_dir = desingularize(problem.model, directional)
    try:
        start = chart_forward(IntervalVector.point(y), directional).mid()
        x_dir = shoot_equilibrium(g_dir, start)
    except (BlowupError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.warning("directional shooting for a parabolic seed failed: %s", exc)
        return None
    return horizon_point_from_direction(directional, x_dir[1:])


def make_fvks(d: int = 4, N: int = 4, L: Union[int, float, str, Fraction] = 1, amplitude: float = 100.0) -> ProblemSpec:
    d, N = int(d), int(N)
    if d < 1:
        raise ConfigurationError(f"d deve ser >= 1: {d}")
    if N < 2:
        raise ConfigurationError(f"N deve ser >= 2: {N}")
    L_exact = exact_rational(L, "L")
    if L_exact <= 0:
        raise ConfigurationError(f"L deve ser positivo: {L}")
    amplitude = float(amplitude)
    if not math.isfinite(amplitude) or amplitude <= 0.0:
        raise ConfigurationError(f"amplitude deve ser positiva e finita: {amplitude}")

    u = sp.symbols(f"u1:{N + 1}")
    v = sp.symbols(f"v1:{N + 1}")
    model = VectorFieldModel(
        variables=tuple(u) + tuple(v),
        rhs=tuple(fvks_rhs(d, N, L_exact, u, v)),
        qh_type=make_type((2,) * N + (1,) * N, 1),
    )
    references = tuple(
        row for row in (_DIRECTIONAL_REFERENCE.get((d, N)), _PARA_REFERENCE.get((d, N))) if row is not None
    )
    if L_exact != 1 or amplitude != 100.0:
        references = ()
    logger.debug("fvks d=%d N=%d assembled", d, N)
    return ProblemSpec(
        id="fvks",
        model=model,
        parameters={"d": d, "N": N, "L": str(L_exact), "amplitude": amplitude},
        default_chart_label="dir:1:+",
        default_y0=fvks_initial_data(N, L_exact, amplitude),
        reference_data=references,
        seed_finder=_seed_through_direction,
    )


__all__ = ["FVKS_PARAMETERS", "fvks_initial_data", "fvks_rhs", "make_fvks"]
