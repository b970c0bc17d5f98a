"""Sistemas de Keyfitz-Kranzer (perfis de onda viajante).

kk-simple: u' = u^2 - v, v' = u^3 / 3, a parte quase-homogênea de kk.
kk:        u' = u^2 - v - s u - c1, v' = u^3 / 3 - u - s v - c2,
com a velocidade do choque s e as constantes de integração c1, c2 como
parâmetros intervalares. Ambos têm tipo (1, 2) e ordem k + 1 = 2.
"""

from __future__ import annotations

from typing import Optional

import sympy as sp

from ..common import ConfigurationError, get_logger
from ..compact import make_type
from ..field import VectorFieldModel
from ..interval import Interval
from .common import IntervalLike, ParameterSpec, ProblemSpec, ReferenceRow, as_interval

logger = get_logger(__name__)

KK_TYPE = make_type((1, 2), 1)

# Validated horizon sink of the parabolic chart, shared by both variants.
KK_EQUILIBRIUM = (0.98913699589497750, 0.20675855700518063)

DEFAULT_SHOCK_SPEED = ("0.44819467507505461", "0.44819467507505512")
DEFAULT_C1 = ("1.2577944204614435", "1.2577944204614451")
DEFAULT_C2 = ("-0.52072797534176075", "-0.52072797534175985")
DEFAULT_U_L = "1.46777062491"
DEFAULT_V_L = "0.238709208571"

KK_SIMPLE_PARAMETERS = ()

KK_PARAMETERS = (
    ParameterSpec("s", "interval", DEFAULT_SHOCK_SPEED, "velocidade do choque"),
    ParameterSpec("c1", "interval", DEFAULT_C1, "constante de integração da equação de u"),
    ParameterSpec("c2", "interval", DEFAULT_C2, "constante de integração da equação de v"),
    ParameterSpec("u_L", "float", DEFAULT_U_L, "estado à esquerda; informado com v_L, recalcula c1 e c2"),
    ParameterSpec("v_L", "float", DEFAULT_V_L, "estado à esquerda"),
    ParameterSpec("u_R", "float", None, "estado à direita (informativo)"),
    ParameterSpec("v_R", "float", None, "estado à direita (informativo)"),
)

_u, _v = sp.symbols("u v")
# "s" is reserved for the directional chart coordinate.
_SHOCK, _C1, _C2 = sp.symbols("shock_s c_1 c_2")

KK_SIMPLE_REFERENCE = (
    ReferenceRow(
        label="kk-simple near-horizon start",
        chart="para",
        x0=(-0.1, 0.0001),
        eps=5.6700023252180213e-5,
        tau_N=343.579,
        t_max=("84.083706663650346", "84.083853417007874"),
        width_max=1e-2,
        provenance="published run, kk-simple, first initial point",
    ),
    ReferenceRow(
        label="kk-simple second start",
        chart="para",
        x0=(-0.1, -0.1),
        eps=5.6700023252180213e-5,
        t_max=("6.2010761835235443", "6.2012442938861261"),
        width_max=1e-2,
        provenance="published run, kk-simple, second initial point",
    ),
)

KK_REFERENCE = (
    ReferenceRow(
        label="kk full system",
        chart="para",
        x0=(-0.1, -0.8),
        t_max=("0.944239514010626", "0.94469739415956034"),
        width_max=5e-3,
        provenance="published run, kk with shock parameters",
    ),
)


def make_kk_simple() -> ProblemSpec:
    model = VectorFieldModel(
        variables=(_u, _v),
        rhs=(_u**2 - _v, sp.Rational(1, 3) * _u**3),
        qh_type=KK_TYPE,
    )
    return ProblemSpec(
        id="kk-simple",
        model=model,
        parameters={},
        default_chart_label="para",
        default_x0=(-0.1, 0.0001),
        seeds={"para": KK_EQUILIBRIUM},
        reference_data=KK_SIMPLE_REFERENCE,
    )


def _constants_from_left_state(u_L: Interval, v_L: Interval, shock: Interval):
    c1 = u_L.sqr() - v_L - shock * u_L
    c2 = u_L * u_L * u_L / 3 - u_L - shock * v_L
    return c1, c2


def make_kk(
    u_L: Optional[IntervalLike] = None,
    v_L: Optional[IntervalLike] = None,
    u_R: Optional[IntervalLike] = None,
    v_R: Optional[IntervalLike] = None,
    s: Optional[IntervalLike] = None,
    c1: Optional[IntervalLike] = None,
    c2: Optional[IntervalLike] = None,
) -> ProblemSpec:
    """Full system; c1, c2 default to the shipped enclosures unless a left state is given."""

    shock = as_interval(s if s is not None else DEFAULT_SHOCK_SPEED, "s")
    if (u_L is None) != (v_L is None):
        raise ConfigurationError("u_L e v_L devem ser informados juntos")
    if u_L is not None and (c1 is None or c2 is None):
        derived = _constants_from_left_state(as_interval(u_L, "u_L"), as_interval(v_L, "v_L"), shock)
        c1 = derived[0] if c1 is None else c1
        c2 = derived[1] if c2 is None else c2
        logger.debug("c1=%s c2=%s derived from the left state", c1, c2)
    c1_iv = as_interval(c1 if c1 is not None else DEFAULT_C1, "c1")
    c2_iv = as_interval(c2 if c2 is not None else DEFAULT_C2, "c2")
    for name, value in (("u_R", u_R), ("v_R", v_R)):
        if value is not None:
            as_interval(value, name)

    model = VectorFieldModel(
        variables=(_u, _v),
        rhs=(
            _u**2 - _v - _SHOCK * _u - _C1,
            sp.Rational(1, 3) * _u**3 - _u - _SHOCK * _v - _C2,
        ),
        qh_type=KK_TYPE,
        parameters={_SHOCK: shock, _C1: c1_iv, _C2: c2_iv},
    )
    display = {"s": [shock.lo, shock.hi], "c1": [c1_iv.lo, c1_iv.hi], "c2": [c2_iv.lo, c2_iv.hi]}
    if u_L is None and c1 is None and c2 is None:
        # left state behind the shipped c1, c2
        display["u_L"], display["v_L"] = DEFAULT_U_L, DEFAULT_V_L
    for name, value in (("u_L", u_L), ("v_L", v_L), ("u_R", u_R), ("v_R", v_R)):
        if value is not None:
            display[name] = str(value)
    return ProblemSpec(
        id="kk",
        model=model,
        parameters=display,
        default_chart_label="para",
        default_x0=(-0.1, -0.8),
        seeds={"para": KK_EQUILIBRIUM},
        reference_data=KK_REFERENCE,
    )


__all__ = [
    "DEFAULT_U_L",
    "DEFAULT_V_L",
    "KK_EQUILIBRIUM",
    "KK_PARAMETERS",
    "KK_SIMPLE_PARAMETERS",
    "KK_TYPE",
    "make_kk",
    "make_kk_simple",
]
