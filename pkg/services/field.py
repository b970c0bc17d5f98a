"""Campos vetoriais polinomiais e suas versões dessingularizadas.

Tudo é montado simbolicamente com sympy e compilado em programas
``PolynomialTape``: as jacobianas são derivadas exatas e os coeficientes
racionais seguem exatos até a avaliação intervalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .common import ConfigurationError, VerificationError, get_logger
from .compact import CompactChart, QHType, p_power
from .interval import Interval, IntervalMatrix, IntervalVector, pow_int
from .tape import PolynomialTape

logger = get_logger(__name__)

KAPPA_INV = sp.Symbol("w")


def _check_polynomial(expr: sp.Expr, gens: Sequence[sp.Symbol], what: str) -> sp.Expr:
    try:
        sp.Poly(expr, *gens)
    except sp.PolynomialError as exc:
        raise ConfigurationError(f"{what} não é polinomial em {tuple(gens)}: {expr}") from exc
    return expr


@dataclass(frozen=True, eq=False)
class VectorFieldModel:
    """Polynomial ODE dy/dt = f(y) with a declared quasi-homogeneous type."""

    variables: Tuple[sp.Symbol, ...]
    rhs: Tuple[sp.Expr, ...]
    qh_type: QHType
    parameters: Mapping[sp.Symbol, Interval] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.variables) != len(self.rhs) or len(self.rhs) != self.qh_type.n:
            raise ConfigurationError(
                f"dimensões incompatíveis: {len(self.variables)} variáveis, "
                f"{len(self.rhs)} componentes, tipo de dimensão {self.qh_type.n}"
            )

    @property
    def n(self) -> int:
        return len(self.variables)

    @cached_property
    def compact_symbols(self) -> Tuple[sp.Symbol, ...]:
        return tuple(sp.symbols(f"x1:{self.n + 1}"))

    @cached_property
    def f_tape(self) -> PolynomialTape:
        return PolynomialTape(self.rhs, self.variables, self.parameters)

    @cached_property
    def df_tape(self) -> PolynomialTape:
        return PolynomialTape.from_matrix(sp.Matrix(self.rhs).jacobian(self.variables), self.variables, self.parameters)

    @cached_property
    def f_tilde_exprs(self) -> Tuple[sp.Expr, ...]:
        """f-tilde_j(x, w) = w^{k + alpha_j} f_j(x / w^alpha), w = 1 / kappa."""

        t = self.qh_type
        w = KAPPA_INV
        scaled = {y: x * w ** (-a) for y, x, a in zip(self.variables, self.compact_symbols, t.alpha)}
        gens = self.compact_symbols + (w,)
        exprs = []
        for j, f_j in enumerate(self.rhs):
            expr = sp.expand(w ** (t.order_k + t.alpha[j]) * f_j.xreplace(scaled))
            exprs.append(_check_polynomial(expr, gens, f"f~_{j + 1}"))
        return tuple(exprs)

    @cached_property
    def quasi_homogeneous_part(self) -> Tuple[sp.Expr, ...]:
        return tuple(sp.expand(e.subs(KAPPA_INV, 0)) for e in self.f_tilde_exprs)

    @cached_property
    def f_tilde_tape(self) -> PolynomialTape:
        return PolynomialTape(self.f_tilde_exprs, self.compact_symbols + (KAPPA_INV,), self.parameters)

    def eval_f(self, y: IntervalVector) -> IntervalVector:
        return self.f_tape.evaluate_interval(y)

    def eval_Df(self, y: IntervalVector) -> IntervalMatrix:
        return self.df_tape.evaluate_interval(y)

    def eval_f_tilde(self, x: IntervalVector, w: Interval) -> IntervalVector:
        return self.f_tilde_tape.evaluate_interval(x.concat(IntervalVector.from_intervals([w])))

    def f_float(self, y) -> np.ndarray:
        return self.f_tape.evaluate_float(y)


@dataclass(frozen=True, eq=False)
class DesingularizedField:
    """dx/dtau = g(x) together with the integrand dt/dtau."""

    symbols: Tuple[sp.Symbol, ...]
    g_exprs: Tuple[sp.Expr, ...]
    q_expr: sp.Expr
    parameters: Mapping[sp.Symbol, Interval] = field(default_factory=dict)
    chart: Optional[CompactChart] = None
    model: Optional[VectorFieldModel] = None
    f_components: Tuple[sp.Expr, ...] = ()
    transfer: Optional[sp.Matrix] = None

    @classmethod
    def from_exprs(cls, symbols, g_exprs, q_expr=1, parameters=None) -> "DesingularizedField":
        """Plain field without chart bookkeeping."""

        return cls(tuple(symbols), tuple(sp.sympify(e) for e in g_exprs), sp.sympify(q_expr), parameters or {})

    @property
    def dim(self) -> int:
        return len(self.symbols)

    @cached_property
    def taylor_tape(self) -> PolynomialTape:
        """Outputs g_1..g_n followed by dt/dtau."""

        return PolynomialTape(list(self.g_exprs) + [self.q_expr], self.symbols, self.parameters)

    @cached_property
    def jacobian_exprs(self) -> sp.Matrix:
        return sp.Matrix(self.g_exprs).jacobian(self.symbols)

    @cached_property
    def dg_tape(self) -> PolynomialTape:
        return PolynomialTape.from_matrix(self.jacobian_exprs, self.symbols, self.parameters)

    def eval_g(self, x: IntervalVector) -> IntervalVector:
        return self.taylor_tape.evaluate_interval(x)[: self.dim]

    def eval_Dg(self, x: IntervalVector) -> IntervalMatrix:
        return self.dg_tape.evaluate_interval(x)

    def dt_dtau(self, x: IntervalVector) -> Interval:
        return self.taylor_tape.evaluate_interval(x)[self.dim]

    def g_point(self, x) -> IntervalVector:
        """Tight enclosure of g at a float point."""

        return self.taylor_tape.evaluate_point(x)[: self.dim]

    def g_float(self, x) -> np.ndarray:
        return self.taylor_tape.evaluate_float(x)[: self.dim]

    def Dg_float(self, x) -> np.ndarray:
        return self.dg_tape.evaluate_float(x)

    def dt_dtau_float(self, x) -> np.ndarray:
        return self.taylor_tape.evaluate_float(x)[self.dim]

    @cached_property
    def horizon_subsystem(self) -> "HorizonSubsystem":
        """x-part of a directional field restricted to the invariant set {s = 0}."""

        if self.chart is None or self.chart.is_para:
            raise ConfigurationError("subsistema do horizonte só existe em cartas direcionais")
        s = self.symbols[0]
        rest = self.symbols[1:]
        exprs = [sp.expand(e.subs(s, 0)) for e in self.g_exprs[1:]]
        return HorizonSubsystem(rest, tuple(exprs), self.parameters)


@dataclass(frozen=True, eq=False)
class HorizonSubsystem:
    symbols: Tuple[sp.Symbol, ...]
    exprs: Tuple[sp.Expr, ...]
    parameters: Mapping[sp.Symbol, Interval]

    @cached_property
    def tape(self) -> PolynomialTape:
        return PolynomialTape(self.exprs, self.symbols, self.parameters)

    @cached_property
    def jacobian_tape(self) -> PolynomialTape:
        return PolynomialTape.from_matrix(sp.Matrix(self.exprs).jacobian(self.symbols), self.symbols, self.parameters)

    def g_point(self, x) -> IntervalVector:
        return self.tape.evaluate_point(x)

    def eval_Dg(self, x: IntervalVector) -> IntervalMatrix:
        return self.jacobian_tape.evaluate_interval(x)

    def g_float(self, x) -> np.ndarray:
        return self.tape.evaluate_float(x)

    def Dg_float(self, x) -> np.ndarray:
        return self.jacobian_tape.evaluate_float(x)


# ---------------------------------------------------------------------------
# quasi-parabolic desingularization
# ---------------------------------------------------------------------------


def para_parts(model: VectorFieldModel) -> Dict[str, sp.Expr]:
    """Building blocks P = p^{2c}, F, G and f-tilde on the quasi-parabolic chart."""

    t = model.qh_type
    xs = model.compact_symbols
    P = sum(x ** (2 * b) for x, b in zip(xs, t.beta))
    one_minus_P = 1 - P
    f_tilde = [e.xreplace({KAPPA_INV: one_minus_P}) for e in model.f_tilde_exprs]
    F = 1 - sp.Rational(2 * t.c - 1, 2 * t.c) * one_minus_P
    G = sum(sp.Rational(1, a) * x ** (2 * b - 1) * ft for x, a, b, ft in zip(xs, t.alpha, t.beta, f_tilde))
    return {"P": P, "F": F, "G": G, "f_tilde": f_tilde}


def desing_para(model: VectorFieldModel) -> DesingularizedField:
    """g_i = F(x) f~_i(x) - alpha_i x_i G(x), dt/dtau = (1 - P)^k F(x)."""

    t = model.qh_type
    parts = para_parts(model)
    xs = model.compact_symbols
    g = tuple(parts["F"] * ft - a * x * parts["G"] for x, a, ft in zip(xs, t.alpha, parts["f_tilde"]))
    q = (1 - parts["P"]) ** t.order_k * parts["F"]
    logger.debug("para field built, n=%d, type=%s", t.n, t.alpha)
    return DesingularizedField(
        symbols=xs,
        g_exprs=g,
        q_expr=q,
        parameters=model.parameters,
        chart=CompactChart.para(t),
        model=model,
        f_components=tuple(parts["f_tilde"]),
    )


def horizon_residual(g: DesingularizedField, x: IntervalVector) -> Interval:
    """<grad(1 - p^{2c}), g(x)> + (1/c)(sum beta_j x_j^{2beta_j-1} f~_j)(1 - p^{2c}).

    Encloses zero for a correctly built quasi-parabolic field.
    """

    if g.chart is None or not g.chart.is_para or g.model is None:
        raise ConfigurationError("horizon_residual requer um campo quasi-parabólico")
    t = g.chart.qh_type
    w = 1 - p_power(x, t)
    gx = g.eval_g(x)
    ft = g.model.eval_f_tilde(x, w)
    lhs = Interval(0.0)
    weighted = Interval(0.0)
    for j in range(t.n):
        lever = pow_int(x[j], 2 * t.beta[j] - 1)
        lhs = lhs - lever * gx[j] * (2 * t.beta[j])
        weighted = weighted + lever * ft[j] * t.beta[j]
    rhs = -(weighted * w) / t.c
    return lhs - rhs


def symmetry_signs(g: DesingularizedField) -> Tuple[int, ...]:
    """(-1)^{k + alpha_i}: g(reflect(x)) = signs * g(x) for quasi-homogeneous f."""

    if g.chart is None or not g.chart.is_para:
        raise ConfigurationError("simetria definida apenas para a carta quasi-parabólica")
    t = g.chart.qh_type
    return tuple((-1) ** (t.order_k + a) for a in t.alpha)


# ---------------------------------------------------------------------------
# directional desingularization
# ---------------------------------------------------------------------------


def directional_matrices(chart: CompactChart, s: sp.Symbol, xs: Sequence[sp.Symbol]) -> Tuple[sp.Matrix, sp.Matrix]:
    """(M-tilde, B) with B M-tilde = I; rows of B follow the state (s, x), columns the original index."""

    t = chart.qh_type
    n = t.n
    i = chart.index - 1
    sigma = chart.sign
    others = chart.other_indices()
    M = sp.zeros(n, n)
    B = sp.zeros(n, n)
    M[i, 0] = sigma * t.alpha[i]
    B[0, i] = sp.Rational(sigma, t.alpha[i])
    for pos, j in enumerate(others, start=1):
        x_j = xs[pos - 1]
        M[j, 0] = t.alpha[j] * x_j
        M[j, pos] = 1
        B[pos, j] = 1
        B[pos, i] = -sp.Rational(sigma * t.alpha[j], t.alpha[i]) * x_j
    if sp.expand(B * M) != sp.eye(n):
        raise VerificationError("matriz de transferência direcional inconsistente")
    return M, B


def desing_dir(model: VectorFieldModel, chart: CompactChart) -> DesingularizedField:
    """g_d = diag(-s, 1, ..., 1) B f-hat, dt/dtau = s^k."""

    if chart.is_para:
        raise ConfigurationError("desing_dir requer uma carta direcional")
    t = model.qh_type
    i = chart.index - 1
    s = sp.Symbol("s")
    others = chart.other_indices()
    xs = tuple(sp.Symbol(f"x{j + 1}") for j in others)
    subs = {model.variables[i]: chart.sign * s ** (-t.alpha[i])}
    for x_j, j in zip(xs, others):
        subs[model.variables[j]] = x_j * s ** (-t.alpha[j])
    gens = (s,) + xs
    f_hat = []
    for j, f_j in enumerate(model.rhs):
        expr = sp.expand(s ** (t.order_k + t.alpha[j]) * f_j.xreplace(subs))
        f_hat.append(_check_polynomial(expr, gens, f"f^_{j + 1}"))
    _, B = directional_matrices(chart, s, xs)
    transported = B * sp.Matrix(f_hat)
    g = [sp.expand(-s * transported[0])] + [sp.expand(transported[r]) for r in range(1, t.n)]
    logger.debug("directional field built on chart %s, n=%d", chart.label, t.n)
    return DesingularizedField(
        symbols=gens,
        g_exprs=tuple(g),
        q_expr=s ** t.order_k,
        parameters=model.parameters,
        chart=chart,
        model=model,
        f_components=tuple(f_hat),
        transfer=B,
    )


def desingularize(model: VectorFieldModel, chart: CompactChart) -> DesingularizedField:
    if chart.is_para:
        return desing_para(model)
    return desing_dir(model, chart)


__all__ = [
    "DesingularizedField",
    "HorizonSubsystem",
    "KAPPA_INV",
    "VectorFieldModel",
    "desing_dir",
    "desing_para",
    "desingularize",
    "directional_matrices",
    "horizon_residual",
    "para_parts",
    "symmetry_signs",
]
