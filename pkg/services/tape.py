"""Programas lineares (straight-line) para mapas polinomiais.

Um ``PolynomialTape`` é compilado uma vez a partir de expressões sympy (após
eliminação de subexpressões comuns) e avaliado em quatro modos: floats,
racionais exatos, intervalos e séries de Taylor truncadas sobre intervalos.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy as sp

from .common import ConfigurationError, VerificationError
from .interval import (
    Interval,
    IntervalMatrix,
    IntervalVector,
    add_hi,
    add_lo,
    down_array,
    fraction_bounds,
    mul_arrays,
    mul_bounds,
    pow_bounds,
    round_down,
    round_up,
    sum_arrays,
    up_array,
)

_UNIT_ROUNDOFF = 2.0 ** -53


class Op(IntEnum):
    VAR = 0
    CONST = 1
    ADD = 2
    SUB = 3
    NEG = 4
    SCALE = 5
    MUL = 6
    POW = 7


@dataclass(frozen=True)
class Instruction:
    op: Op
    a: int = -1
    b: int = -1
    exponent: int = 0
    exact: Optional[Fraction] = None
    lo: float = 0.0
    hi: float = 0.0


@dataclass(frozen=True)
class TaylorSeries:
    """Interval Taylor coefficients, one row per component."""

    lo: np.ndarray
    hi: np.ndarray

    @property
    def order(self) -> int:
        return int(self.lo.shape[1]) - 1

    def coefficient(self, k: int) -> IntervalVector:
        return IntervalVector(self.lo[:, k].copy(), self.hi[:, k].copy())

    def rows(self, start: int, stop: Optional[int] = None) -> "TaylorSeries":
        return TaylorSeries(self.lo[start:stop], self.hi[start:stop])


class _Compiler:
    def __init__(self, variables: Sequence[sp.Symbol], parameters: Mapping[sp.Symbol, Interval]):
        self.instructions: List[Instruction] = []
        self.var_index = {sym: i for i, sym in enumerate(variables)}
        self.parameters = dict(parameters)
        self.bindings: Dict[sp.Basic, sp.Basic] = {}
        self.nodes: Dict[sp.Basic, int] = {}
        self.memo: Dict[tuple, int] = {}
        self.powers: Dict[int, List[int]] = {}

    def emit(self, instruction: Instruction) -> int:
        key = (
            instruction.op,
            instruction.a,
            instruction.b,
            instruction.exponent,
            instruction.exact,
            instruction.lo,
            instruction.hi,
        )
        found = self.memo.get(key)
        if found is not None:
            return found
        self.instructions.append(instruction)
        index = len(self.instructions) - 1
        self.memo[key] = index
        return index

    def constant(self, value: Fraction) -> int:
        lo, hi = fraction_bounds(value)
        return self.emit(Instruction(Op.CONST, exact=value, lo=lo, hi=hi))

    def power(self, base: int, exponent: int) -> int:
        chain = self.powers.setdefault(base, [base])
        while len(chain) < exponent:
            step = len(chain) + 1
            chain.append(self.emit(Instruction(Op.POW, a=base, b=chain[-1], exponent=step)))
        return chain[exponent - 1]

    def compile(self, expr: sp.Basic) -> int:
        cached = self.nodes.get(expr)
        if cached is not None:
            return cached
        node = self._compile(expr)
        self.nodes[expr] = node
        return node

    def _compile(self, expr: sp.Basic) -> int:
        if expr.is_Symbol:
            if expr in self.var_index:
                return self.emit(Instruction(Op.VAR, a=self.var_index[expr]))
            if expr in self.parameters:
                value = self.parameters[expr]
                return self.emit(Instruction(Op.CONST, lo=value.lo, hi=value.hi))
            if expr in self.bindings:
                return self.compile(self.bindings[expr])
            raise ConfigurationError(f"símbolo livre na expressão: {expr}")
        if expr.is_Float:
            raise ConfigurationError(f"constante em ponto flutuante não é exata: {expr}")
        if expr.is_Rational:
            return self.constant(Fraction(int(expr.p), int(expr.q)))
        if expr.is_Add:
            terms = list(expr.args)
            acc = self._signed(terms[0])
            for term in terms[1:]:
                if term.could_extract_minus_sign():
                    acc = self.emit(Instruction(Op.SUB, a=acc, b=self.compile(-term)))
                else:
                    acc = self.emit(Instruction(Op.ADD, a=acc, b=self.compile(term)))
            return acc
        if expr.is_Mul:
            coeff, rest = expr.as_coeff_Mul()
            if coeff.is_Float:
                raise ConfigurationError(f"constante em ponto flutuante não é exata: {expr}")
            if coeff != 1:
                inner = self.compile(rest)
                if coeff == -1:
                    return self.emit(Instruction(Op.NEG, a=inner))
                factor = Fraction(int(sp.Rational(coeff).p), int(sp.Rational(coeff).q))
                lo, hi = fraction_bounds(factor)
                return self.emit(Instruction(Op.SCALE, a=inner, exact=factor, lo=lo, hi=hi))
            factors = [self.compile(arg) for arg in expr.args]
            acc = factors[0]
            for node in factors[1:]:
                acc = self.emit(Instruction(Op.MUL, a=acc, b=node))
            return acc
        if expr.is_Pow:
            base, exponent = expr.as_base_exp()
            if not (exponent.is_Integer and int(exponent) >= 1):
                raise ConfigurationError(f"potência não polinomial: {expr}")
            return self.power(self.compile(base), int(exponent))
        raise ConfigurationError(f"expressão não suportada: {type(expr).__name__} {expr}")

    def _signed(self, term: sp.Basic) -> int:
        if term.could_extract_minus_sign() and not term.is_Number:
            return self.emit(Instruction(Op.NEG, a=self.compile(-term)))
        return self.compile(term)


class PolynomialTape:
    """Compiled polynomial map R^n -> R^m (or R^{r x c}).

    Parameters enter as interval constants; rational coefficients stay exact
    until interval evaluation.
    """

    def __init__(
        self,
        exprs: Sequence[sp.Expr],
        variables: Sequence[sp.Symbol],
        parameters: Optional[Mapping[sp.Symbol, Interval]] = None,
        shape: Optional[Tuple[int, ...]] = None,
    ) -> None:
        exprs = [sp.sympify(e) for e in exprs]
        self.n_inputs = len(variables)
        self.shape = shape or (len(exprs),)
        compiler = _Compiler(variables, parameters or {})
        bindings, reduced = sp.cse(exprs, symbols=sp.numbered_symbols("_cse"))
        for symbol, value in bindings:
            compiler.bindings[symbol] = value
        self.outputs = [compiler.compile(e) for e in reduced]
        self.instructions: Tuple[Instruction, ...] = tuple(compiler.instructions)
        self.exact_available = all(
            ins.op is not Op.CONST or ins.exact is not None or ins.lo == ins.hi
            for ins in self.instructions
        )
        self._code = [
            (int(ins.op), ins.a, ins.b, ins.exponent, ins.lo, ins.hi) for ins in self.instructions
        ]

    @classmethod
    def from_matrix(cls, matrix: sp.Matrix, variables, parameters=None) -> "PolynomialTape":
        rows, cols = matrix.shape
        return cls(list(matrix), variables, parameters, shape=(rows, cols))

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def n_outputs(self) -> int:
        return len(self.outputs)

    def _shaped(self, vector: IntervalVector):
        if len(self.shape) == 2:
            return IntervalMatrix(vector.lo.reshape(self.shape), vector.hi.reshape(self.shape))
        return vector

    # float ---------------------------------------------------------------------
    def evaluate_float(self, inputs) -> np.ndarray:
        """Non-rigorous evaluation; trailing input axes broadcast."""

        x = np.asarray(inputs, dtype=float)
        values: List[object] = []
        for op, a, b, e, lo, hi in self._code:
            if op == Op.VAR:
                v = x[a]
            elif op == Op.CONST:
                v = 0.5 * (lo + hi)
            elif op == Op.ADD:
                v = values[a] + values[b]
            elif op == Op.SUB:
                v = values[a] - values[b]
            elif op == Op.NEG:
                v = -values[a]
            elif op == Op.SCALE:
                v = 0.5 * (lo + hi) * values[a]
            elif op == Op.MUL:
                v = values[a] * values[b]
            else:
                v = values[a] ** e
            values.append(v)
        out = np.array([np.broadcast_to(np.asarray(values[o], dtype=float), x.shape[1:]) for o in self.outputs])
        return out.reshape(self.shape + x.shape[1:])

    # exact ----------------------------------------------------------------------
    def evaluate_exact(self, inputs: Sequence) -> List[Fraction]:
        if not self.exact_available:
            raise VerificationError("exact evaluation unavailable with interval parameters")
        x = [Fraction(v) for v in inputs]
        values: List[Fraction] = []
        for ins in self.instructions:
            op = ins.op
            if op is Op.VAR:
                v = x[ins.a]
            elif op is Op.CONST:
                v = ins.exact if ins.exact is not None else Fraction(ins.lo)
            elif op is Op.ADD:
                v = values[ins.a] + values[ins.b]
            elif op is Op.SUB:
                v = values[ins.a] - values[ins.b]
            elif op is Op.NEG:
                v = -values[ins.a]
            elif op is Op.SCALE:
                v = ins.exact * values[ins.a]
            elif op is Op.MUL:
                v = values[ins.a] * values[ins.b]
            else:
                v = values[ins.a] ** ins.exponent
            values.append(v)
        return [values[o] for o in self.outputs]

    def evaluate_point(self, inputs) -> IntervalVector:
        """Tight enclosure at a float point, exact before a single rounding when possible."""

        point = np.asarray(inputs, dtype=float)
        if self.exact_available:
            return IntervalVector.from_fractions(self.evaluate_exact([Fraction(float(v)) for v in point]))
        return self.evaluate_interval(IntervalVector.point(point))

    # interval -------------------------------------------------------------------
    def evaluate_interval(self, inputs: IntervalVector):
        xlo, xhi = inputs.lo, inputs.hi
        L: List[float] = []
        H: List[float] = []
        for op, a, b, e, clo, chi in self._code:
            if op == Op.VAR:
                lo, hi = float(xlo[a]), float(xhi[a])
            elif op == Op.CONST:
                lo, hi = clo, chi
            elif op == Op.ADD:
                lo, hi = add_lo(L[a], L[b]), add_hi(H[a], H[b])
            elif op == Op.SUB:
                lo, hi = add_lo(L[a], -H[b]), add_hi(H[a], -L[b])
            elif op == Op.NEG:
                lo, hi = -H[a], -L[a]
            elif op == Op.SCALE:
                lo, hi = mul_bounds(L[a], H[a], clo, chi)
            elif op == Op.MUL:
                lo, hi = mul_bounds(L[a], H[a], L[b], H[b])
            else:
                lo, hi = pow_bounds(L[a], H[a], e)
            L.append(lo)
            H.append(hi)
        vector = IntervalVector([L[o] for o in self.outputs], [H[o] for o in self.outputs])
        return self._shaped(vector)

    # Taylor series ------------------------------------------------------------------
    def ode_series(self, x0: IntervalVector, order: int) -> Tuple[TaylorSeries, TaylorSeries]:
        """Taylor coefficients of x' = F(x) for every solution starting in x0.

        The first ``n_inputs`` outputs drive the recursion
        x_{k+1} = out_k / (k + 1); further outputs (e.g. dt/dtau) ride along.
        Returns (states, outputs), each with ``order + 1`` columns.
        """

        n = self.n_inputs
        if self.n_outputs < n:
            raise ConfigurationError("ode_series needs at least one output per state")
        xs_lo = [[float(v)] for v in x0.lo]
        xs_hi = [[float(v)] for v in x0.hi]
        L: List[List[float]] = [[] for _ in self._code]
        H: List[List[float]] = [[] for _ in self._code]
        drive = self.outputs[:n]
        for k in range(order + 1):
            for idx, (op, a, b, e, clo, chi) in enumerate(self._code):
                if op == Op.VAR:
                    lo, hi = xs_lo[a][k], xs_hi[a][k]
                elif op == Op.CONST:
                    lo, hi = (clo, chi) if k == 0 else (0.0, 0.0)
                elif op == Op.ADD:
                    lo, hi = add_lo(L[a][k], L[b][k]), add_hi(H[a][k], H[b][k])
                elif op == Op.SUB:
                    lo, hi = add_lo(L[a][k], -H[b][k]), add_hi(H[a][k], -L[b][k])
                elif op == Op.NEG:
                    lo, hi = -H[a][k], -L[a][k]
                elif op == Op.SCALE:
                    lo, hi = mul_bounds(L[a][k], H[a][k], clo, chi)
                elif op == Op.MUL:
                    lo, hi = _cauchy(L[a], H[a], L[b], H[b], k)
                elif k == 0:
                    lo, hi = pow_bounds(L[a][0], H[a][0], e)
                else:
                    lo, hi = _cauchy(L[b], H[b], L[a], H[a], k)
                L[idx].append(lo)
                H[idx].append(hi)
            if k < order:
                for i, out in enumerate(drive):
                    lo, hi = _divide_bounds(L[out][k], H[out][k], k + 1)
                    xs_lo[i].append(lo)
                    xs_hi[i].append(hi)
        states = TaylorSeries(np.array(xs_lo), np.array(xs_hi))
        outputs = TaylorSeries(
            np.array([L[o] for o in self.outputs]), np.array([H[o] for o in self.outputs])
        )
        return states, outputs

    def series(self, inputs: TaylorSeries) -> TaylorSeries:
        """Propagate given input series through the tape (no recursion)."""

        P = inputs.lo.shape[1]
        anti = np.add.outer(np.arange(P), np.arange(P))
        mask = anti < P
        bins = anti[mask]
        gamma = 2.0 * (P + 1) * _UNIT_ROUNDOFF
        e0 = np.zeros(P)
        e0[0] = 1.0

        def cauchy(alo, ahi, blo, bhi):
            plo, phi = mul_arrays(alo[:, None], ahi[:, None], blo[None, :], bhi[None, :])
            plo, phi = plo[mask], phi[mask]
            s_lo = np.bincount(bins, weights=plo, minlength=P)
            s_hi = np.bincount(bins, weights=phi, minlength=P)
            err_lo = np.bincount(bins, weights=np.abs(plo), minlength=P) * gamma
            err_hi = np.bincount(bins, weights=np.abs(phi), minlength=P) * gamma
            return down_array(s_lo - err_lo), up_array(s_hi + err_hi)

        L: List[np.ndarray] = []
        H: List[np.ndarray] = []
        for op, a, b, e, clo, chi in self._code:
            if op == Op.VAR:
                lo, hi = inputs.lo[a], inputs.hi[a]
            elif op == Op.CONST:
                lo, hi = e0 * clo, e0 * chi
            elif op == Op.ADD:
                lo, hi = sum_arrays(L[a], L[b])[0], sum_arrays(H[a], H[b])[1]
            elif op == Op.SUB:
                lo, hi = sum_arrays(L[a], -H[b])[0], sum_arrays(H[a], -L[b])[1]
            elif op == Op.NEG:
                lo, hi = -H[a], -L[a]
            elif op == Op.SCALE:
                lo, hi = mul_arrays(L[a], H[a], clo, chi)
            elif op == Op.MUL:
                lo, hi = cauchy(L[a], H[a], L[b], H[b])
            else:
                lo, hi = cauchy(L[b], H[b], L[a], H[a])
                lo[0], hi[0] = pow_bounds(float(L[a][0]), float(H[a][0]), e)
            L.append(lo)
            H.append(hi)
        return TaylorSeries(np.array([L[o] for o in self.outputs]), np.array([H[o] for o in self.outputs]))


def _cauchy(alo: List[float], ahi: List[float], blo: List[float], bhi: List[float], k: int) -> Tuple[float, float]:
    lows: List[float] = []
    highs: List[float] = []
    for l in range(k + 1):
        plo, phi = mul_bounds(alo[l], ahi[l], blo[k - l], bhi[k - l])
        lows.append(plo)
        highs.append(phi)
    # fsum is correctly rounded, one nudge makes it a bound
    slo, shi = math.fsum(lows), math.fsum(highs)
    return (slo if slo == 0.0 and not any(lows) else round_down(slo)), (
        shi if shi == 0.0 and not any(highs) else round_up(shi)
    )


def _divide_bounds(lo: float, hi: float, divisor: int) -> Tuple[float, float]:
    qlo, qhi = lo / divisor, hi / divisor
    return (qlo if lo == 0.0 else round_down(qlo)), (qhi if hi == 0.0 else round_up(qhi))


__all__ = ["Instruction", "Op", "PolynomialTape", "TaylorSeries"]
