"""Aritmética intervalar com arredondamento para fora.

Cada resultado em ponto flutuante é calculado no modo padrão (mais próximo) e
empurrado um ulp para fora com ``nextafter``. Somas usam uma transformação
sem erro, então somas exatas não são alargadas. Escalares são Python puro
(``Interval``); vetores e matrizes guardam arrays numpy ``lo``/``hi``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.config import KAPPA_REL_WIDTH, KRAWCZYK_ROUNDS

from .common import IntervalDomainError, VerificationError, get_logger

logger = get_logger(__name__)

_INF = math.inf
_UNIT_ROUNDOFF = 2.0 ** -53

Number = Union[int, float, Fraction]


# ---------------------------------------------------------------------------
# scalar rounding kernels (shared with services.tape)
# ---------------------------------------------------------------------------


def round_down(value: float) -> float:
    return math.nextafter(value, -_INF)


def round_up(value: float) -> float:
    return math.nextafter(value, _INF)


def sum_bounds(a: float, b: float) -> Tuple[float, float]:
    """Return (lo, hi) enclosing a + b, exact when the float sum is exact."""

    s = a + b
    if not math.isfinite(s):
        return round_down(s), round_up(s)
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    if err == 0.0:
        return s, s
    if err > 0.0:
        return s, round_up(s)
    return round_down(s), s


def add_lo(a: float, b: float) -> float:
    return sum_bounds(a, b)[0]


def add_hi(a: float, b: float) -> float:
    return sum_bounds(a, b)[1]


def _mul_down(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return round_down(a * b)


def _mul_up(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    return round_up(a * b)


def mul_bounds(alo: float, ahi: float, blo: float, bhi: float) -> Tuple[float, float]:
    """Outward enclosure of [alo, ahi] * [blo, bhi]."""

    if alo >= 0.0 and blo >= 0.0:
        return _mul_down(alo, blo), _mul_up(ahi, bhi)
    if ahi <= 0.0 and bhi <= 0.0:
        return _mul_down(ahi, bhi), _mul_up(alo, blo)
    lo = min(_mul_down(alo, blo), _mul_down(alo, bhi), _mul_down(ahi, blo), _mul_down(ahi, bhi))
    hi = max(_mul_up(alo, blo), _mul_up(alo, bhi), _mul_up(ahi, blo), _mul_up(ahi, bhi))
    return lo, hi


def _pow_abs_up(a: float, n: int) -> float:
    result, base = 1.0, a
    while n:
        if n & 1:
            result = _mul_up(result, base)
        n >>= 1
        if n:
            base = _mul_up(base, base)
    return result


def _pow_abs_down(a: float, n: int) -> float:
    result, base = 1.0, a
    while n:
        if n & 1:
            result = _mul_down(result, base)
        n >>= 1
        if n:
            base = _mul_down(base, base)
    return max(result, 0.0)


def pow_bounds(lo: float, hi: float, n: int) -> Tuple[float, float]:
    """Outward enclosure of {v**n : v in [lo, hi]} for n >= 0."""

    if n < 0:
        raise IntervalDomainError(f"negative exponent {n} is not supported")
    if n == 0:
        return 1.0, 1.0
    if n == 1:
        return lo, hi
    if n % 2:
        plo = _pow_abs_down(lo, n) if lo >= 0.0 else -_pow_abs_up(-lo, n)
        phi = _pow_abs_up(hi, n) if hi >= 0.0 else -_pow_abs_down(-hi, n)
        return plo, phi
    if lo >= 0.0:
        return _pow_abs_down(lo, n), _pow_abs_up(hi, n)
    if hi <= 0.0:
        return _pow_abs_down(-hi, n), _pow_abs_up(-lo, n)
    return 0.0, _pow_abs_up(max(-lo, hi), n)


def fraction_bounds(value: Rational) -> Tuple[float, float]:
    """Tightest float bracket of an exact rational."""

    q = Fraction(value)
    approx = float(q)
    exact = Fraction(approx)
    if exact == q:
        return approx, approx
    if exact < q:
        return approx, round_up(approx)
    return round_down(approx), approx


# ---------------------------------------------------------------------------
# Interval (scalar)
# ---------------------------------------------------------------------------


class Interval:
    """Closed interval [lo, hi] of reals with outward-rounded arithmetic."""

    __slots__ = ("lo", "hi")
    __array_ufunc__ = None

    def __init__(self, lo: float, hi: Optional[float] = None) -> None:
        lo_f = float(lo)
        hi_f = lo_f if hi is None else float(hi)
        if math.isnan(lo_f) or math.isnan(hi_f):
            raise IntervalDomainError("interval bound is NaN")
        if lo_f > hi_f:
            raise IntervalDomainError(f"invalid interval [{lo_f!r}, {hi_f!r}]")
        self.lo = lo_f
        self.hi = hi_f

    # construction -----------------------------------------------------------------
    @classmethod
    def from_fraction(cls, value: Rational) -> "Interval":
        return cls(*fraction_bounds(value))

    @classmethod
    def from_decimal(cls, lo: str, hi: Optional[str] = None) -> "Interval":
        """Enclose the exact decimal interval [lo, hi] given as strings."""

        lo_bound = fraction_bounds(Fraction(lo))[0]
        hi_bound = fraction_bounds(Fraction(hi if hi is not None else lo))[1]
        return cls(lo_bound, hi_bound)

    @classmethod
    def coerce(cls, value: Union["Interval", Number]) -> "Interval":
        if isinstance(value, Interval):
            return value
        if isinstance(value, float):
            return cls(value, value)
        if isinstance(value, (int, Fraction)):
            return cls.from_fraction(value)
        if isinstance(value, np.floating):
            return cls(float(value), float(value))
        if isinstance(value, np.integer):
            return cls.from_fraction(int(value))
        raise TypeError(f"cannot convert {type(value).__name__} to Interval")

    # properties -------------------------------------------------------------------
    def mid(self) -> float:
        if self.lo == self.hi:
            return self.lo
        m = 0.5 * self.lo + 0.5 * self.hi
        return min(max(m, self.lo), self.hi)

    def rad(self) -> float:
        m = self.mid()
        return max(round_up(self.hi - m), round_up(m - self.lo))

    def width(self) -> float:
        return add_hi(self.hi, -self.lo)

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def is_point(self) -> bool:
        return self.lo == self.hi

    # set relations -------------------------------------------------------------------
    def contains(self, value: Union["Interval", Number]) -> bool:
        if isinstance(value, Interval):
            return self.lo <= value.lo and value.hi <= self.hi
        if isinstance(value, float):
            return self.lo <= value <= self.hi
        q = Fraction(value)
        return Fraction(self.lo) <= q <= Fraction(self.hi)

    __contains__ = contains

    def interior_of(self, other: "Interval") -> bool:
        """True when self lies strictly inside other."""

        return other.lo < self.lo and self.hi < other.hi

    def overlaps(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise IntervalDomainError(f"empty intersection of {self} and {other}")
        return Interval(lo, hi)

    def hull(self, other: Union["Interval", Number]) -> "Interval":
        other = Interval.coerce(other)
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def inflate(self, absolute: float, relative: float = 0.0) -> "Interval":
        delta = round_up(absolute + relative * self.mag())
        return Interval(add_lo(self.lo, -delta), add_hi(self.hi, delta))

    # arithmetic ----------------------------------------------------------------------
    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __pos__(self) -> "Interval":
        return self

    def __add__(self, other) -> "Interval":
        try:
            o = Interval.coerce(other)
        except TypeError:
            return NotImplemented
        return Interval(add_lo(self.lo, o.lo), add_hi(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> "Interval":
        try:
            o = Interval.coerce(other)
        except TypeError:
            return NotImplemented
        return Interval(add_lo(self.lo, -o.hi), add_hi(self.hi, -o.lo))

    def __rsub__(self, other) -> "Interval":
        return Interval.coerce(other) - self

    def __mul__(self, other) -> "Interval":
        try:
            o = Interval.coerce(other)
        except TypeError:
            return NotImplemented
        return Interval(*mul_bounds(self.lo, self.hi, o.lo, o.hi))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Interval":
        try:
            o = Interval.coerce(other)
        except TypeError:
            return NotImplemented
        if o.lo <= 0.0 <= o.hi:
            raise IntervalDomainError(f"division by interval containing zero: {o}")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        lo = min(q if q == 0.0 else round_down(q) for q in quotients)
        hi = max(q if q == 0.0 else round_up(q) for q in quotients)
        return Interval(lo, hi)

    def __rtruediv__(self, other) -> "Interval":
        return Interval.coerce(other) / self

    def __pow__(self, n: int) -> "Interval":
        return pow_int(self, n)

    def sqr(self) -> "Interval":
        return pow_int(self, 2)

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise IntervalDomainError(f"square root of interval with negative part: {self}")
        lo = 0.0 if self.lo == 0.0 else round_down(math.sqrt(self.lo))
        hi = 0.0 if self.hi == 0.0 else round_up(math.sqrt(self.hi))
        return Interval(max(lo, 0.0), hi)

    def root(self, m: int) -> "Interval":
        """Verified real m-th root (odd m accepts negative intervals)."""

        if m < 1:
            raise IntervalDomainError(f"root order must be positive, got {m}")
        if m == 1:
            return self
        if m % 2 == 0 and self.lo < 0.0:
            raise IntervalDomainError(f"even root of interval with negative part: {self}")
        if self.lo < 0.0:
            if self.hi <= 0.0:
                return -((-self).root(m))
            return Interval(-_root_up(-self.lo, m), _root_up(self.hi, m))
        return Interval(_root_down(self.lo, m), _root_up(self.hi, m))

    # misc ----------------------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __str__(self) -> str:
        return f"[{self.lo:.17g}, {self.hi:.17g}]"


def _root_down(value: float, m: int) -> float:
    if value == 0.0:
        return 0.0
    r = round_down(round_down(value ** (1.0 / m)))
    while r > 0.0 and _pow_abs_up(r, m) > value:
        r = round_down(r)
    return max(r, 0.0)


def _root_up(value: float, m: int) -> float:
    if value == 0.0:
        return 0.0
    r = round_up(round_up(value ** (1.0 / m)))
    while _pow_abs_down(r, m) < value:
        r = round_up(r)
    return r


def pow_int(x: Interval, n: int) -> Interval:
    """Enclosure of {v**n : v in x}; even powers have nonnegative lower bound."""

    return Interval(*pow_bounds(x.lo, x.hi, int(n)))


def interval_sum(items: Iterable[Interval]) -> Interval:
    lo, hi = 0.0, 0.0
    for item in items:
        lo = add_lo(lo, item.lo)
        hi = add_hi(hi, item.hi)
    return Interval(lo, hi)


# ---------------------------------------------------------------------------
# numpy-backed vectors and matrices
# ---------------------------------------------------------------------------


def down_array(values: np.ndarray) -> np.ndarray:
    return np.nextafter(values, -_INF)


def up_array(values: np.ndarray) -> np.ndarray:
    return np.nextafter(values, _INF)


def sum_arrays(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised ``sum_bounds``."""

    with np.errstate(invalid="ignore", over="ignore"):
        s = a + b
        bb = s - a
        err = (a - (s - bb)) + (b - bb)
    finite = np.isfinite(s)
    lo = np.where(finite & (err >= 0.0), s, down_array(s))
    hi = np.where(finite & (err <= 0.0), s, up_array(s))
    return lo, hi


def mul_arrays(alo, ahi, blo, bhi) -> Tuple[np.ndarray, np.ndarray]:
    with np.errstate(invalid="ignore", over="ignore"):
        products = [alo * blo, alo * bhi, ahi * blo, ahi * bhi]
        factors = [(alo, blo), (alo, bhi), (ahi, blo), (ahi, bhi)]
    lows, highs = [], []
    for p, (a, b) in zip(products, factors):
        exact_zero = (a == 0.0) | (b == 0.0)
        lows.append(np.where(exact_zero, 0.0, down_array(p)))
        highs.append(np.where(exact_zero, 0.0, up_array(p)))
    return np.minimum.reduce(lows), np.maximum.reduce(highs)


def sum_axis(lo_terms: np.ndarray, hi_terms: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """Outward bound of a floating sum along ``axis``.

    |fl(sum) - sum| <= gamma_{n-1} sum |a_i|; 2 (n + 1) u covers gamma and the
    rounding of the bound itself.
    """

    n = lo_terms.shape[axis]
    gamma = 2.0 * (n + 1) * _UNIT_ROUNDOFF
    s_lo = lo_terms.sum(axis=axis)
    s_hi = hi_terms.sum(axis=axis)
    if n <= 1:
        return s_lo, s_hi
    e_lo = np.abs(lo_terms).sum(axis=axis) * gamma
    e_hi = np.abs(hi_terms).sum(axis=axis) * gamma
    return down_array(s_lo - e_lo), up_array(s_hi + e_hi)


ArrayLike = Union[np.ndarray, Sequence[float]]


class _IntervalArray:
    __slots__ = ("lo", "hi")

    expected_ndim = -1
    # ndarray (op) IntervalVector dispatches to our reflected methods
    __array_ufunc__ = None

    def __init__(self, lo: ArrayLike, hi: Optional[ArrayLike] = None) -> None:
        lo_arr = np.array(lo, dtype=float)
        hi_arr = lo_arr.copy() if hi is None else np.array(hi, dtype=float)
        if lo_arr.shape != hi_arr.shape:
            raise IntervalDomainError(f"bound shapes differ: {lo_arr.shape} vs {hi_arr.shape}")
        if self.expected_ndim >= 0 and lo_arr.ndim != self.expected_ndim:
            raise IntervalDomainError(
                f"{type(self).__name__} expects {self.expected_ndim}-d bounds, got {lo_arr.ndim}-d"
            )
        if np.isnan(lo_arr).any() or np.isnan(hi_arr).any():
            raise IntervalDomainError("interval bound is NaN")
        if (lo_arr > hi_arr).any():
            raise IntervalDomainError("lower bound exceeds upper bound")
        self.lo = lo_arr
        self.hi = hi_arr

    @classmethod
    def point(cls, values: ArrayLike):
        arr = np.array(values, dtype=float)
        return cls(arr, arr.copy())

    @classmethod
    def from_fractions(cls, values) -> "_IntervalArray":
        arr = np.array(values, dtype=object)
        lo = np.empty(arr.shape)
        hi = np.empty(arr.shape)
        for idx, value in np.ndenumerate(arr):
            lo[idx], hi[idx] = fraction_bounds(value)
        return cls(lo, hi)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.lo.shape

    def mid(self) -> np.ndarray:
        m = 0.5 * self.lo + 0.5 * self.hi
        return np.clip(np.where(self.lo == self.hi, self.lo, m), self.lo, self.hi)

    def rad(self) -> np.ndarray:
        m = self.mid()
        return np.maximum(up_array(self.hi - m), up_array(m - self.lo))

    def width(self) -> np.ndarray:
        return sum_arrays(self.hi, -self.lo)[1]

    def mag(self) -> np.ndarray:
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def contains(self, other) -> bool:
        if isinstance(other, _IntervalArray):
            return bool(np.all(self.lo <= other.lo) and np.all(other.hi <= self.hi))
        values = np.asarray(other, dtype=float)
        return bool(np.all(self.lo <= values) and np.all(values <= self.hi))

    def interior_of(self, other: "_IntervalArray") -> bool:
        return bool(np.all(other.lo < self.lo) and np.all(self.hi < other.hi))

    def overlaps(self, other: "_IntervalArray") -> bool:
        return bool(np.all(self.lo <= other.hi) and np.all(other.lo <= self.hi))

    def intersect(self, other: "_IntervalArray"):
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if (lo > hi).any():
            raise IntervalDomainError("empty intersection")
        return type(self)(lo, hi)

    def hull(self, other: "_IntervalArray"):
        return type(self)(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def inflate(self, absolute: float, relative: float = 0.0):
        delta = up_array(absolute + relative * self.mag())
        return type(self)(down_array(self.lo - delta), up_array(self.hi + delta))

    # elementwise arithmetic -------------------------------------------------------------
    def _coerce(self, other) -> Tuple[np.ndarray, np.ndarray]:
        if isinstance(other, _IntervalArray):
            return other.lo, other.hi
        if isinstance(other, Interval):
            return np.full(self.shape, other.lo), np.full(self.shape, other.hi)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            lo, hi = fraction_bounds(other)
            return np.full(self.shape, lo), np.full(self.shape, hi)
        arr = np.broadcast_to(np.asarray(other, dtype=float), self.shape)
        return arr, arr

    def __neg__(self):
        return type(self)(-self.hi, -self.lo)

    def __add__(self, other):
        olo, ohi = self._coerce(other)
        return type(self)(sum_arrays(self.lo, olo)[0], sum_arrays(self.hi, ohi)[1])

    __radd__ = __add__

    def __sub__(self, other):
        olo, ohi = self._coerce(other)
        return type(self)(sum_arrays(self.lo, -ohi)[0], sum_arrays(self.hi, -olo)[1])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        olo, ohi = self._coerce(other)
        return type(self)(*mul_arrays(self.lo, self.hi, olo, ohi))

    __rmul__ = __mul__

    def scale(self, factor: Interval):
        return self * factor

    def __eq__(self, other) -> bool:
        if not isinstance(other, _IntervalArray):
            return NotImplemented
        return bool(np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi))

    __hash__ = None


class IntervalVector(_IntervalArray):
    """Vector of intervals; norm bounds enclose the norms of all members."""

    expected_ndim = 1

    @classmethod
    def from_intervals(cls, items: Iterable[Interval]) -> "IntervalVector":
        items = list(items)
        return cls([i.lo for i in items], [i.hi for i in items])

    @classmethod
    def zeros(cls, n: int) -> "IntervalVector":
        return cls(np.zeros(n), np.zeros(n))

    @property
    def dim(self) -> int:
        return int(self.lo.shape[0])

    def __len__(self) -> int:
        return self.dim

    def __getitem__(self, key):
        if isinstance(key, (int, np.integer)):
            return Interval(self.lo[key], self.hi[key])
        return IntervalVector(self.lo[key], self.hi[key])

    def __iter__(self):
        for lo, hi in zip(self.lo, self.hi):
            yield Interval(lo, hi)

    def with_entry(self, index: int, value: Interval) -> "IntervalVector":
        lo, hi = self.lo.copy(), self.hi.copy()
        lo[index], hi[index] = value.lo, value.hi
        return IntervalVector(lo, hi)

    def concat(self, other: "IntervalVector") -> "IntervalVector":
        return IntervalVector(np.concatenate([self.lo, other.lo]), np.concatenate([self.hi, other.hi]))

    def dot(self, other: "IntervalVector") -> Interval:
        plo, phi = mul_arrays(self.lo, self.hi, *self._coerce(other))
        lo, hi = sum_axis(plo, phi, axis=0)
        return Interval(float(lo), float(hi))

    def sum(self) -> Interval:
        lo, hi = sum_axis(self.lo, self.hi, axis=0)
        return Interval(float(lo), float(hi))

    def norm2_sq(self) -> Interval:
        squares = [pow_int(item, 2) for item in self]
        return interval_sum(squares)

    def norm2(self) -> Interval:
        return self.norm2_sq().sqrt()

    def norm_inf(self) -> Interval:
        mags = self.mag()
        migs = np.where((self.lo <= 0.0) & (self.hi >= 0.0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))
        return Interval(float(migs.max()), float(mags.max()))

    def __repr__(self) -> str:
        inner = ", ".join(str(item) for item in self)
        return f"IntervalVector([{inner}])"


class IntervalMatrix(_IntervalArray):
    """Row-major interval matrix; products enclose all member products."""

    expected_ndim = 2

    @classmethod
    def identity(cls, n: int) -> "IntervalMatrix":
        eye = np.eye(n)
        return cls(eye, eye.copy())

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Interval]]) -> "IntervalMatrix":
        lo = [[entry.lo for entry in row] for row in rows]
        hi = [[entry.hi for entry in row] for row in rows]
        return cls(lo, hi)

    @property
    def rows(self) -> int:
        return int(self.lo.shape[0])

    @property
    def cols(self) -> int:
        return int(self.lo.shape[1])

    def __getitem__(self, key):
        lo, hi = self.lo[key], self.hi[key]
        if np.ndim(lo) == 0:
            return Interval(lo, hi)
        if np.ndim(lo) == 1:
            return IntervalVector(lo, hi)
        return IntervalMatrix(lo, hi)

    @property
    def T(self) -> "IntervalMatrix":
        return IntervalMatrix(self.lo.T.copy(), self.hi.T.copy())

    def symmetrized(self) -> "IntervalMatrix":
        """Hull of (M + M^T) / 2."""

        total = self + self.T
        lo = np.where(total.lo == 0.0, 0.0, down_array(total.lo * 0.5))
        hi = np.where(total.hi == 0.0, 0.0, up_array(total.hi * 0.5))
        return IntervalMatrix(lo, hi)

    def __matmul__(self, other):
        if isinstance(other, IntervalVector):
            blo, bhi = other.lo[:, None], other.hi[:, None]
            squeeze = True
        elif isinstance(other, IntervalMatrix):
            blo, bhi = other.lo, other.hi
            squeeze = False
        else:
            arr = np.asarray(other, dtype=float)
            squeeze = arr.ndim == 1
            blo = bhi = arr[:, None] if squeeze else arr
        if self.cols != blo.shape[0]:
            raise IntervalDomainError(f"shape mismatch {self.shape} @ {blo.shape}")
        plo, phi = mul_arrays(
            self.lo[:, :, None], self.hi[:, :, None], blo[None, :, :], bhi[None, :, :]
        )
        lo, hi = sum_axis(plo, phi, axis=1)
        if squeeze:
            return IntervalVector(lo[:, 0], hi[:, 0])
        return IntervalMatrix(lo, hi)

    def __rmatmul__(self, other):
        return IntervalMatrix.point(np.atleast_2d(np.asarray(other, dtype=float))) @ self

    def norm_inf(self) -> Interval:
        row_lo, row_hi = sum_axis(np.zeros_like(self.lo), self.mag(), axis=1)
        return Interval(0.0, float(row_hi.max()))

    def diagonal(self) -> IntervalVector:
        return IntervalVector(np.diag(self.lo).copy(), np.diag(self.hi).copy())

    def __repr__(self) -> str:
        rows = "; ".join(", ".join(str(self[i, j]) for j in range(self.cols)) for i in range(self.rows))
        return f"IntervalMatrix([{rows}])"


# ---------------------------------------------------------------------------
# verified linear algebra
# ---------------------------------------------------------------------------


def verified_inverse(matrix: np.ndarray) -> IntervalMatrix:
    """Enclosure of the inverse of a point matrix.

    With R ~ inv(M) and C = I - R M, ||C|| < 1 gives
    ||M^-1 - R|| <= ||C|| ||R|| / (1 - ||C||) in the infinity norm.
    """

    M = np.asarray(matrix, dtype=float)
    n = M.shape[0]
    try:
        R = np.linalg.inv(M)
    except np.linalg.LinAlgError as exc:
        raise VerificationError(f"matrix is numerically singular: {exc}") from exc
    residual = IntervalMatrix.identity(n) - IntervalMatrix.point(R) @ M
    c_norm = residual.norm_inf().hi
    if not c_norm < 1.0:
        raise VerificationError(f"inverse not verified, ||I - RM|| = {c_norm:.3e}")
    r_norm = IntervalMatrix.point(R).norm_inf().hi
    delta = round_up(_mul_up(c_norm, r_norm) / round_down(1.0 - c_norm))
    return IntervalMatrix(down_array(R - delta), up_array(R + delta))


def interval_cholesky(matrix: IntervalMatrix) -> Optional[List[List[Interval]]]:
    """Interval Cholesky factorisation.

    A successful run proves every symmetric member positive definite.
    Returns the lower factor, or None on breakdown.
    """

    n = matrix.rows
    L: List[List[Optional[Interval]]] = [[None] * n for _ in range(n)]
    for j in range(n):
        pivot = matrix[j, j] - interval_sum(pow_int(L[j][k], 2) for k in range(j))
        if pivot.lo <= 0.0:
            return None
        ljj = pivot.sqrt()
        L[j][j] = ljj
        for i in range(j + 1, n):
            acc = matrix[i, j] - interval_sum(L[i][k] * L[j][k] for k in range(j))
            L[i][j] = acc / ljj
    return [[entry if entry is not None else Interval(0.0) for entry in row] for row in L]


def sym_eig_bounds(matrix: IntervalMatrix) -> Tuple[Interval, Interval]:
    """Enclosures of the extreme eigenvalues of every symmetric member.

    Gershgorin discs of Q^-1 M Q, with Q the eigenvectors of mid(M), bound the
    spectrum from outside; Rayleigh quotients along the extreme eigenvectors
    bound it from inside.
    """

    M = matrix.symmetrized()
    n = M.rows
    w, Q = np.linalg.eigh(M.mid())
    Q_inv = verified_inverse(Q)
    conj = (Q_inv @ M) @ Q
    centers = conj.diagonal()
    off_mag = conj.mag().copy()
    np.fill_diagonal(off_mag, 0.0)
    _, radii = sum_axis(np.zeros_like(off_mag), off_mag, axis=1)
    outer_lo = float(np.min(down_array(centers.lo - radii)))
    outer_hi = float(np.max(up_array(centers.hi + radii)))

    def rayleigh(vector: np.ndarray) -> Interval:
        v = IntervalVector.point(vector)
        return (M @ v).dot(v) / v.norm2_sq()

    top = rayleigh(Q[:, int(np.argmax(w))])
    bottom = rayleigh(Q[:, int(np.argmin(w))])
    lam_min = Interval(outer_lo, max(outer_lo, bottom.hi))
    lam_max = Interval(min(outer_hi, top.lo), outer_hi)
    if n == 1:
        entry = M[0, 0]
        lam_min = lam_max = entry
    return lam_min, lam_max


def verify_negative_definite(matrix: IntervalMatrix) -> Tuple[bool, Optional[Interval]]:
    """Prove every symmetric member of ``matrix`` negative definite.

    Returns (verified, c_A) where c_A.lo > 0 bounds -lambda_max from below
    over all members. Shifted interval Cholesky of -M is tried first,
    Gershgorin bounds after approximate diagonalisation are the fallback.
    """

    S = matrix.symmetrized()
    n = S.rows
    lam_min, lam_max = sym_eig_bounds(S)
    estimate = -float(np.linalg.eigvalsh(S.mid()).max())
    slack = float(IntervalMatrix(S.rad(), S.rad()).norm_inf().hi)
    lower: Optional[float] = None
    base = estimate - slack
    if estimate > 0.0:
        ladder = [base * (1.0 - 1e-8), base * (1.0 - 1e-4), base * 0.9, estimate * 0.5, estimate * 0.1, estimate * 0.01]
        neg = -S
        for shift in ladder:
            if not shift > 0.0:
                continue
            shifted = neg - IntervalMatrix.point(np.eye(n) * shift)
            if interval_cholesky(shifted) is not None:
                lower = round_down(shift)
                logger.debug("negative definiteness via Cholesky, shift %.6e", shift)
                break
    gershgorin = -lam_max.hi
    if gershgorin > 0.0:
        lower = gershgorin if lower is None else max(lower, gershgorin)
    if lower is None or not lower > 0.0:
        return False, None
    upper = max(lower, -lam_max.lo)
    return True, Interval(lower, upper)


# ---------------------------------------------------------------------------
# Krawczyk
# ---------------------------------------------------------------------------


def _epsilon_inflate(x: Interval) -> Interval:
    m = x.mid()
    r = 1.5 * x.rad() + 1e-14 * (1.0 + abs(m)) + 1e-300
    return Interval(round_down(m - r), round_up(m + r))


def krawczyk_scalar(
    f: Callable[[Interval], Interval],
    df: Callable[[Interval], Interval],
    x0: Interval,
    *,
    rounds: int = KRAWCZYK_ROUNDS,
    rel_width: float = KAPPA_REL_WIDTH,
) -> Interval:
    """Prove a unique zero of f inside a refinement of ``x0``.

    K(X) = m - y f(m) + (1 - y f'(X)) (X - m) with y = 1 / f'(m); K(X) inside
    int(X) proves existence and uniqueness.
    """

    X = x0
    for attempt in range(rounds):
        K = _krawczyk_scalar_image(f, df, X)
        if K is None:
            X = _epsilon_inflate(X)
            continue
        if K.interior_of(X):
            return _refine_scalar(f, df, K, rel_width)
        if K.overlaps(X):
            narrowed = K.intersect(X)
            if narrowed.width() < 0.5 * X.width():
                X = narrowed
                continue
        X = _epsilon_inflate(K.hull(X.mid()) if not K.overlaps(X) else K)
        logger.debug("krawczyk_scalar round %d: inflated to %s", attempt, X)
    raise VerificationError(f"Krawczyk contraction not established from {x0}")


def _krawczyk_scalar_image(f, df, X: Interval) -> Optional[Interval]:
    m = X.mid()
    slope = df(Interval(m)).mid()
    if slope == 0.0 or not math.isfinite(slope):
        return None
    y = 1.0 / slope
    point = Interval(m)
    return point - f(point) * y + (1 - df(X) * y) * (X - point)


def _refine_scalar(f, df, X: Interval, rel_width: float) -> Interval:
    for _ in range(20):
        if X.width() <= rel_width * max(X.mag(), 1e-300):
            break
        K = _krawczyk_scalar_image(f, df, X)
        if K is None or not K.overlaps(X):
            break
        narrowed = K.intersect(X)
        if narrowed.width() >= 0.999 * X.width():
            X = narrowed
            break
        X = narrowed
    return X


def krawczyk(
    f_point: Callable[[np.ndarray], IntervalVector],
    jacobian: Callable[[IntervalVector], IntervalMatrix],
    x_approx: ArrayLike,
    *,
    radius: Optional[float] = None,
    rounds: int = KRAWCZYK_ROUNDS,
) -> IntervalVector:
    """Vector Krawczyk test around a numerical zero.

    ``f_point`` encloses f at a float point (exactly rounded when possible),
    ``jacobian`` encloses Df over a box.
    """

    m0 = np.asarray(x_approx, dtype=float)
    n = m0.shape[0]
    r = radius if radius is not None else 1e-10 * (1.0 + float(np.max(np.abs(m0))))
    X = IntervalVector(m0 - r, m0 + r).inflate(0.0)
    identity = IntervalMatrix.identity(n)
    for attempt in range(rounds):
        K = _krawczyk_image(f_point, jacobian, X, identity)
        if K is None:
            raise VerificationError("Jacobian at the candidate is numerically singular")
        if K.interior_of(X):
            return _refine_vector(f_point, jacobian, K, identity)
        if K.overlaps(X):
            narrowed = K.intersect(X)
            if float(np.max(narrowed.width())) < 0.5 * float(np.max(X.width())):
                X = narrowed
                continue
        m = K.mid()
        rad = 1.5 * K.rad() + 1e-14 * (1.0 + np.abs(m))
        X = IntervalVector(down_array(m - rad), up_array(m + rad))
        logger.debug("krawczyk round %d: max radius %.3e", attempt, float(np.max(rad)))
    raise VerificationError("Krawczyk contraction not established")


def _krawczyk_image(f_point, jacobian, X: IntervalVector, identity: IntervalMatrix) -> Optional[IntervalVector]:
    m = X.mid()
    try:
        R = np.linalg.inv(jacobian(IntervalVector.point(m)).mid())
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(R)):
        return None
    correction = -(IntervalMatrix.point(R) @ f_point(m))
    contraction = identity - IntervalMatrix.point(R) @ jacobian(X)
    return (correction + contraction @ (X - m)) + m


def _refine_vector(f_point, jacobian, X: IntervalVector, identity: IntervalMatrix) -> IntervalVector:
    for _ in range(20):
        K = _krawczyk_image(f_point, jacobian, X, identity)
        if K is None or not K.overlaps(X):
            break
        narrowed = K.intersect(X)
        if float(np.max(narrowed.width())) >= 0.99 * float(np.max(X.width())):
            X = narrowed
            break
        X = narrowed
    return X


__all__ = [
    "Interval",
    "IntervalMatrix",
    "IntervalVector",
    "add_hi",
    "add_lo",
    "down_array",
    "fraction_bounds",
    "interval_cholesky",
    "interval_sum",
    "krawczyk",
    "krawczyk_scalar",
    "mul_arrays",
    "mul_bounds",
    "pow_bounds",
    "pow_int",
    "round_down",
    "round_up",
    "sum_arrays",
    "sum_axis",
    "sum_bounds",
    "sym_eig_bounds",
    "up_array",
    "verified_inverse",
    "verify_negative_definite",
]
