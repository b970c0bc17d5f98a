from fractions import Fraction
from math import factorial

import numpy as np
import pytest
import sympy as sp

from services.common import ConfigurationError, VerificationError
from services.interval import Interval, IntervalVector
from services.tape import PolynomialTape, TaylorSeries

x, y, a = sp.symbols("x y a")


@pytest.fixture(scope="module")
def tape():
    return PolynomialTape([x**2 * y + sp.Rational(3, 2) * x - y, -x * y**3 + 7], [x, y])


def _exact(px, py):
    return [px**2 * py + Fraction(3, 2) * px - py, -px * py**3 + 7]


def test_float_evaluation_matches_numpy(tape, rng):
    pts = rng.normal(size=(2, 20))
    values = tape.evaluate_float(pts)
    assert values.shape == (2, 20)
    expected = np.array([pts[0] ** 2 * pts[1] + 1.5 * pts[0] - pts[1], -pts[0] * pts[1] ** 3 + 7])
    np.testing.assert_allclose(values, expected, rtol=1e-13, atol=1e-13)


def test_exact_and_interval_evaluation_enclose_the_value(tape, rng):
    for _ in range(200):
        px, py = rng.normal(size=2)
        exact = _exact(Fraction(px), Fraction(py))
        assert tape.evaluate_exact([px, py]) == exact
        box = tape.evaluate_interval(IntervalVector.point([px, py]))
        point = tape.evaluate_point([px, py])
        for i in range(2):
            assert box[i].contains(exact[i])
            assert point[i].contains(exact[i])
            assert point[i].width() <= box[i].width()


def test_interval_parameters_block_exact_evaluation():
    scaled = PolynomialTape([a * x], [x], {a: Interval(1.0, 2.0)})
    assert not scaled.exact_available
    assert scaled.evaluate_interval(IntervalVector.point([3.0]))[0].contains(Interval(3.0, 6.0))
    with pytest.raises(VerificationError):
        scaled.evaluate_exact([1.0])


def test_float_constants_and_negative_powers_are_rejected():
    with pytest.raises(ConfigurationError):
        PolynomialTape([sp.Float(0.5) * x], [x])
    with pytest.raises(ConfigurationError):
        PolynomialTape([x**-1], [x])
    with pytest.raises(ConfigurationError):
        PolynomialTape([x * y], [x])


def test_matrix_shape():
    jac = sp.Matrix([x**2 + y, x * y]).jacobian([x, y])
    tape = PolynomialTape.from_matrix(jac, [x, y])
    M = tape.evaluate_interval(IntervalVector.point([2.0, 3.0]))
    assert M.shape == (2, 2)
    assert M.contains(np.array([[4.0, 1.0], [3.0, 2.0]]))


def test_ode_series_of_riccati_equation():
    # x' = x^2, x(0) = 1 has x(t) = 1 / (1 - t)
    riccati = PolynomialTape([x**2], [x])
    states, _ = riccati.ode_series(IntervalVector.point([1.0]), 8)
    assert states.order == 8
    for k in range(9):
        assert states.coefficient(k)[0].contains(1.0)


def test_ode_series_of_linear_decay_with_rider_output():
    # x' = -x with the rider x^2
    decay = PolynomialTape([-x, x**2], [x])
    states, outputs = decay.ode_series(IntervalVector.point([1.0]), 6)
    for k in range(7):
        assert states.coefficient(k)[0].contains(Fraction((-1) ** k, factorial(k)))
    # (e^{-t})^2 = e^{-2t}
    for k in range(7):
        assert outputs.coefficient(k)[1].contains(Fraction((-2) ** k, factorial(k)))


def test_series_propagation_of_a_cube():
    cube = PolynomialTape([x**3], [x])
    lo = np.array([[1.0, 1.0, 0.0, 0.0, 0.0]])
    result = cube.series(TaylorSeries(lo, lo.copy()))
    for k, expected in enumerate([1, 3, 3, 1, 0]):
        assert result.coefficient(k)[0].contains(float(expected))
