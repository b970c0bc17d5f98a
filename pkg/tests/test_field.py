import numpy as np
import pytest
import sympy as sp

from services.common import ConfigurationError
from services.compact import CompactChart, chart_forward, make_type, reflect
from services.field import (
    VectorFieldModel,
    desing_dir,
    desingularize,
    directional_matrices,
    horizon_residual,
    para_parts,
    symmetry_signs,
)
from services.interval import IntervalVector
from services.problems import get_problem

u, v = sp.symbols("u v")


def test_para_parts_of_kk_simple(kk_simple):
    parts = para_parts(kk_simple.model)
    x1, x2 = kk_simple.model.compact_symbols
    assert sp.expand(parts["P"] - (x1**4 + x2**2)) == 0
    assert sp.expand(parts["G"] - (x1**3 * (x1**2 - x2) + x1**3 * x2 / 6)) == 0
    assert sp.expand(parts["F"] - (1 - sp.Rational(3, 4) * (1 - x1**4 - x2**2))) == 0
    assert kk_simple.model.quasi_homogeneous_part == kk_simple.model.f_tilde_exprs


def test_para_field_vanishes_at_origin(kk_simple_para):
    assert kk_simple_para.g_point([0.0, 0.0]).contains(np.zeros(2))
    assert kk_simple_para.dt_dtau(IntervalVector.point([0.0, 0.0])).contains(0.25)


@pytest.mark.parametrize("problem_id", ["kk-simple", "kk"])
def test_horizon_residual_encloses_zero(problem_id, rng):
    problem = get_problem(problem_id)
    field = desingularize(problem.model, problem.default_chart())
    for _ in range(1000):
        x = rng.uniform(-0.7, 0.7, size=2)
        assert horizon_residual(field, IntervalVector.point(x)).contains(0.0)


def test_para_field_is_reflection_symmetric(kk_simple_para, rng):
    t = kk_simple_para.chart.qh_type
    signs = np.array(symmetry_signs(kk_simple_para), dtype=float)
    assert tuple(signs) == (1.0, -1.0)
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, size=2)
        np.testing.assert_allclose(kk_simple_para.g_float(reflect(x, t)), signs * kk_simple_para.g_float(x), atol=1e-14)


def _chart_velocity(field, chart, y, h=1e-6):
    """Central-difference derivative of the chart map along f, divided by dt/dtau."""

    model = field.model
    f = model.f_float(y)
    forward = chart_forward(IntervalVector.point(y + h * f), chart).mid()
    backward = chart_forward(IntervalVector.point(y - h * f), chart).mid()
    return (forward - backward) / (2 * h)


@pytest.mark.parametrize("label", ["para", "dir:2:+", "dir:1:-"])
def test_desingularized_field_matches_time_rescaled_flow(label):
    problem = get_problem("kk")
    chart = problem.chart(label)
    field = desingularize(problem.model, chart)
    y = np.array([-1.3, 2.1])
    state = chart_forward(IntervalVector.point(y), chart).mid()
    g = field.g_float(state)
    q = float(field.dt_dtau_float(state))
    np.testing.assert_allclose(g / q, _chart_velocity(field, chart, y), rtol=1e-6, atol=1e-8)


def test_directional_field_of_kk_simple(kk_simple):
    chart = kk_simple.chart("dir:2:+")
    field = desing_dir(kk_simple.model, chart)
    s, x = field.symbols
    assert sp.expand(field.g_exprs[0] + s * x**3 / 6) == 0
    assert sp.expand(field.g_exprs[1] - (x**2 - 1 - x**4 / 6)) == 0
    assert field.q_expr == s
    horizon = field.horizon_subsystem
    assert sp.expand(horizon.exprs[0] - (x**2 - 1 - x**4 / 6)) == 0


def test_horizon_subsystem_needs_directional_chart(kk_simple_para):
    with pytest.raises(ConfigurationError):
        kk_simple_para.horizon_subsystem


def test_directional_matrices_are_inverse():
    t = make_type((2, 2, 1, 1), 1)
    chart = CompactChart.directional(t, 3, -1)
    s = sp.Symbol("s")
    xs = sp.symbols("x1 x2 x4")
    M, B = directional_matrices(chart, s, xs)
    assert sp.expand(B * M) == sp.eye(4)
    assert B[0, 2] == sp.Rational(-1, 1)


def test_model_rejects_mismatched_dimensions():
    with pytest.raises(ConfigurationError):
        VectorFieldModel(variables=(u, v), rhs=(u,), qh_type=make_type((1, 2), 1))


def test_model_rejects_type_that_leaves_poles():
    model = VectorFieldModel(variables=(u, v), rhs=(u**3, v), qh_type=make_type((1, 2), 1))
    with pytest.raises(ConfigurationError):
        model.f_tilde_exprs


def _random_state(chart, rng):
    n = chart.qh_type.n
    if chart.is_para:
        return rng.uniform(-0.5, 0.5, size=n)
    x = rng.uniform(-0.5, 0.5, size=n)
    x[0] = rng.uniform(0.05, 0.5)
    return x


@pytest.mark.parametrize(
    "problem_id,params",
    [("kk-simple", {}), ("kk", {}), ("fvks", {"d": 2, "N": 2})],
)
@pytest.mark.parametrize("label", ["para", "dir:1:+", "dir:2:-"])
def test_jacobian_matches_central_differences(problem_id, params, label, rng):
    problem = get_problem(problem_id, **params)
    field = desingularize(problem.model, problem.chart(label))
    h = 1e-6
    for _ in range(10):
        x = _random_state(field.chart, rng)
        D = field.eval_Dg(IntervalVector.point(x)).mid()
        fd = np.empty_like(D)
        for j in range(len(x)):
            step = np.zeros_like(x)
            step[j] = h
            plus = field.eval_g(IntervalVector.point(x + step)).mid()
            minus = field.eval_g(IntervalVector.point(x - step)).mid()
            fd[:, j] = (plus - minus) / (2 * h)
        scale = max(1.0, float(np.max(np.abs(D))))
        assert float(np.max(np.abs(fd - D))) <= 1e-6 * scale
