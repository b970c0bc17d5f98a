import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp

from services.common import ConfigurationError
from services.interval import Interval
from services.problems import get_problem, list_problems, parse_chart
from services.problems.common import ReferenceRow, as_interval, exact_rational
from services.problems.fvks import fvks_initial_data, fvks_rhs
from services.problems.kk import DEFAULT_C1, DEFAULT_C2, DEFAULT_U_L, DEFAULT_V_L, KK_EQUILIBRIUM, KK_TYPE


def test_registry_lists_builtin_problems():
    assert [name for name, _ in list_problems()] == ["fvks", "kk", "kk-simple"]
    schema = dict(list_problems())["fvks"]
    assert [p.name for p in schema] == ["d", "N", "L", "amplitude"]
    assert schema[0].describe() == "d: int = 4"


def test_unknown_problem_and_parameter():
    with pytest.raises(ConfigurationError):
        get_problem("lorenz")
    with pytest.raises(ConfigurationError):
        get_problem("kk-simple", s=0.5)
    with pytest.raises(ConfigurationError):
        get_problem("fvks", M=3)


def test_kk_simple_definition(kk_simple):
    u, v = kk_simple.model.variables
    assert kk_simple.model.rhs == (u**2 - v, sp.Rational(1, 3) * u**3)
    assert kk_simple.qh_type == KK_TYPE
    assert kk_simple.default_chart().label == "para"
    np.testing.assert_array_equal(kk_simple.equilibrium_seed(kk_simple.default_chart()), KK_EQUILIBRIUM)
    assert kk_simple.equilibrium_seed(kk_simple.chart("dir:2:+")) is None


def test_kk_simple_initial_data_inverts_default_start(kk_simple):
    y = kk_simple.initial_data()
    w = 1.0 - (0.1**4 + 0.0001**2)
    assert y == pytest.approx((-0.1 / w, 0.0001 / w**2), rel=1e-14)


def test_kk_defaults_carry_interval_parameters():
    problem = get_problem("kk")
    assert problem.default_x0 == (-0.1, -0.8)
    values = list(problem.model.parameters.values())
    assert all(p.lo < p.hi for p in values)
    assert problem.parameters["c1"] == [Interval.from_decimal(*DEFAULT_C1).lo, Interval.from_decimal(*DEFAULT_C1).hi]
    assert not problem.model.f_tape.exact_available


def test_kk_constants_from_left_state():
    problem = get_problem("kk", u_L=DEFAULT_U_L, v_L=DEFAULT_V_L)
    c1 = Interval(*problem.parameters["c1"])
    c2 = Interval(*problem.parameters["c2"])
    assert c1.mid() == pytest.approx(Interval.from_decimal(*DEFAULT_C1).mid(), abs=1e-8)
    assert c2.mid() == pytest.approx(Interval.from_decimal(*DEFAULT_C2).mid(), abs=1e-8)
    assert problem.parameters["u_L"] == DEFAULT_U_L


def test_kk_defaults_record_left_state_of_shipped_constants():
    problem = get_problem("kk")
    assert (problem.parameters["u_L"], problem.parameters["v_L"]) == (DEFAULT_U_L, DEFAULT_V_L)
    assert problem.parameters["c2"] == [Interval.from_decimal(*DEFAULT_C2).lo, Interval.from_decimal(*DEFAULT_C2).hi]
    schema = dict(list_problems())["kk"]
    assert {p.name: p.default for p in schema}["u_L"] == DEFAULT_U_L
    assert "u_L" not in get_problem("kk", c1=("1.25", "1.26")).parameters


def test_kk_left_state_needs_both_components():
    with pytest.raises(ConfigurationError):
        get_problem("kk", u_L=1.0)
    with pytest.raises(ConfigurationError):
        get_problem("kk", s=float("nan"))


@pytest.mark.parametrize(
    "value,expected",
    [
        (Interval(1.0, 2.0), Interval(1.0, 2.0)),
        (0.5, Interval(0.5)),
        (3, Interval(3.0)),
        (("0.25", "0.5"), Interval(0.25, 0.5)),
        ([0.25, 0.5], Interval(0.25, 0.5)),
    ],
)
def test_as_interval_accepts(value, expected):
    assert as_interval(value, "c") == expected


def test_as_interval_encloses_decimal_strings():
    tenth = as_interval("0.1", "c")
    assert tenth.contains(Fraction(1, 10))
    assert tenth.lo < tenth.hi


@pytest.mark.parametrize("value", [float("inf"), float("nan"), None, {"lo": 1}])
def test_as_interval_rejects(value):
    with pytest.raises(ConfigurationError):
        as_interval(value, "c")


def test_exact_rational():
    assert exact_rational(0.1, "L") == Fraction(1, 10)
    assert exact_rational("3/4", "L") == Fraction(3, 4)
    with pytest.raises(ConfigurationError):
        exact_rational("abc", "L")


def test_parse_chart():
    assert parse_chart("PARA", KK_TYPE).is_para
    chart = parse_chart(" dir:2:- ", KK_TYPE)
    assert (chart.index, chart.sign) == (2, -1)
    for label in ("dir:2", "dir:x:+", "dir:3:+", "polar", ""):
        with pytest.raises(ConfigurationError):
            parse_chart(label, KK_TYPE)


@pytest.mark.parametrize("d,N", [(1, 3), (2, 4), (4, 4)])
def test_fvks_conserves_mass(d, N):
    u = sp.symbols(f"u1:{N + 1}")
    v = sp.symbols(f"v1:{N + 1}")
    rhs = fvks_rhs(d, N, Fraction(1), u, v)
    h = Fraction(1, N)
    weights = [sp.Rational((i - Fraction(1, 2)) * h) ** (d - 1) for i in range(1, N + 1)]
    assert sp.expand(sum(w * du for w, du in zip(weights, rhs[:N]))) == 0


def test_fvks_two_cells_in_one_dimension():
    u = sp.symbols("u1:3")
    v = sp.symbols("v1:3")
    rhs = fvks_rhs(1, 2, Fraction(1), u, v)
    # d = 1, h = 1/2: du_1 = 4 (u_2 - u_1 - (v_2 - v_1) u_1)
    assert sp.expand(rhs[0] - 4 * (u[1] - u[0] - (v[1] - v[0]) * u[0])) == 0
    assert sp.expand(rhs[2] - (4 * (v[1] - v[0]) - v[0] + u[0])) == 0


def test_fvks_problem_defaults():
    problem = get_problem("fvks")
    assert problem.model.n == 8
    assert problem.qh_type.alpha == (2, 2, 2, 2, 1, 1, 1, 1)
    assert problem.default_chart().label == "dir:1:+"
    y0 = problem.initial_data()
    assert y0[:4] == pytest.approx([100 * (1 + math.cos(math.pi * (i - 0.5) / 4)) for i in range(1, 5)])
    assert y0[4:] == (0.0,) * 4
    assert {row.chart for row in problem.reference_data} == {"dir:1:+", "para"}
    # the model compactifies without poles
    assert len(problem.model.f_tilde_exprs) == 8


def test_fvks_references_depend_on_parameters():
    assert get_problem("fvks", amplitude=50).reference_data == ()
    assert get_problem("fvks", d=4, N=12).reference_data[0].status == "failed"
    assert get_problem("fvks", d=5, N=4).reference_data == ()


@pytest.mark.parametrize("params", [{"d": 0}, {"N": 1}, {"L": 0}, {"L": -1}, {"amplitude": 0}, {"amplitude": float("inf")}])
def test_fvks_rejects_bad_parameters(params):
    with pytest.raises(ConfigurationError):
        get_problem("fvks", **params)


def test_fvks_initial_data_shape():
    data = fvks_initial_data(3, Fraction(1), 10.0)
    assert len(data) == 6
    assert data[0] > data[1] > data[2] > 0.0


def test_reference_interval():
    row = ReferenceRow(label="r", chart="para", t_max=("1.5", "1.75"))
    assert row.t_max_interval() == Interval(1.5, 1.75)
    assert ReferenceRow(label="r", chart="para").t_max_interval() is None


@pytest.mark.parametrize(
    "problem_id,params",
    [("kk-simple", {}), ("kk", {}), ("fvks", {"d": 2, "N": 2})],
)
def test_rescaled_field_approaches_quasi_homogeneous_part(problem_id, params, rng):
    # r^{-(k + alpha_j)} f_j(r^alpha y) -> (f_{alpha,k})_j(y) as r grows
    model = get_problem(problem_id, **params).model
    t = model.qh_type
    exact = {symbol: sp.Rational(value.mid()) for symbol, value in model.parameters.items()}
    rhs = [sp.sympify(f).xreplace(exact) for f in model.rhs]
    for _ in range(5):
        y = [sp.Rational(int(rng.integers(-1000, 1001)), 1000) for _ in range(t.n)]
        limit = [e.xreplace(dict(zip(model.compact_symbols, y))) for e in model.quasi_homogeneous_part]
        errors = []
        for r in (sp.Integer(10) ** 2, sp.Integer(10) ** 4, sp.Integer(10) ** 6):
            scaled = {v: r**a * y_i for v, a, y_i in zip(model.variables, t.alpha, y)}
            errors.append(
                max(abs(r ** -(t.order_k + a) * f.xreplace(scaled) - g) for f, a, g in zip(rhs, t.alpha, limit))
            )
        if problem_id == "kk-simple":
            assert errors == [0, 0, 0]
        else:
            assert errors[0] >= errors[1] >= errors[2]
            assert errors[2] <= errors[0] / 1000
