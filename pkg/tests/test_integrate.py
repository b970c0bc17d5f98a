from fractions import Fraction
import math

import numpy as np
import pytest
import scipy.integrate
import sympy as sp

from services.common import IntegrationLimitError, StepUnderflowError
from services.field import DesingularizedField
from services.integrate import (
    IntegratorSettings,
    LohnerSet,
    accumulate_time,
    apriori_enclosure,
    integrate_until,
    step,
)
from services.interval import Interval, IntervalVector

x, y = sp.symbols("x y")

DECAY = DesingularizedField.from_exprs([x], [-x])
RICCATI = DesingularizedField.from_exprs([x], [x**2])
ROTATION = DesingularizedField.from_exprs([x, y], [-y, x])
# dt/dtau = x on the decay field, so t(tau) = 1 - e^{-tau}
DECAY_CLOCK = DesingularizedField.from_exprs([x], [-x], q_expr=x)


def test_apriori_enclosure_contains_the_step():
    X = IntervalVector.point([1.0])
    Y = apriori_enclosure(RICCATI, X, 0.1)
    assert Y is not None
    assert Y.contains(np.array([1.0 / 0.9]))
    assert apriori_enclosure(RICCATI, X, 5.0) is None


def test_single_step_of_linear_decay():
    result = step(DECAY, IntervalVector.point([1.0]), 0.1)
    assert result.h == pytest.approx(0.1, rel=0.5)
    assert result.endpoint[0].contains(math.exp(-result.h))
    assert result.dt.contains(result.h)
    assert result.endpoint[0].width() < 1e-9
    assert isinstance(result.lohner, LohnerSet)


def test_step_shrinks_towards_a_singularity():
    result = step(RICCATI, IntervalVector.point([1.0]), 0.5)
    assert result.h <= 0.5
    exact = 1 / (1 - Fraction(result.h))
    assert result.endpoint[0].contains(exact)
    assert result.coarse_box[0].contains(exact)


def test_step_underflow_is_reported():
    settings = IntegratorSettings(h_min=0.4)
    with pytest.raises(StepUnderflowError):
        step(RICCATI, IntervalVector.point([1.0]), 0.5, settings=settings)


def test_rotation_quarter_turn_encloses_exact_flow():
    records = []
    trajectory = integrate_until(
        ROTATION,
        IntervalVector.point([1.0, 0.0]),
        stop=lambda box: box[1].lo > 0.999,
        tau_max=10.0,
        settings=IntegratorSettings(h_max=0.05),
        on_step=records.append,
    )
    assert records == trajectory.steps
    assert 1.4 < trajectory.tau_end < 1.7
    for record in trajectory.steps:
        tau = record.tau.hi
        exact = np.array([math.cos(tau), math.sin(tau)])
        assert record.endpoint.inflate(1e-10).contains(exact)
    assert abs(trajectory.t_elapsed.mid() - trajectory.tau_end) < 1e-12


def test_tau_clock_accumulates_physical_time():
    trajectory = integrate_until(
        DECAY_CLOCK,
        IntervalVector.point([1.0]),
        stop=lambda box: box[0].hi < 0.5,
        tau_max=5.0,
    )
    # x = e^{-tau}, t = 1 - x
    x_end = trajectory.endpoint[0]
    t_end = trajectory.t_elapsed
    assert t_end.overlaps(1 - x_end)
    assert t_end.width() < 1e-8


def test_accumulate_time_bounds_one_step():
    coarse = IntervalVector([0.5], [1.0])
    assert accumulate_time(DECAY_CLOCK, coarse, 0.2).contains(Interval(0.1, 0.2))


def test_stop_at_start_returns_empty_trajectory():
    x0 = IntervalVector.point([0.1])
    trajectory = integrate_until(DECAY, x0, stop=lambda box: True, tau_max=1.0)
    assert trajectory.steps == []
    assert trajectory.endpoint is x0
    assert trajectory.t_elapsed == Interval(0.0)


def test_tau_limit_raises():
    with pytest.raises(IntegrationLimitError):
        integrate_until(DECAY, IntervalVector.point([1.0]), stop=lambda box: False, tau_max=0.0)
    with pytest.raises(IntegrationLimitError):
        integrate_until(DECAY, IntervalVector.point([1.0]), stop=lambda box: False, tau_max=0.3)


def test_last_step_is_clamped_to_tau_limit():
    records = []
    with pytest.raises(IntegrationLimitError):
        integrate_until(
            DECAY,
            IntervalVector.point([1.0]),
            stop=lambda box: False,
            tau_max=0.3,
            settings=IntegratorSettings(h0=0.2, h_max=0.2),
            on_step=records.append,
        )
    assert records
    assert records[-1].tau.hi <= 0.3 + 1e-15


# x' = y, y' = -x + (1 - x^2) y
VAN_DER_POL = DesingularizedField.from_exprs([x, y], [y, -x + (1 - x**2) * y])


def test_float_flow_stays_in_coarse_boxes():
    x0 = np.array([0.5, 0.25])
    records = []
    with pytest.raises(IntegrationLimitError):
        integrate_until(
            VAN_DER_POL,
            IntervalVector([0.5 - 1e-6, 0.25 - 1e-6], [0.5 + 1e-6, 0.25 + 1e-6]),
            stop=lambda box: False,
            tau_max=3.0,
            settings=IntegratorSettings(h_max=0.1),
            on_step=records.append,
        )
    solution = scipy.integrate.solve_ivp(
        lambda _tau, state: VAN_DER_POL.g_float(state),
        (0.0, records[-1].tau.hi),
        x0,
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    for record in records:
        for tau in np.linspace(record.tau.lo, record.tau.hi, 5):
            assert record.coarse_box.inflate(1e-9).contains(solution.sol(tau))
