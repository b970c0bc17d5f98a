import numpy as np
import pytest

from services.common import ChartError, ConfigurationError
from services.compact import (
    CompactChart,
    QHType,
    chart_forward,
    chart_inverse,
    dir_forward,
    dir_inverse,
    horizon_point_from_direction,
    make_type,
    p_power,
    p_power_float,
    para_forward,
    para_inverse,
    quasi_poincare_kappa,
    reflect,
    solve_kappa,
)
from services.interval import Interval, IntervalVector

KK = make_type((1, 2), 1)
FVKS_SMALL = make_type((2, 2, 1, 1), 1)


def test_make_type_derives_exponents():
    assert KK.beta == (2, 1)
    assert KK.c == 2
    assert FVKS_SMALL.c == 2
    assert FVKS_SMALL.beta == (1, 1, 2, 2)
    mixed = make_type((2, 3), 0)
    assert mixed.c == 6 and mixed.beta == (3, 2)


@pytest.mark.parametrize("alpha,k", [((), 1), ((1, 0), 1), ((1, -2), 1), ((1, 2), -1)])
def test_make_type_rejects_bad_input(alpha, k):
    with pytest.raises(ConfigurationError):
        make_type(alpha, k)


def test_qh_type_checks_products():
    with pytest.raises(ConfigurationError):
        QHType(alpha=(1, 2), beta=(2, 2), c=2, order_k=1)


def test_chart_labels_and_validation():
    assert CompactChart.para(KK).label == "para"
    assert CompactChart.directional(KK, 2, -1).label == "dir:2:-"
    assert CompactChart.directional(KK, 1, 1).other_indices() == (1,)
    for index, sign in ((0, 1), (3, 1), (1, 2)):
        with pytest.raises(ConfigurationError):
            CompactChart.directional(KK, index, sign)
    with pytest.raises(ConfigurationError):
        CompactChart("polar", KK)


def test_kappa_at_the_origin_is_one():
    assert solve_kappa(Interval(0.0), KK.c).contains(1.0)


@pytest.mark.parametrize("alpha", [(1, 2), (1, 1), (2, 2, 1, 1)])
def test_para_round_trip_encloses_original_point(alpha, rng):
    t = make_type(alpha, 1)
    for _ in range(1000):
        y = rng.normal(scale=10.0, size=len(alpha))
        x, kappa = para_forward(IntervalVector.point(y), t)
        assert kappa.lo >= 1.0
        assert p_power(x, t).hi < 1.0
        assert para_inverse(x, t).contains(y)


def test_para_image_satisfies_horizon_identity(rng):
    # p(x)^{2c} = 1 - 1/kappa
    for _ in range(50):
        y = rng.normal(scale=3.0, size=4)
        x, kappa = para_forward(IntervalVector.point(y), FVKS_SMALL)
        assert (1 - p_power(x, FVKS_SMALL)).overlaps(1 / kappa)


def test_para_inverse_rejects_horizon():
    with pytest.raises(ChartError):
        para_inverse(IntervalVector.point([1.0, 0.0]), KK)
    with pytest.raises(ChartError):
        para_inverse(IntervalVector.point([0.0, 1.5]), KK)


def test_directional_round_trip(rng):
    chart = CompactChart.directional(FVKS_SMALL, 1, 1)
    for _ in range(50):
        y = rng.normal(size=4)
        y[0] = abs(y[0]) + 0.5
        s, x = dir_forward(IntervalVector.point(y), chart)
        assert s.lo > 0.0
        assert len(x) == 3
        assert dir_inverse(s, x, chart).contains(y)


def test_directional_chart_rejects_wrong_sign():
    chart = CompactChart.directional(KK, 1, 1)
    with pytest.raises(ChartError):
        dir_forward(IntervalVector.point([-1.0, 3.0]), chart)
    with pytest.raises(ChartError):
        dir_inverse(Interval(0.0, 0.1), IntervalVector.point([0.2]), chart)


@pytest.mark.parametrize("label", ["para", "dir:2:+", "dir:1:-"])
def test_chart_forward_inverse_agree(label):
    chart = (
        CompactChart.para(KK)
        if label == "para"
        else CompactChart.directional(KK, int(label.split(":")[1]), 1 if label.endswith("+") else -1)
    )
    y = np.array([-0.7, 2.5])
    state = chart_forward(IntervalVector.point(y), chart)
    assert len(state) == 2
    assert chart_inverse(state, chart).contains(y)


def test_horizon_point_from_direction_lies_on_horizon():
    chart = CompactChart.directional(KK, 2, -1)
    point = horizon_point_from_direction(chart, [0.5])
    assert p_power_float(point, KK) == pytest.approx(1.0, abs=1e-14)
    assert point[0] > 0.0 and point[1] < 0.0


def test_reflect_flips_odd_weights():
    np.testing.assert_array_equal(reflect(np.array([0.3, -0.2]), KK), [-0.3, -0.2])
    box = reflect(IntervalVector([0.1, 1.0], [0.2, 2.0]), KK)
    assert box.contains(np.array([-0.15, 1.5]))
    assert box[0].lo == -0.2 and box[0].hi == -0.1


def test_quasi_poincare_kappa():
    assert quasi_poincare_kappa(np.zeros(2), KK) == 1.0
    assert quasi_poincare_kappa(np.array([1.0, 0.0]), KK) == pytest.approx(2.0 ** 0.25)
