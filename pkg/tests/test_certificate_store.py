import csv
import io
import json
from decimal import Decimal

import pytest

from services.blowup import BlowUpCertificate, validate_blowup
from services.common import ConfigurationError
from services.compact import CompactChart
from services.integrate import StepRecord
from services.interval import Interval, IntervalVector
from services.certificate_store import (
    TraceWriter,
    certificate_document,
    format_decimal,
    interval_from_json,
    interval_to_json,
    load_certificate,
    save_certificate,
    trace_header,
    trace_row,
    vector_from_json,
    vector_to_json,
)
from services.problems.kk import KK_EQUILIBRIUM, KK_TYPE


@pytest.fixture(scope="module")
def near_sink_certificate(kk_simple):
    x0 = tuple(0.99999 * v for v in KK_EQUILIBRIUM)
    return validate_blowup(kk_simple, kk_simple.default_chart(), x0=x0)


@pytest.mark.parametrize("value", [0.1, -0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 84.083853417007874])
def test_directed_decimal_rendering(value):
    down = format_decimal(value, upward=False)
    up = format_decimal(value, upward=True)
    assert Decimal(down) <= Decimal(value) <= Decimal(up)
    assert len(down.split("e")[0].replace("-", "").replace(".", "")) == 17


def test_special_values():
    assert format_decimal(0.0, upward=True) == "0"
    assert format_decimal(float("inf"), upward=False) == "inf"
    assert format_decimal(float("-inf"), upward=True) == "-inf"
    with pytest.raises(ConfigurationError):
        format_decimal(float("nan"), upward=True)


def test_interval_json_encloses_the_interval(rng):
    for _ in range(200):
        lo, hi = sorted(rng.normal(scale=1e3, size=2))
        original = Interval(lo, hi)
        restored = interval_from_json(interval_to_json(original))
        assert restored.contains(original)
    with pytest.raises(ConfigurationError):
        interval_from_json(["1"])


def test_vector_json():
    box = IntervalVector([0.1, -2.0], [0.2, -1.0])
    assert vector_from_json(vector_to_json(box)).contains(box)


def test_failed_certificate_document():
    certificate = BlowUpCertificate(
        problem_id="kk-simple",
        chart=CompactChart.para(KK_TYPE),
        failed_stage="integration",
        message="IntegrationLimitError: tau_max",
        parameters={"s": Interval(0.25, 0.5), "d": 4},
    )
    doc = certificate_document(certificate)
    assert doc["schema"] == 1
    assert doc["status"] == "failed"
    assert doc["failed_stage"] == "integration"
    assert doc["t_max"] is None and doc["x0"] is None
    assert doc["problem"]["parameters"] == {"s": ["2.5000000000000000e-1", "5.0000000000000000e-1"], "d": 4}
    assert "x_star" not in doc
    json.dumps(doc)


def test_succeeded_certificate_round_trip(near_sink_certificate, tmp_path):
    doc = certificate_document(near_sink_certificate)
    assert doc["status"] == "succeeded"
    assert doc["chart"] == "para"
    assert interval_from_json(doc["t_max"]).contains(near_sink_certificate.t_max)
    assert vector_from_json(doc["x_star"]).contains(near_sink_certificate.cert.x_star)
    assert Decimal(doc["eps"]) <= Decimal(near_sink_certificate.cert.eps)
    assert vector_from_json(doc["x0"]).contains(near_sink_certificate.x0)
    path = save_certificate(doc, str(tmp_path / "nested" / "certificate.json"))
    assert load_certificate(path) == doc


def test_load_rejects_unknown_schema_and_garbage(tmp_path):
    stale = tmp_path / "stale.json"
    stale.write_text(json.dumps({"schema": 99}), encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_certificate(str(stale))
    garbage = tmp_path / "garbage.json"
    garbage.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_certificate(str(garbage))
    with pytest.raises(ConfigurationError):
        load_certificate(str(tmp_path / "missing.json"))


def _record(endpoint):
    return StepRecord(
        index=0,
        tau=Interval(0.0, 0.5),
        h=0.5,
        coarse_box=endpoint,
        endpoint=endpoint,
        t_elapsed=Interval(0.25, 0.375),
    )


def test_trace_header_and_rows():
    chart = CompactChart.para(KK_TYPE)
    header = trace_header(chart)
    assert header == ["tau", "t_lo", "t_hi", "x1_lo", "x1_hi", "x2_lo", "x2_hi", "y1_lo", "y1_hi", "y2_lo", "y2_hi"]
    row = trace_row(_record(IntervalVector.point([0.5, 0.0])), chart)
    assert len(row) == len(header)
    assert row[0] == "0.5"
    # 1 - p^4 = 15/16, y = (0.5 * 16/15, 0)
    assert Interval.from_decimal(row[7], row[8]).contains(0.5 * 16 / 15)
    horizon = trace_row(_record(IntervalVector.point([1.0, 0.0])), chart)
    assert horizon[-4:] == ["-inf", "inf", "-inf", "inf"]


def test_trace_writer_streams_csv():
    chart = CompactChart.directional(KK_TYPE, 2, 1)
    handle = io.StringIO()
    writer = TraceWriter(handle, chart)
    writer(_record(IntervalVector.point([0.5, 0.2])))
    writer(_record(IntervalVector.point([0.0, 0.2])))
    assert writer.rows == 2
    rows = list(csv.reader(io.StringIO(handle.getvalue())))
    assert rows[0][:5] == ["tau", "t_lo", "t_hi", "x1_lo", "x1_hi"]
    assert len(rows) == 3
    assert rows[2][-4:] == ["-inf", "inf", "-inf", "inf"]
