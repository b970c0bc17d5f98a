# services/certificate_store.py
"""Persistência de certificados (JSON) e trajetórias (CSV).

Intervalos são gravados como duas strings decimais [lo, hi] arredondadas para
fora com 17 dígitos significativos; o documento nunca carrega floats binários.
"""

from __future__ import annotations

import csv
import json
import math
import os
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from typing import IO, Any, Dict, List, Optional, Sequence

import numpy as np

from app.config import BLOWUP_OUTPUT_DIR, CERTIFICATE_SCHEMA, DECIMAL_DIGITS

from .blowup import BlowUpCertificate
from .common import ChartError, ConfigurationError, IntervalDomainError, get_logger
from .compact import CompactChart, chart_inverse
from .integrate import StepRecord
from .interval import Interval, IntervalVector

logger = get_logger(__name__)

_FLOOR = Context(prec=DECIMAL_DIGITS, rounding=ROUND_FLOOR)
_CEILING = Context(prec=DECIMAL_DIGITS, rounding=ROUND_CEILING)


def format_decimal(value: float, *, upward: bool) -> str:
    """Directed decimal rendering: never above (``upward=False``) or below the float."""

    value = float(value)
    if math.isnan(value):
        raise ConfigurationError("NaN não pode ser serializado")
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value == 0.0:
        return "0"
    rounded = (_CEILING if upward else _FLOOR).create_decimal(value)
    return format(rounded, f".{DECIMAL_DIGITS - 1}e")


def interval_to_json(value: Interval) -> List[str]:
    return [format_decimal(value.lo, upward=False), format_decimal(value.hi, upward=True)]


def interval_from_json(pair: Sequence[str]) -> Interval:
    if len(pair) != 2:
        raise ConfigurationError(f"intervalo malformado: {pair!r}")
    return Interval.from_decimal(str(pair[0]), str(pair[1]))


def vector_to_json(value: IntervalVector) -> List[List[str]]:
    return [interval_to_json(item) for item in value]


def vector_from_json(items: Sequence[Sequence[str]]) -> IntervalVector:
    return IntervalVector.from_intervals(interval_from_json(pair) for pair in items)


def _float_text(value: Optional[float]) -> Optional[str]:
    # repr is the shortest decimal that reads back to the same double
    return None if value is None else repr(float(value))


def _maybe_interval(value: Optional[Interval]) -> Optional[List[str]]:
    return None if value is None else interval_to_json(value)


def certificate_document(certificate: BlowUpCertificate) -> Dict[str, Any]:
    """JSON-ready document of a certificate, with the schema version."""

    doc: Dict[str, Any] = {
        "schema": CERTIFICATE_SCHEMA,
        "problem": {"id": certificate.problem_id, "parameters": _jsonable(certificate.parameters)},
        "chart": certificate.chart.label,
        "status": certificate.status,
        "failed_stage": certificate.failed_stage,
        "message": certificate.message,
        "y0": None if certificate.y0 is None else [_float_text(v) for v in certificate.y0],
        "x0": None if certificate.x0 is None else vector_to_json(certificate.x0),
        "classification": certificate.classification,
        "tau_N": _float_text(certificate.tau_N),
        "t_N": _maybe_interval(certificate.t_N),
        "L_end": None if certificate.L_end is None else format_decimal(certificate.L_end, upward=True),
        "tail": _maybe_interval(certificate.tail_bound),
        "t_max": _maybe_interval(certificate.t_max),
        "steps": certificate.steps,
        "wall_time": f"{certificate.wall_time:.3f}",
    }
    cert = certificate.cert
    if cert is not None:
        doc.update(
            {
                "x_star": vector_to_json(cert.x_star),
                "Y": [[_float_text(v) for v in row] for row in np.asarray(cert.Y)],
                "domain_radius": _float_text(cert.domain_radius),
                "eps": format_decimal(cert.eps, upward=False),
                "c_A": interval_to_json(cert.c_A),
                "lambda_min_Y": interval_to_json(cert.lam_min_Y),
                "lambda_max_Y": interval_to_json(cert.lam_max_Y),
                "c1": interval_to_json(cert.c1),
                "c_tildeN": interval_to_json(cert.c_tildeN),
            }
        )
    return doc


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, Interval):
        return interval_to_json(value)
    if isinstance(value, float):
        return _float_text(value)
    return value


def _ensure_parent(path: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)


def default_path(name: str) -> str:
    os.makedirs(BLOWUP_OUTPUT_DIR, exist_ok=True)
    return os.path.join(BLOWUP_OUTPUT_DIR, name)


def save_certificate(document: Dict[str, Any], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2, ensure_ascii=False)
        handle.write("\n")
    logger.info("certificado salvo em %s (status=%s)", path, document.get("status"))
    return path


def load_certificate(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"certificado ilegível em {path}: {exc}") from exc
    if not isinstance(document, dict) or document.get("schema") != CERTIFICATE_SCHEMA:
        raise ConfigurationError(f"versão de esquema não suportada em {path}")
    return document


# ---------------------------------------------------------------------------
# CSV traces
# ---------------------------------------------------------------------------


def trace_header(chart: CompactChart) -> List[str]:
    n = chart.qh_type.n
    header = ["tau", "t_lo", "t_hi"]
    for i in range(1, chart.dim + 1):
        header += [f"x{i}_lo", f"x{i}_hi"]
    for j in range(1, n + 1):
        header += [f"y{j}_lo", f"y{j}_hi"]
    return header


def trace_row(record: StepRecord, chart: CompactChart) -> List[str]:
    box = record.endpoint
    row = [repr(record.tau.hi)] + interval_to_json(record.t_elapsed)
    for item in box:
        row += interval_to_json(item)
    try:
        original: Optional[IntervalVector] = chart_inverse(box, chart)
    except (ChartError, IntervalDomainError):
        original = None
    for j in range(chart.qh_type.n):
        if original is None:
            row += ["-inf", "inf"]
        else:
            row += interval_to_json(original[j])
    return row


class TraceWriter:
    """``on_step`` hook that streams accepted steps into a CSV file."""

    def __init__(self, handle: IO[str], chart: CompactChart) -> None:
        self.chart = chart
        self.rows = 0
        self._writer = csv.writer(handle)
        self._writer.writerow(trace_header(chart))

    def __call__(self, record: StepRecord) -> None:
        self._writer.writerow(trace_row(record, self.chart))
        self.rows += 1


__all__ = [
    "TraceWriter",
    "certificate_document",
    "default_path",
    "format_decimal",
    "interval_from_json",
    "interval_to_json",
    "load_certificate",
    "save_certificate",
    "trace_header",
    "trace_row",
    "vector_from_json",
    "vector_to_json",
]
