"""``trace``: CSV of every accepted step, compactified and mapped back."""

from __future__ import annotations

import sys
from typing import Optional, TextIO

from app.commands.validate import EXIT_FAILED, EXIT_OK, run_validation, summary_line
from app.run_config import RunConfig
from services.certificate_store import TraceWriter, default_path
from services.problems import get_problem


def cmd_trace(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    stream = stream or sys.stdout
    path = config.trace or config.out or default_path("trace.csv")
    problem = get_problem(config.problem, **dict(config.params))
    chart = problem.chart(config.chart)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = TraceWriter(handle, chart)
        certificate = run_validation(config, on_step=writer, problem=problem)
    print(f"{summary_line(certificate)} -> {path} ({writer.rows} linhas)", file=stream)
    return EXIT_OK if certificate.succeeded else EXIT_FAILED
