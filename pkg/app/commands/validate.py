"""``validate``: run the pipeline and write certificates (optionally a PDF report)."""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence, TextIO, Tuple

from app.run_config import RunConfig
from app.utils import format_interval
from services.blowup import BlowUpCertificate, validate_blowup
from services.certificate_store import certificate_document, default_path, save_certificate
from services.common import get_logger
from services.integrate import StepRecord
from services.problems import ProblemSpec, get_problem
from services.report import createCertificatePdf

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2


def run_validation(
    config: RunConfig,
    on_step: Optional[Callable[[StepRecord], None]] = None,
    problem: Optional[ProblemSpec] = None,
) -> BlowUpCertificate:
    problem = problem or get_problem(config.problem, **dict(config.params))
    chart = problem.chart(config.chart)
    return validate_blowup(problem, chart, config.y0, x0=config.x0, options=config.options(), on_step=on_step)


def summary_line(certificate: BlowUpCertificate) -> str:
    head = f"{certificate.problem_id} [{certificate.chart.label}]"
    if certificate.succeeded:
        return f"{head}: succeeded t_max={format_interval(certificate.t_max)} tau_N={certificate.tau_N:.6g} ({certificate.wall_time:.1f}s)"
    return f"{head}: failed stage={certificate.failed_stage} {certificate.message}"


def _validate_and_store(job: Tuple[RunConfig, str]) -> Tuple[int, str]:
    config, out_path = job
    certificate = run_validation(config)
    document = certificate_document(certificate)
    save_certificate(document, out_path)
    if config.report:
        createCertificatePdf(document, config.report)
    code = EXIT_OK if certificate.succeeded else EXIT_FAILED
    return code, f"{summary_line(certificate)} -> {out_path}"


def _output_path(config: RunConfig, index: int, total: int) -> str:
    if config.out:
        return config.out
    name = "certificate.json" if total == 1 else f"certificate_{index:03d}.json"
    return default_path(name)


def cmd_validate(configs: Sequence[RunConfig], jobs: int = 1, stream: Optional[TextIO] = None) -> int:
    """0 if every run succeeded, 2 if any failed."""

    stream = stream or sys.stdout

    work: List[Tuple[RunConfig, str]] = [
        (config, _output_path(config, index, len(configs))) for index, config in enumerate(configs)
    ]
    if jobs > 1 and len(work) > 1:
        logger.info("sweep of %d runs on %d processes", len(work), jobs)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_validate_and_store, work))
    else:
        results = [_validate_and_store(job) for job in work]
    for _, line in results:
        print(line, file=stream)
    return max(code for code, _ in results) if results else EXIT_OK
