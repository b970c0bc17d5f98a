"""Run configuration: flags plus an optional TOML file, flags win."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from app.config import INTEGRATOR_TOL, TAU_MAX, TAYLOR_ORDER
from app.utils import parse_vector
from services.blowup import ValidationOptions
from services.common import ConfigurationError

_RUN_KEYS = {
    "problem", "params", "chart", "x0", "y0", "tol", "tau_max", "order",
    "eps", "out", "report", "trace",
}


@dataclass(frozen=True)
class RunConfig:
    problem: str
    params: Mapping[str, Any] = field(default_factory=dict)
    chart: Optional[str] = None
    x0: Optional[Tuple[float, ...]] = None
    y0: Optional[Tuple[float, ...]] = None
    tol: float = INTEGRATOR_TOL
    tau_max: float = TAU_MAX
    order: int = TAYLOR_ORDER
    eps_override: Optional[float] = None
    out: Optional[str] = None
    report: Optional[str] = None
    trace: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.problem:
            raise ConfigurationError("--problem é obrigatório")
        if self.x0 is not None and self.y0 is not None:
            raise ConfigurationError("informe apenas um entre x0 e y0")
        if not self.tol > 0.0:
            raise ConfigurationError(f"tolerância deve ser positiva: {self.tol}")
        if self.tau_max < 0.0:
            raise ConfigurationError(f"tau_max deve ser não negativo: {self.tau_max}")
        if self.order < 1:
            raise ConfigurationError(f"ordem de Taylor deve ser >= 1: {self.order}")
        if self.eps_override is not None and not self.eps_override > 0.0:
            raise ConfigurationError(f"eps deve ser positivo: {self.eps_override}")

    def options(self) -> ValidationOptions:
        return ValidationOptions(tol=self.tol, tau_max=self.tau_max, order=self.order, eps_override=self.eps_override)


def _from_mapping(values: Mapping[str, Any]) -> RunConfig:
    unknown = sorted(set(values) - _RUN_KEYS)
    if unknown:
        raise ConfigurationError(f"chaves desconhecidas na configuração: {', '.join(unknown)}")
    try:
        return RunConfig(
            problem=str(values.get("problem") or ""),
            params=dict(values.get("params") or {}),
            chart=values.get("chart"),
            x0=parse_vector(values.get("x0"), "x0"),
            y0=parse_vector(values.get("y0"), "y0"),
            tol=float(values.get("tol", INTEGRATOR_TOL)),
            tau_max=float(values.get("tau_max", TAU_MAX)),
            order=int(values.get("order", TAYLOR_ORDER)),
            eps_override=None if values.get("eps") is None else float(values["eps"]),
            out=values.get("out"),
            report=values.get("report"),
            trace=values.get("trace"),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"configuração inválida: {exc}") from exc


def load_run_file(path: str) -> Tuple[Dict[str, Any], List[Dict[str, Any]]]:
    """Top-level defaults and the ``[[runs]]`` entries of a TOML file."""

    try:
        with open(path, "rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigurationError(f"arquivo de configuração ilegível: {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"TOML inválido em {path}: {exc}") from exc
    runs = data.pop("runs", [])
    if not isinstance(runs, list) or not all(isinstance(r, dict) for r in runs):
        raise ConfigurationError("'runs' deve ser uma lista de tabelas [[runs]]")
    return data, runs


def _merge(base: Mapping[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if value is None:
            continue
        if key == "params":
            merged["params"] = {**(merged.get("params") or {}), **value}
        else:
            merged[key] = value
    return merged


def build_run_configs(flags: Mapping[str, Any], path: Optional[str] = None) -> List[RunConfig]:
    """One RunConfig per ``[[runs]]`` entry (or a single one); flags override the file."""

    defaults: Dict[str, Any] = {}
    runs: List[Dict[str, Any]] = [{}]
    if path:
        defaults, file_runs = load_run_file(path)
        runs = file_runs or [{}]
    if flags.get("x0") is not None or flags.get("y0") is not None:
        # an explicit start on the command line replaces the file's choice of space
        defaults = {k: v for k, v in defaults.items() if k not in ("x0", "y0")}
        runs = [{k: v for k, v in run.items() if k not in ("x0", "y0")} for run in runs]
    return [_from_mapping(_merge(_merge(defaults, run), flags)) for run in runs]


__all__ = ["RunConfig", "build_run_configs", "load_run_file"]
