"""Command-line parser and dispatch assembled from the command modules."""

from __future__ import annotations

import argparse
import sys
from typing import Any, Dict, List, Optional, Sequence

from app.commands.catalog import cmd_list
from app.commands.trace import cmd_trace
from app.commands.validate import EXIT_USAGE, cmd_validate
from app.run_config import build_run_configs
from app.utils import parse_params, parse_vector
from services.common import ConfigurationError


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: erro: {message}\n")


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--problem", help="identificador do problema (veja 'list')")
    parser.add_argument("--chart", help="'para' ou 'dir:<i>:<+|->'")
    start = parser.add_mutually_exclusive_group()
    start.add_argument("--x0", help="dado inicial compactificado, reais separados por vírgula")
    start.add_argument("--y0", help="dado inicial no espaço original, reais separados por vírgula")
    parser.add_argument("--tol", type=float, help="tolerância do integrador")
    parser.add_argument("--tau-max", dest="tau_max", type=float, help="limite do tempo tau")
    parser.add_argument("--order", type=int, help="ordem de Taylor")
    parser.add_argument("--eps", type=float, help="limiar de parada menor que o eps certificado")
    parser.add_argument("--d", type=int, help="fvks: dimensão espacial")
    parser.add_argument("--N", dest="N", type=int, help="fvks: número de células")
    parser.add_argument("--L", dest="L", help="fvks: raio do domínio")
    parser.add_argument("--amplitude", type=float, help="fvks: amplitude do dado inicial")
    parser.add_argument("--param", action="append", metavar="NOME=VALOR", help="parâmetro do problema (repetível)")
    parser.add_argument("--config", help="arquivo TOML; as flags têm precedência")
    parser.add_argument("--out", help="arquivo de saída")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blowup", description="Enclosures validadas de tempos de explosão.")
    commands = parser.add_subparsers(dest="command", parser_class=_Parser)

    validate = commands.add_parser("validate", help="valida uma solução e escreve o certificado")
    _add_run_arguments(validate)
    validate.add_argument("--report", help="relatório PDF do certificado")
    validate.add_argument("--jobs", type=int, default=1, help="processos para o modo varredura")

    trace = commands.add_parser("trace", help="escreve o CSV da trajetória validada")
    _add_run_arguments(trace)
    trace.add_argument("--csv", dest="trace", help="arquivo CSV de saída")

    commands.add_parser("list", help="lista os problemas e seus parâmetros")
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    params = parse_params(args.param)
    for name in ("d", "N", "L", "amplitude"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    return {
        "problem": args.problem,
        "params": params,
        "chart": args.chart,
        "x0": parse_vector(args.x0, "x0"),
        "y0": parse_vector(args.y0, "y0"),
        "tol": args.tol,
        "tau_max": args.tau_max,
        "order": args.order,
        "eps": args.eps,
        "out": args.out,
        "report": getattr(args, "report", None),
        "trace": getattr(args, "trace", None),
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "list":
        return cmd_list()
    try:
        configs: List = build_run_configs(_flags(args), args.config)
        if args.command == "trace":
            if len(configs) != 1:
                raise ConfigurationError("trace aceita uma única execução")
            return cmd_trace(configs[0])
        return cmd_validate(configs, jobs=max(1, args.jobs))
    except ConfigurationError as exc:
        parser.print_usage(sys.stderr)
        print(f"erro: {exc}", file=sys.stderr)
        return EXIT_USAGE


def launch():
    sys.exit(main())

