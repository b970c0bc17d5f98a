import csv
import json

import pytest

from app.cli import build_parser, main
from app.commands.validate import EXIT_FAILED, EXIT_OK, EXIT_USAGE
from app.run_config import RunConfig, build_run_configs, load_run_file
from app.utils import format_interval, parse_params, parse_vector
from services.common import ConfigurationError
from services.interval import Interval
from services.problems.kk import KK_EQUILIBRIUM

NEAR_SINK = ",".join(repr(0.99999 * v) for v in KK_EQUILIBRIUM)


def test_parse_vector():
    assert parse_vector("1, -2.5,3e-1") == (1.0, -2.5, 0.3)
    assert parse_vector([1, 2]) == (1.0, 2.0)
    assert parse_vector(None) is None
    for bad in ("1,,2", "a,b", "1,inf", ""):
        with pytest.raises(ConfigurationError):
            parse_vector(bad)


def test_parse_params():
    params = parse_params(["d=3", "L=0.5", "s=0.44,0.45", "name=abc"])
    assert params == {"d": 3, "L": 0.5, "s": ("0.44", "0.45"), "name": "abc"}
    with pytest.raises(ConfigurationError):
        parse_params(["novalue"])
    with pytest.raises(ConfigurationError):
        parse_params(["=3"])


def test_format_interval():
    assert format_interval(Interval(0.5, 0.75)) == "[0.5, 0.75]"
    assert format_interval(None) == "—"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"problem": ""},
        {"problem": "kk", "x0": (0.1, 0.2), "y0": (1.0, 2.0)},
        {"problem": "kk", "tol": 0.0},
        {"problem": "kk", "tau_max": -1.0},
        {"problem": "kk", "order": 0},
        {"problem": "kk", "eps_override": 0.0},
    ],
)
def test_run_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        RunConfig(**kwargs)


def _write(tmp_path, text):
    path = tmp_path / "runs.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_toml_runs_with_flag_precedence(tmp_path):
    path = _write(
        tmp_path,
        """
problem = "fvks"
tol = 1e-10
params = { d = 3, N = 4 }

[[runs]]
chart = "dir:1:+"
y0 = [1.0, 2.0, 3.0, 4.0, 0.0, 0.0, 0.0, 0.0]

[[runs]]
chart = "para"
params = { d = 2 }
""",
    )
    defaults, runs = load_run_file(path)
    assert defaults["problem"] == "fvks" and len(runs) == 2
    configs = build_run_configs({"tau_max": 5.0, "params": {"N": 5}}, path)
    assert [c.chart for c in configs] == ["dir:1:+", "para"]
    assert configs[0].params == {"d": 3, "N": 5}
    assert configs[1].params == {"d": 2, "N": 5}
    assert configs[0].tol == 1e-10 and configs[0].tau_max == 5.0
    assert configs[0].y0[0] == 1.0
    # an x0 flag replaces the file's y0
    configs = build_run_configs({"x0": (0.1,) * 8}, path)
    assert configs[0].y0 is None and configs[0].x0 == (0.1,) * 8


def test_toml_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_run_file(_write(tmp_path, "problem = "))
    with pytest.raises(ConfigurationError):
        build_run_configs({}, _write(tmp_path, 'problem = "kk"\ncolour = "red"\n'))
    with pytest.raises(ConfigurationError):
        build_run_configs({}, _write(tmp_path, 'problem = "kk"\nruns = 3\n'))
    with pytest.raises(ConfigurationError):
        load_run_file(str(tmp_path / "missing.toml"))


def test_parser_defines_subcommands():
    parser = build_parser()
    args = parser.parse_args(["validate", "--problem", "fvks", "--d", "3", "--param", "L=2", "--jobs", "2"])
    assert (args.command, args.d, args.jobs, args.param) == ("validate", 3, 2, ["L=2"])
    args = parser.parse_args(["trace", "--problem", "kk", "--csv", "t.csv"])
    assert args.trace == "t.csv"


def test_usage_errors_exit_with_one(capsys):
    assert main([]) == EXIT_USAGE
    with pytest.raises(SystemExit) as excinfo:
        main(["validate", "--problem", "kk", "--x0", "1,2", "--y0", "1,2"])
    assert excinfo.value.code == EXIT_USAGE
    assert main(["validate"]) == EXIT_USAGE
    assert main(["validate", "--problem", "nope"]) == EXIT_USAGE
    assert main(["validate", "--problem", "kk", "--tol", "-1"]) == EXIT_USAGE
    assert "erro" in capsys.readouterr().err


def test_list_prints_problems(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "kk-simple" in out and "fvks" in out
    assert "amplitude: float = 100" in out


def test_validate_writes_certificate_and_report(tmp_path, capsys):
    out = tmp_path / "cert.json"
    report = tmp_path / "cert.pdf"
    code = main(["validate", "--problem", "kk-simple", "--x0", NEAR_SINK, "--out", str(out), "--report", str(report)])
    assert code == EXIT_OK
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["status"] == "succeeded"
    assert document["steps"] == 0
    assert report.read_bytes().startswith(b"%PDF")
    assert "succeeded" in capsys.readouterr().out


def test_validate_reports_failed_stage(tmp_path):
    out = tmp_path / "failed.json"
    code = main(["validate", "--problem", "kk-simple", "--tau-max", "0", "--out", str(out)])
    assert code == EXIT_FAILED
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["failed_stage"] == "integration"
    assert document["t_max"] is None


def test_trace_with_zero_tau_writes_header_only(tmp_path):
    path = tmp_path / "trace.csv"
    code = main(["trace", "--problem", "kk-simple", "--tau-max", "0", "--csv", str(path)])
    assert code == EXIT_FAILED
    rows = list(csv.reader(path.open(encoding="utf-8")))
    assert len(rows) == 1
    assert rows[0][:3] == ["tau", "t_lo", "t_hi"]


def test_trace_rejects_sweeps(tmp_path):
    path = _write(tmp_path, 'problem = "kk-simple"\n[[runs]]\nchart = "para"\n[[runs]]\nchart = "para"\n')
    assert main(["trace", "--config", path]) == EXIT_USAGE
