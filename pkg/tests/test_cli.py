"""Command-line interface: exit codes, outputs, and the three subcommands."""

import csv
import subprocess
import sys

import pytest

import glmlab.harness as harness
from glmlab.cli import EXIT_CONFIG, EXIT_OK, EXIT_PARTIAL, main
from glmlab.harness import WORKERS_ENV
from glmlab.metrics import CSV_COLUMNS


@pytest.fixture(autouse=True)
def _no_worker_env(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)


def _simulate_args(tmp_path, out="results.csv"):
    return ["simulate",
            "--domain", "unit",
            "--dgp-families", "beta",
            "--dgp-links", "logit",
            "--shapes", "symmetric",
            "--fit-families", "beta",
            "--fit-links", "logit",
            "--formulas", "x+z1",
            "--replicates", "2",
            "--workers", "1",
            "--quiet",
            "--out", str(tmp_path / out)]


def test_simulate_success(tmp_path, capsys):
    code = main(_simulate_args(tmp_path))
    assert code == EXIT_OK
    with open(tmp_path / "results.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 1 + 8


def test_simulate_respects_seed_flag(tmp_path):
    args = _simulate_args(tmp_path, "a.csv") + ["--seed", "123"]
    assert main(args) == EXIT_OK
    args = _simulate_args(tmp_path, "b.csv") + ["--seed", "123"]
    assert main(args) == EXIT_OK
    args = _simulate_args(tmp_path, "c.csv") + ["--seed", "124"]
    assert main(args) == EXIT_OK
    a = (tmp_path / "a.csv").read_bytes()
    b = (tmp_path / "b.csv").read_bytes()
    c = (tmp_path / "c.csv").read_bytes()
    assert a == b
    assert a != c


def test_simulate_bad_domain_is_config_error(tmp_path, capsys):
    code = main(["simulate", "--domain", "bogus",
                 "--out", str(tmp_path / "r.csv")])
    assert code == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_simulate_bad_flag_value_is_config_error(tmp_path):
    code = main(_simulate_args(tmp_path) + ["--fit-mode", "nuts"])
    assert code == EXIT_CONFIG


def test_partial_failure_exit_code(tmp_path, monkeypatch, capsys):
    real_fit = harness.fit

    def flaky(spec, data, seed=None):
        if spec.family == "normal":
            raise RuntimeError("boom")
        return real_fit(spec, data, seed=seed)

    monkeypatch.setattr(harness, "fit", flaky)
    code = main(_simulate_args(tmp_path))
    assert code == EXIT_PARTIAL
    assert "recorded" in capsys.readouterr().err


def test_aggregate_command(tmp_path, capsys):
    main(_simulate_args(tmp_path))
    out = tmp_path / "summary.csv"
    code = main(["aggregate", "--in", str(tmp_path / "results.csv"),
                 "--out", str(out)])
    assert code == EXIT_OK
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert "auc" in rows[0]
    assert len(rows) >= 2


def test_aggregate_custom_keys(tmp_path):
    main(_simulate_args(tmp_path))
    out = tmp_path / "by_family.csv"
    code = main(["aggregate", "--in", str(tmp_path / "results.csv"),
                 "--by", "fit_family,fit_link", "--out", str(out)])
    assert code == EXIT_OK
    with open(out, newline="") as fh:
        header = next(csv.reader(fh))
    assert header[:2] == ["fit_family", "fit_link"]


def test_aggregate_missing_input(tmp_path, capsys):
    code = main(["aggregate", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "s.csv")])
    assert code == EXIT_CONFIG


def test_aggregate_bad_grouping_key(tmp_path):
    main(_simulate_args(tmp_path))
    code = main(["aggregate", "--in", str(tmp_path / "results.csv"),
                 "--by", "bogus_key", "--out", str(tmp_path / "s.csv")])
    assert code == EXIT_CONFIG


def test_report_command(tmp_path, capsys):
    main(_simulate_args(tmp_path))
    code = main(["report", "--in", str(tmp_path / "results.csv"),
                 "--out", str(tmp_path / "tables")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "convergence" in out
    assert (tmp_path / "tables" / "convergence.csv").exists()
    assert (tmp_path / "tables" / "auc_by_link.csv").exists()


def test_report_missing_input(tmp_path):
    code = main(["report", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "tables")])
    assert code == EXIT_CONFIG


def test_usage_error_exit_code():
    assert main([]) == EXIT_CONFIG
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_module_entrypoint_help():
    proc = subprocess.run([sys.executable, "-m", "glmlab.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
    assert "aggregate" in proc.stdout
    assert "report" in proc.stdout


def test_console_script_installed():
    proc = subprocess.run(["glmlab", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout
