"""Unit tests for py_vhalab.cli module.

This file contains all tests for the CLI functionality, including:
- Helper functions
- Command-line parser
- Main function execution paths
- Error handling scenarios
"""

from pathlib import Path
from typing import Any

import pytest
from rich.console import Console

from py_vhalab import cli
from py_vhalab.config import parse_config
from py_vhalab.constants import FIGURE_FILES
from py_vhalab.core import CheckResult, SweepTable, run_ed


def test_get_default_jobs_unset(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("VHALAB_JOBS", raising=False)
    assert cli.get_default_jobs() is None


def test_get_default_jobs_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("VHALAB_JOBS", "4")
    assert cli.get_default_jobs() == 4


@pytest.mark.parametrize("value", ["many", "0", "-2"])
def test_get_default_jobs_invalid(monkeypatch: pytest.MonkeyPatch, value: str) -> None:
    monkeypatch.setenv("VHALAB_JOBS", value)
    assert cli.get_default_jobs() == 1


def test_get_version_display() -> None:
    version = cli._get_version_display()
    assert "py-vhalab" in version


def test_print_status_and_error(capsys: pytest.CaptureFixture[str]) -> None:
    cli.print_status("Test status", style="blue")
    cli.print_error("Test error")
    out = capsys.readouterr().out
    assert "Test status" in out
    assert "Test error" in out


def test_print_success(capsys: pytest.CaptureFixture[str]) -> None:
    cli.print_success("Yay!")
    out = capsys.readouterr().out
    assert "OK" in out
    assert "Yay!" in out


def test_rich_help_formatter_output() -> None:
    formatter = cli.RichHelpFormatter(prog="test")
    help_text = formatter.format_help()
    assert "py-vhalab" in help_text
    assert "USAGE" in help_text
    assert "EXIT CODES" in help_text
    assert "COMMANDS" in help_text
    assert "OPTIONS" in help_text
    assert "EXAMPLES" in help_text
    assert "VHALAB_JOBS" in help_text


def test_parser_all_options(tmp_path: Path) -> None:
    """Test the shared options on a subcommand."""
    parser = cli.create_parser()
    args = parser.parse_args(
        ["sweep-u", "--config", "lab.toml", "--out", str(tmp_path), "--seed", "7", "--jobs", "3", "--verbose"]
    )
    assert args.command == "sweep-u"
    assert args.config == Path("lab.toml")
    assert args.out == tmp_path
    assert args.seed == 7
    assert args.jobs == 3
    assert args.verbose is True
    assert args.debug is False


def test_parser_plot_requires_csv() -> None:
    parser = cli.create_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["plot"])


def test_parser_rejects_unknown_figure() -> None:
    parser = cli.create_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["plot", "--csv", "u_sweep.csv", "--figure", "5"])


def test_create_parser_renders_no_help(monkeypatch: pytest.MonkeyPatch) -> None:
    """Building the parser never prints the rich help."""

    def fail_print(*a: Any, **k: Any) -> None:
        raise AssertionError("console used while building the parser")

    monkeypatch.setattr(cli.console, "print", fail_print)
    parser = cli.create_parser()
    assert parser.prog == "py-vhalab"


def test_subcommand_usage_is_plain(capsys: pytest.CaptureFixture[str]) -> None:
    """A subcommand error prints a short argparse usage line."""
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["plot"])
    assert exc_info.value.code == 2
    err = capsys.readouterr().err
    assert "usage: py-vhalab plot" in err
    assert "EXAMPLES" not in err
    assert len(err.splitlines()) < 10


def test_main_version(monkeypatch: pytest.MonkeyPatch) -> None:
    called = {}

    def fake_print(msg: Any, *a: Any, **k: Any) -> None:
        called["msg"] = msg

    monkeypatch.setattr(cli.console, "print", fake_print)
    ret = cli.main(["--version"])
    assert ret == 0
    assert "py-vhalab" in called["msg"]


def test_main_without_command(capsys: pytest.CaptureFixture[str]) -> None:
    ret = cli.main([])
    assert ret == 0
    assert "COMMANDS" in capsys.readouterr().out


def test_main_config_error(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """An invalid configuration file exits with status 1 before any work is done."""
    path = tmp_path / "bad.toml"
    path.write_text("[lattice]\nnz = 3\n", encoding="utf-8")
    errors = []
    monkeypatch.setattr(cli, "print_error", lambda msg: errors.append(msg))
    ret = cli.main(["ed", "--config", str(path)])
    assert ret == 1
    assert any("lattice.nz" in msg for msg in errors)


def test_main_missing_config(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(cli, "print_error", lambda msg: None)
    assert cli.main(["sweep-u", "--config", str(tmp_path / "absent.toml")]) == 1


def test_main_passes_overrides(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Command-line flags override the configuration handed to the sweep."""
    seen = {}

    def fake_sweep(config: Any) -> SweepTable:
        seen["config"] = config
        return SweepTable(tmp_path / "u_sweep.csv", ())

    monkeypatch.setattr(cli, "run_u_sweep", fake_sweep)
    monkeypatch.setattr(cli, "print_success", lambda msg: None)
    ret = cli.main(["sweep-u", "--seed", "11", "--jobs", "2", "--out", str(tmp_path)])
    assert ret == 0
    assert seen["config"].optimizer.seed == 11
    assert seen["config"].output.jobs == 2
    assert seen["config"].output.directory == str(tmp_path)


def test_main_sweep_with_failures(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Failed sweep points give exit status 2."""
    failed_row = {"error": "no mean-field order converged"}
    monkeypatch.setattr(cli, "run_noise_sweep", lambda config: SweepTable(tmp_path / "n.csv", (failed_row,)))
    status_messages = []
    monkeypatch.setattr(cli, "print_status", lambda msg, style="white": status_messages.append(msg))
    monkeypatch.setattr(cli, "print_success", lambda msg: None)
    ret = cli.main(["sweep-noise"])
    assert ret == 2
    assert any("1 point(s) failed" in msg for msg in status_messages)


def test_main_ed_and_plot(tmp_path: Path) -> None:
    """The ED command writes a table that the plot command can draw."""
    config_path = tmp_path / "lab.toml"
    config_path.write_text(
        '[lattice]\nnx = 2\nny = 1\n[u_sweep]\nu_grid = [-1, 1]\nalgorithms = ["ED"]\n', encoding="utf-8"
    )
    assert cli.main(["ed", "--config", str(config_path), "--out", str(tmp_path)]) == 0
    csv_path = tmp_path / "ed.csv"
    assert csv_path.exists()
    assert cli.main(["plot", "--csv", str(csv_path), "--figure", "2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / FIGURE_FILES["2"]).exists()


def test_main_plot_wrong_table(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Asking for a noise figure from a U-sweep table exits with status 1."""
    config = parse_config(
        f'[lattice]\nnx = 2\nny = 1\n[u_sweep]\nu_grid = [0]\n[output]\ndirectory = "{tmp_path.as_posix()}"\n'
    )
    table = run_ed(config)
    errors = []
    monkeypatch.setattr(cli, "print_error", lambda msg: errors.append(msg))
    ret = cli.main(["plot", "--csv", str(table.path), "--figure", "3", "--out", str(tmp_path)])
    assert ret == 1
    assert any("noise-sweep" in msg for msg in errors)


def test_main_plot_missing_csv(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(cli, "print_error", lambda msg: None)
    assert cli.main(["plot", "--csv", str(tmp_path / "absent.csv")]) == 1


def test_main_selftest(capsys: pytest.CaptureFixture[str]) -> None:
    ret = cli.main(["selftest"])
    assert ret == 0
    out = capsys.readouterr().out
    assert "anticommutation" in out
    assert "FAIL" not in out


def test_main_selftest_failure(monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]) -> None:
    monkeypatch.setattr(cli, "run_self_checks", lambda: [CheckResult("hermiticity", False, "2x2")])
    assert cli.main(["selftest"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_main_gates(monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]) -> None:
    monkeypatch.setattr(cli, "console", Console(width=200))
    ret = cli.main(["gates", "--nx", "2", "--ny", "2"])
    assert ret == 0
    out = capsys.readouterr().out
    assert "VMFHA" in out
    assert "VEHA" in out


def test_main_gates_invalid_lattice(monkeypatch: pytest.MonkeyPatch) -> None:
    errors = []
    monkeypatch.setattr(cli, "print_error", lambda msg: errors.append(msg))
    assert cli.main(["gates", "--nx", "0", "--ny", "2"]) == 1
    assert errors


def test_main_gates_uses_configured_bonds(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """The gate report sees the same lattice options as the sweeps."""
    seen = []

    def fake_report(lattice: Any, reps: int) -> list[Any]:
        seen.append(lattice)
        return []

    config_path = tmp_path / "lab.toml"
    config_path.write_text("[lattice]\ndedup_bonds = false\n", encoding="utf-8")
    monkeypatch.setattr(cli, "gate_report", fake_report)
    assert cli.main(["gates", "--config", str(config_path), "--nx", "2", "--ny", "2"]) == 0
    assert seen[0].dedup_bonds is False
