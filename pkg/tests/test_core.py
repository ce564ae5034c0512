"""Tests for the core module of py-vhalab."""

import math
from pathlib import Path
from typing import Optional

import numpy as np
import pytest

from py_vhalab import core
from py_vhalab.circuit import NoiseModel
from py_vhalab.config import ExperimentConfig, parse_config
from py_vhalab.constants import CSV_COLUMNS, ED_CSV, NOISE_SWEEP_CSV, U_SWEEP_CSV
from py_vhalab.core import (
    format_float,
    read_table,
    relative_error,
    run_ed,
    run_noise_sweep,
    run_self_checks,
    run_u_sweep,
    write_table,
)
from py_vhalab.exceptions import PlotError, SelfConsistencyError
from py_vhalab.hubbard import LatticeSpec
from py_vhalab.solve import RunResult, SolveConfig, numerical_guard, run_mf


def _config(tmp_path: Path, extra: str = "") -> ExperimentConfig:
    text = f"""
    [lattice]
    nx = 2
    ny = 1

    [noise_sweep]
    nx = 2
    ny = 1
    gate_time_over_t2 = [0.0, 1e-4]
    algorithms = ["ED", "MF"]

    [optimizer]
    restarts = 1
    max_evals = 50

    [output]
    directory = "{tmp_path.as_posix()}"
    {extra}
    """
    return parse_config(text)


# Tests for the numeric helpers
#


def test_format_float() -> None:
    """Floats are written with twelve significant digits and blanks for missing values."""
    assert format_float(None) == ""
    assert format_float(0.1) == "0.1"
    assert format_float(-1.0 / 3.0) == "-0.333333333333"


def test_relative_error() -> None:
    """The absolute error is used when the reference energy is zero."""
    assert relative_error(-1.1, -1.0) == pytest.approx(0.1)
    assert relative_error(0.25, 0.0) == 0.25
    assert math.isnan(relative_error(-1.0, math.nan))


# Tests for the sweeps
#


def test_ed_sweep_rows(tmp_path: Path) -> None:
    """The ED sweep writes one row per U with a vanishing relative error."""
    table = run_ed(_config(tmp_path, "[u_sweep]\nu_grid = [-1, 0, 1]"))
    assert table.path == tmp_path / ED_CSV
    assert [row["u"] for row in table.rows] == ["-1", "0", "1"]
    assert all(row["rel_err"] == "0" for row in table.rows)
    assert all(row["algorithm"] == "ED" for row in table.rows)
    assert table.failures == 0


def test_csv_header(tmp_path: Path) -> None:
    """Every sweep file starts with the full column list."""
    table = run_ed(_config(tmp_path, '[u_sweep]\nu_grid = [0]\nalgorithms = ["ED"]'))
    header = table.path.read_text(encoding="utf-8").splitlines()[0]
    assert header.split(",") == list(CSV_COLUMNS)
    assert set(table.rows[0]) == set(CSV_COLUMNS)


def test_ed_without_fields_at_zero_u(tmp_path: Path) -> None:
    """With the fields switched off the U=0 point matches the free ground state."""
    config = parse_config(
        f'field_schedule = "off"\n[lattice]\nnx = 2\nny = 1\n[u_sweep]\nu_grid = [0]\nalgorithms = ["ED"]\n'
        f'[output]\ndirectory = "{tmp_path.as_posix()}"\n'
    )
    row = run_u_sweep(config).rows[0]
    # two sites with one bond at t = -1: both spins in the bonding orbital
    assert float(row["energy"]) == pytest.approx(-2.0)
    assert row["rel_err"] == "0"


def test_u_sweep_with_mean_field(tmp_path: Path) -> None:
    """Variational rows carry the reference energy and solver bookkeeping."""
    config = parse_config(
        f'[lattice]\nnx = 2\nny = 1\n[u_sweep]\nu_grid = [-2]\nalgorithms = ["ED", "MF"]\n'
        f'[output]\ndirectory = "{tmp_path.as_posix()}"\n'
    )
    table = run_u_sweep(config)
    assert table.path == tmp_path / U_SWEEP_CSV
    ed, mf = table.rows
    assert mf["algorithm"] == "MF"
    assert mf["ed_energy"] == ed["energy"]
    assert float(mf["energy"]) >= float(ed["energy"]) - 1e-9
    assert float(mf["rel_err"]) >= 0
    assert mf["gate_count"] != ""
    assert mf["mitigated"] == "false"
    assert mf["seed"] == "1234"
    assert mf["shots"] == "0"
    assert len(mf["config_hash"]) == 12


def test_noise_sweep_rows(tmp_path: Path) -> None:
    """Each gate time gives an ED row plus raw and mitigated rows per algorithm."""
    table = run_noise_sweep(_config(tmp_path))
    assert table.path == tmp_path / NOISE_SWEEP_CSV
    assert [(r["algorithm"], r["mitigated"]) for r in table.rows] == [
        ("ED", "false"),
        ("MF", "false"),
        ("MF", "true"),
    ] * 2
    noiseless_raw, noiseless_mitigated = table.rows[1], table.rows[2]
    assert noiseless_raw["energy"] == noiseless_mitigated["energy"]
    assert table.rows[4]["gate_time_over_t2"] == "0.0001"


def test_failure_becomes_error_row(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A solver failure is recorded in the error column and the sweep continues."""

    def failing(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
        raise SelfConsistencyError("no mean-field order converged")

    monkeypatch.setitem(core.DRIVERS, "MF", failing)
    config = parse_config(
        f'[lattice]\nnx = 2\nny = 1\n[u_sweep]\nu_grid = [-2, 2]\nalgorithms = ["MF", "ED"]\n'
        f'[output]\ndirectory = "{tmp_path.as_posix()}"\n'
    )
    table = run_u_sweep(config)
    assert table.failures == 2
    failed = table.rows[0]
    assert failed["error"] == "no mean-field order converged"
    assert failed["energy"] == ""
    assert failed["ed_energy"] != ""
    assert table.rows[1]["error"] == ""


def test_numerical_failure_mid_sweep(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A linear-algebra failure at one point leaves the other points intact."""

    @numerical_guard
    def flaky(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
        if spec.u == 0:
            raise np.linalg.LinAlgError("eigenvalues did not converge")
        return run_mf(spec, config, noise)

    monkeypatch.setitem(core.DRIVERS, "MF", flaky)
    config = parse_config(
        f'[lattice]\nnx = 2\nny = 1\n[u_sweep]\nu_grid = [-2, 0, 2]\nalgorithms = ["MF"]\n'
        f'[output]\ndirectory = "{tmp_path.as_posix()}"\n'
    )
    table = run_u_sweep(config)
    assert table.path.exists()
    assert [row["u"] for row in table.rows] == ["-2", "0", "2"]
    assert table.failures == 1
    assert "eigenvalues did not converge" in table.rows[1]["error"]
    assert table.rows[0]["error"] == "" and table.rows[2]["error"] == ""


def test_reruns_are_byte_identical(tmp_path: Path) -> None:
    """The same configuration reproduces the same file."""
    config = _config(tmp_path)
    first = run_noise_sweep(config).path.read_bytes()
    second = run_noise_sweep(config).path.read_bytes()
    assert first == second


@pytest.mark.slow
def test_u_sweep_is_byte_identical_across_reruns_and_workers(tmp_path: Path) -> None:
    """Variational sweeps give the same bytes on a rerun and in a worker pool."""
    extra = '[u_sweep]\nu_grid = [-2, 0, 2]\nalgorithms = ["ED", "MF", "VEHA"]\n[ansatz]\nreps = 1\n'
    serial = _config(tmp_path / "serial", extra)
    first = run_u_sweep(serial).path.read_bytes()
    assert run_u_sweep(serial).path.read_bytes() == first
    parallel = _config(tmp_path / "parallel", extra).with_overrides(jobs=2)
    assert run_u_sweep(parallel).path.read_bytes() == first


def test_process_pool_preserves_grid_order(tmp_path: Path) -> None:
    """Worker processes do not change row order or content."""
    serial = run_ed(_config(tmp_path / "serial", '[u_sweep]\nu_grid = [-2, -1, 0, 1, 2]'))
    parallel = run_ed(_config(tmp_path / "parallel", '[u_sweep]\nu_grid = [-2, -1, 0, 1, 2]').with_overrides(jobs=3))
    assert serial.rows == parallel.rows


# Tests for reading tables
#


def test_read_table_round_trip(tmp_path: Path) -> None:
    """Rows written by the sweeps load back unchanged."""
    table = run_ed(_config(tmp_path, '[u_sweep]\nu_grid = [1]'))
    assert read_table(table.path) == list(table.rows)


def test_read_table_missing_columns(tmp_path: Path) -> None:
    """Tables without the full schema are rejected."""
    path = tmp_path / "short.csv"
    path.write_text("u,algorithm,energy\n0,ED,-1\n", encoding="utf-8")
    with pytest.raises(PlotError, match="missing columns"):
        read_table(path)


def test_read_table_missing_file(tmp_path: Path) -> None:
    """An unreadable file is reported as a plotting error."""
    with pytest.raises(PlotError, match="cannot read"):
        read_table(tmp_path / "absent.csv")


def test_write_table_creates_directory(tmp_path: Path) -> None:
    """Output directories are created on demand."""
    path = tmp_path / "nested" / "out.csv"
    write_table(path, [])
    assert path.read_text(encoding="utf-8") == ",".join(CSV_COLUMNS) + "\n"


# Tests for the self-checks
#


def test_self_checks_pass() -> None:
    """Every built-in check passes on a healthy installation."""
    results = run_self_checks()
    assert [r.name for r in results] == list(core.SELF_CHECKS)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_self_check_error_is_a_failure(monkeypatch: pytest.MonkeyPatch) -> None:
    """A check that raises is reported as failed instead of aborting the run."""

    def broken() -> tuple[bool, str]:
        raise SelfConsistencyError("diverged")

    monkeypatch.setattr(core, "SELF_CHECKS", {"broken": broken})
    (result,) = run_self_checks()
    assert not result.passed
    assert result.detail == "diverged"
