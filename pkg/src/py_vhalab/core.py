"""Sweep runners and CSV emission.

A sweep is a list of independent points, one per (U, gate time, algorithm).
Points are solved by a top-level worker function, optionally in a process
pool, and the parent process writes every row in grid order so reruns with
the same configuration produce identical files. The quick self-checks behind
the ``selftest`` command live here too.
"""

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .ansatz import vha_spec
from .circuit import NoiseModel, apply_circuit_pure, apply_rotations_pure, rng_from_seed, zero_state
from .config import ExperimentConfig
from .constants import CSV_COLUMNS, DEFAULT_SEED, ED_CSV, NOISE_SWEEP_CSV, U_SWEEP_CSV
from .exceptions import PlotError, VhaLabError
from .fermion import annihilation, jordan_wigner, operator_matrix
from .hubbard import LatticeSpec, qubit_hamiltonian
from .meanfield import MeanFieldParams, QuadraticHamiltonian, gaussian_prep_circuit, ground_state_quadratic
from .provenance import config_hash, describe_version
from .reference import (
    EDResult,
    exact_ground_state,
    mitigated_run,
    report_observables,
    richardson_extrapolate,
)
from .solve import DRIVERS, RunResult

logger = logging.getLogger(__name__)

Row = dict[str, str]


@dataclass(frozen=True)
class SweepPoint:
    u: float
    algorithm: str
    gate_time_over_t2: float = 0.0
    noise_sweep: bool = False


@dataclass(frozen=True)
class Stamp:
    """Provenance shared by every row of one sweep."""

    seed: int
    shots: int
    config_hash: str
    version: str


@dataclass(frozen=True)
class SweepTable:
    path: Path
    rows: tuple[Row, ...]

    @property
    def failures(self) -> int:
        return sum(1 for row in self.rows if row["error"])


def format_float(value: Optional[float]) -> str:
    if value is None:
        return ""
    return format(float(value), ".12g")


def relative_error(energy: float, reference: float) -> float:
    """``|E - E_ED| / |E_ED|``; the absolute error when the reference vanishes."""
    if math.isnan(reference):
        return math.nan
    scale = abs(reference) if reference != 0.0 else 1.0
    return abs(energy - reference) / scale


def _row(
    point: SweepPoint,
    stamp: Stamp,
    ed_energy: float,
    *,
    energy: Optional[float] = None,
    m_af: Optional[float] = None,
    delta_s: Optional[float] = None,
    mitigated: bool = False,
    result: Optional[RunResult] = None,
    error: str = "",
) -> Row:
    return {
        "u": format_float(point.u),
        "algorithm": point.algorithm,
        "energy": format_float(energy),
        "ed_energy": format_float(ed_energy),
        "rel_err": "" if energy is None else format_float(relative_error(energy, ed_energy)),
        "m_af": format_float(m_af),
        "delta_s": format_float(delta_s),
        "gate_time_over_t2": format_float(point.gate_time_over_t2),
        "mitigated": "true" if mitigated else "false",
        "shots": str(stamp.shots),
        "seed": str(stamp.seed),
        "restart_index": "" if result is None else str(result.selected_restart),
        "gate_count": "" if result is None else str(result.gate_count),
        "circuit_duration": "" if result is None else format_float(result.circuit_duration),
        "n_evals": "" if result is None else str(result.n_evals),
        "error": error,
        "restart_energies": "" if result is None else ";".join(format_float(e) for e in result.restart_energies),
        "config_hash": stamp.config_hash,
        "version": stamp.version,
    }


def _lattice_for(config: ExperimentConfig, point: SweepPoint) -> LatticeSpec:
    return config.noise_sweep_lattice() if point.noise_sweep else config.u_sweep_lattice(point.u)


def _reference(spec: LatticeSpec) -> Optional[EDResult]:
    try:
        return exact_ground_state(spec)
    except VhaLabError as e:
        logger.warning("no exact reference for %s at U=%g: %s", spec.label(), spec.u, e)
        return None


def solve_point(config: ExperimentConfig, stamp: Stamp, point: SweepPoint) -> list[Row]:
    """Rows for one sweep point; failures become a row with the ``error`` column set."""
    spec = _lattice_for(config, point)
    reference = _reference(spec)
    ed_energy = reference.energy if reference is not None else math.nan
    logger.info("solving %s at U=%g, gate time %g", point.algorithm, point.u, point.gate_time_over_t2)
    try:
        if point.algorithm == "ED":
            if reference is None:
                raise VhaLabError(f"exact diagonalization unavailable for {spec.label()}")
            return [_row(point, stamp, ed_energy, energy=ed_energy, m_af=reference.m_af, delta_s=reference.delta_s)]
        solve_config = config.solve_config()
        driver = DRIVERS[point.algorithm]
        if not point.noise_sweep:
            result = driver(spec, solve_config, NoiseModel())
            row = _row(
                point, stamp, ed_energy, energy=result.energy, m_af=result.m_af, delta_s=result.delta_s, result=result
            )
            return [row]
        noise = NoiseModel(
            gate_time_over_t2=point.gate_time_over_t2, idle_dephasing=config.noise_sweep.idle_dephasing
        )
        mitigated = mitigated_run(driver, spec, solve_config, noise)
        raw = mitigated.raw
        return [
            _row(point, stamp, ed_energy, energy=raw.energy, m_af=raw.m_af, delta_s=raw.delta_s, result=raw),
            _row(
                point,
                stamp,
                ed_energy,
                energy=mitigated.energy,
                m_af=mitigated.m_af,
                delta_s=mitigated.delta_s,
                mitigated=True,
                result=raw,
            ),
        ]
    except VhaLabError as e:
        logger.warning("%s failed at U=%g: %s", point.algorithm, point.u, e)
        return [_row(point, stamp, ed_energy, error=str(e))]


def _stamp(config: ExperimentConfig) -> Stamp:
    shots = config.measurement.shots if config.measurement.mode == "shots" else 0
    return Stamp(config.optimizer.seed, shots, config_hash(config), describe_version())


def _solve_all(config: ExperimentConfig, points: Sequence[SweepPoint]) -> list[Row]:
    worker = partial(solve_point, config, _stamp(config))
    jobs = min(config.output.jobs, len(points)) if points else 1
    if jobs <= 1:
        batches: Iterable[list[Row]] = map(worker, points)
        return [row for batch in batches for row in batch]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        return [row for batch in executor.map(worker, points) for row in batch]


def write_table(path: Path, rows: Iterable[Row]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_table(path: Path) -> list[Row]:
    """Load a sweep CSV; the header must carry every schema column."""
    try:
        with Path(path).open(encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or ())]
            if missing:
                raise PlotError(f"{path} is missing columns: {', '.join(missing)}")
            return list(reader)
    except OSError as e:
        raise PlotError(f"cannot read {path}: {e}") from e


def _run(config: ExperimentConfig, points: Sequence[SweepPoint], filename: str) -> SweepTable:
    rows = _solve_all(config, points)
    path = Path(config.output.directory) / filename
    write_table(path, rows)
    logger.info("wrote %d rows to %s", len(rows), path)
    return SweepTable(path, tuple(rows))


def run_u_sweep(config: ExperimentConfig) -> SweepTable:
    """Noiseless sweep over ``u_sweep.u_grid``; one row per (U, algorithm)."""
    points = [SweepPoint(u, algorithm) for u in config.u_sweep.u_grid for algorithm in config.u_sweep.algorithms]
    return _run(config, points, U_SWEEP_CSV)


def run_noise_sweep(config: ExperimentConfig) -> SweepTable:
    """Dephasing sweep at a single U; raw and mitigated rows per (gate time, algorithm)."""
    sweep = config.noise_sweep
    points = [
        SweepPoint(sweep.u, algorithm, gate_time_over_t2=g, noise_sweep=True)
        for g in sweep.gate_time_over_t2
        for algorithm in sweep.algorithms
    ]
    return _run(config, points, NOISE_SWEEP_CSV)


def run_ed(config: ExperimentConfig) -> SweepTable:
    """Exact reference over the U grid of the U sweep."""
    return _run(config, [SweepPoint(u, "ED") for u in config.u_sweep.u_grid], ED_CSV)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check_anticommutation() -> tuple[bool, str]:
    modes = 4
    lowering = [np.asarray(operator_matrix(jordan_wigner(annihilation(j, modes)))) for j in range(modes)]
    identity = np.eye(2**modes)
    worst = 0.0
    for i, a in enumerate(lowering):
        for j, b in enumerate(lowering):
            worst = max(worst, float(np.abs(a @ b + b @ a).max()))
            expected = identity if i == j else np.zeros_like(identity)
            worst = max(worst, float(np.abs(a @ b.conj().T + b.conj().T @ a - expected).max()))
    return worst < 1e-12, f"max deviation {worst:.2e}"


def _check_hermiticity() -> tuple[bool, str]:
    spec = LatticeSpec(2, 2, u=-3.0).with_fields(0.3, 0.3)
    return qubit_hamiltonian(spec).is_hermitian(), spec.label()


def _check_symmetry_preservation() -> tuple[bool, str]:
    spec = LatticeSpec(2, 2, u=-3.0)
    ansatz = vha_spec(spec, reps=1, mf_kind="BCS")
    initial = apply_circuit_pure(ansatz.initial_circuit(MeanFieldParams("BCS", delta_s=0.5)), zero_state(8))
    rng = rng_from_seed(DEFAULT_SEED)
    worst = 0.0
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, ansatz.parameter_count)
        m_af, _ = report_observables(apply_rotations_pure(ansatz.program(theta), initial), spec)
        worst = max(worst, abs(m_af))
    return worst < 1e-8, f"max |M_AF| {worst:.2e}"


def _check_gaussian_preparation() -> tuple[bool, str]:
    modes = 4
    rng = rng_from_seed(DEFAULT_SEED)
    hopping = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    pairing = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    h = QuadraticHamiltonian(hopping + hopping.conj().T, pairing - pairing.T)
    target = ground_state_quadratic(h).state
    prepared = apply_circuit_pure(gaussian_prep_circuit(h), zero_state(modes))
    fidelity = float(abs(np.vdot(target, prepared)) ** 2)
    return fidelity > 1 - 1e-9, f"fidelity {fidelity:.12f}"


def _check_richardson() -> tuple[bool, str]:
    value = richardson_extrapolate([(1.0, 1.5), (1.5, 1.75), (2.0, 2.0)])
    return abs(value - 1.0) < 1e-12, f"intercept {value:.12g}"


SELF_CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "anticommutation": _check_anticommutation,
    "hermiticity": _check_hermiticity,
    "symmetry preservation": _check_symmetry_preservation,
    "gaussian preparation": _check_gaussian_preparation,
    "richardson extrapolation": _check_richardson,
}


def run_self_checks() -> list[CheckResult]:
    """Quick algebra and simulator checks; a raised error counts as a failure."""
    results = []
    for name, check in SELF_CHECKS.items():
        try:
            passed, detail = check()
        except VhaLabError as e:
            passed, detail = False, str(e)
        results.append(CheckResult(name, passed, detail))
    return results
