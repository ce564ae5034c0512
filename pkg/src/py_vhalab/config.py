"""Experiment configuration: a strict TOML schema with documented defaults.

Every section maps onto a frozen dataclass. Parsing rejects unknown sections,
unknown keys and wrongly typed values with a :class:`ConfigError` naming the
dotted key, and :meth:`ExperimentConfig.to_toml` writes a file that parses
back to an equal configuration.
"""

import dataclasses
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional, Union

import tomli_w

from .constants import (
    ALGORITHMS,
    DEFAULT_FD_STEP,
    DEFAULT_HOPPING,
    DEFAULT_MAX_EVALS,
    DEFAULT_NOISE_GRID,
    DEFAULT_NOISE_LATTICE,
    DEFAULT_NOISE_U,
    DEFAULT_REPS,
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    DEFAULT_SHOTS,
    DEFAULT_STRETCHES,
    DEFAULT_U_GRID,
    DEFAULT_U_SWEEP_LATTICE,
    FIELD_SCHEDULES,
    MEASUREMENT_MODES,
    OPTIMIZER_METHODS,
    SCF_MAX_ITER,
    SCF_MIXING,
    SCF_TOLERANCE,
    SYMMETRY_COMBOS,
)
from .exceptions import ConfigError
from .hubbard import LatticeSpec, external_field_schedule
from .solve import OptimizerConfig, SolveConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class LatticeConfig:
    nx: int = DEFAULT_U_SWEEP_LATTICE[0]
    ny: int = DEFAULT_U_SWEEP_LATTICE[1]
    t: float = DEFAULT_HOPPING
    periodic: bool = True
    dedup_bonds: bool = True


@dataclass(frozen=True)
class USweepConfig:
    u_grid: tuple[float, ...] = DEFAULT_U_GRID
    algorithms: tuple[str, ...] = ALGORITHMS


@dataclass(frozen=True)
class NoiseSweepConfig:
    """Noise sweep runs on its own lattice size at a single interaction strength."""

    nx: int = DEFAULT_NOISE_LATTICE[0]
    ny: int = DEFAULT_NOISE_LATTICE[1]
    u: float = DEFAULT_NOISE_U
    gate_time_over_t2: tuple[float, ...] = DEFAULT_NOISE_GRID
    idle_dephasing: bool = False
    stretches: tuple[float, ...] = DEFAULT_STRETCHES
    mitigate_in_loop: bool = False
    algorithms: tuple[str, ...] = ALGORITHMS


@dataclass(frozen=True)
class AnsatzConfig:
    reps: int = DEFAULT_REPS
    combos: tuple[str, ...] = SYMMETRY_COMBOS


@dataclass(frozen=True)
class OptimizerSection:
    method: str = "auto"
    restarts: int = DEFAULT_RESTARTS
    seed: int = DEFAULT_SEED
    fd_step: float = DEFAULT_FD_STEP
    max_evals: int = DEFAULT_MAX_EVALS


@dataclass(frozen=True)
class MeanFieldConfig:
    mixing: float = SCF_MIXING
    tol: float = SCF_TOLERANCE
    max_iter: int = SCF_MAX_ITER


@dataclass(frozen=True)
class MeasurementConfig:
    mode: str = "exact"
    shots: int = DEFAULT_SHOTS


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "results"
    jobs: int = 1


_SECTIONS: dict[str, type] = {
    "lattice": LatticeConfig,
    "u_sweep": USweepConfig,
    "noise_sweep": NoiseSweepConfig,
    "ansatz": AnsatzConfig,
    "optimizer": OptimizerSection,
    "meanfield": MeanFieldConfig,
    "measurement": MeasurementConfig,
    "output": OutputConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of a U sweep and a noise sweep."""

    field_schedule: str = "abs"
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    u_sweep: USweepConfig = field(default_factory=USweepConfig)
    noise_sweep: NoiseSweepConfig = field(default_factory=NoiseSweepConfig)
    ansatz: AnsatzConfig = field(default_factory=AnsatzConfig)
    optimizer: OptimizerSection = field(default_factory=OptimizerSection)
    meanfield: MeanFieldConfig = field(default_factory=MeanFieldConfig)
    measurement: MeasurementConfig = field(default_factory=MeasurementConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self) -> None:
        _validate(self)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"field_schedule": self.field_schedule}
        for name in _SECTIONS:
            section = getattr(self, name)
            data[name] = {
                f.name: list(value) if isinstance(value, tuple) else value
                for f in dataclasses.fields(section)
                for value in [getattr(section, f.name)]
            }
        return data

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def with_overrides(
        self, seed: Optional[int] = None, jobs: Optional[int] = None, out: Optional[Union[str, Path]] = None
    ) -> "ExperimentConfig":
        """Apply command-line flags on top of file values."""
        config = self
        if seed is not None:
            config = replace(config, optimizer=replace(config.optimizer, seed=seed))
        if jobs is not None:
            config = replace(config, output=replace(config.output, jobs=jobs))
        if out is not None:
            config = replace(config, output=replace(config.output, directory=str(out)))
        return config

    def u_sweep_lattice(self, u: float) -> LatticeSpec:
        delta_s_ext, b_af_ext = external_field_schedule(u, self.field_schedule)
        return LatticeSpec(
            nx=self.lattice.nx,
            ny=self.lattice.ny,
            t=self.lattice.t,
            u=u,
            delta_s_ext=delta_s_ext,
            b_af_ext=b_af_ext,
            periodic=self.lattice.periodic,
            dedup_bonds=self.lattice.dedup_bonds,
        )

    def noise_sweep_lattice(self) -> LatticeSpec:
        u = self.noise_sweep.u
        delta_s_ext, b_af_ext = external_field_schedule(u, self.field_schedule)
        return LatticeSpec(
            nx=self.noise_sweep.nx,
            ny=self.noise_sweep.ny,
            t=self.lattice.t,
            u=u,
            delta_s_ext=delta_s_ext,
            b_af_ext=b_af_ext,
            periodic=self.lattice.periodic,
            dedup_bonds=self.lattice.dedup_bonds,
        )

    def solve_config(self) -> SolveConfig:
        opt = self.optimizer
        return SolveConfig(
            optimizer=OptimizerConfig(
                method=opt.method,
                restarts=opt.restarts,
                seed=opt.seed,
                fd_step=opt.fd_step,
                max_evals=opt.max_evals,
            ),
            reps=self.ansatz.reps,
            measurement=self.measurement.mode,
            shots=self.measurement.shots,
            scf_tol=self.meanfield.tol,
            scf_max_iter=self.meanfield.max_iter,
            scf_mixing=self.meanfield.mixing,
            mitigate_in_loop=self.noise_sweep.mitigate_in_loop,
            stretches=self.noise_sweep.stretches,
            combos=self.ansatz.combos,
        )


def _require(condition: bool, key: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"{key}: {message}")


def _choices(key: str, values: tuple[str, ...], allowed: tuple[str, ...]) -> None:
    for value in values:
        _require(value in allowed, key, f"{value!r} is not one of {', '.join(allowed)}")


def _validate(config: ExperimentConfig) -> None:
    _require(config.field_schedule in FIELD_SCHEDULES, "field_schedule", f"expected one of {FIELD_SCHEDULES}")
    for name, lattice in (("lattice", config.lattice), ("noise_sweep", config.noise_sweep)):
        _require(lattice.nx >= 1, f"{name}.nx", "must be at least 1")
        _require(lattice.ny >= 1, f"{name}.ny", "must be at least 1")
    _require(len(config.u_sweep.u_grid) > 0, "u_sweep.u_grid", "must not be empty")
    _choices("u_sweep.algorithms", config.u_sweep.algorithms, ALGORITHMS)
    _choices("noise_sweep.algorithms", config.noise_sweep.algorithms, ALGORITHMS)
    grid = config.noise_sweep.gate_time_over_t2
    _require(len(grid) > 0, "noise_sweep.gate_time_over_t2", "must not be empty")
    _require(all(0.0 <= g < 1.0 for g in grid), "noise_sweep.gate_time_over_t2", "values must lie in [0, 1)")
    stretches = config.noise_sweep.stretches
    _require(len(set(stretches)) >= 2, "noise_sweep.stretches", "needs at least two distinct stretch factors")
    _require(all(s >= 1.0 for s in stretches), "noise_sweep.stretches", "stretch factors must be at least 1")
    _require(config.ansatz.reps >= 1, "ansatz.reps", "must be at least 1")
    _require(len(config.ansatz.combos) > 0, "ansatz.combos", "must not be empty")
    _choices("ansatz.combos", config.ansatz.combos, SYMMETRY_COMBOS)
    _choices("optimizer.method", (config.optimizer.method,), OPTIMIZER_METHODS)
    _require(config.optimizer.restarts >= 1, "optimizer.restarts", "must be at least 1")
    _require(config.optimizer.max_evals >= 1, "optimizer.max_evals", "must be at least 1")
    _require(config.optimizer.fd_step > 0, "optimizer.fd_step", "must be positive")
    _require(0.0 < config.meanfield.mixing <= 1.0, "meanfield.mixing", "must lie in (0, 1]")
    _require(config.meanfield.tol > 0, "meanfield.tol", "must be positive")
    _require(config.meanfield.max_iter >= 1, "meanfield.max_iter", "must be at least 1")
    _choices("measurement.mode", (config.measurement.mode,), MEASUREMENT_MODES)
    _require(config.measurement.shots >= 1, "measurement.shots", "must be positive")
    _require(config.output.jobs >= 1, "output.jobs", "must be at least 1")


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Check ``value`` against the type of the field's default."""
    if isinstance(default, bool):
        _require(isinstance(value, bool), key, f"expected a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        _require(isinstance(value, int) and not isinstance(value, bool), key, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        _require(
            isinstance(value, (int, float)) and not isinstance(value, bool), key, f"expected a number, got {value!r}"
        )
        return float(value)
    if isinstance(default, str):
        _require(isinstance(value, str), key, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        _require(isinstance(value, list), key, f"expected an array, got {value!r}")
        item = default[0] if default else ""
        return tuple(_coerce(f"{key}[{i}]", v, item) for i, v in enumerate(value))
    raise ConfigError(f"{key}: unsupported field type")


def _build_section(name: str, table: Any) -> Any:
    cls = _SECTIONS[name]
    _require(isinstance(table, dict), name, "expected a table")
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    values = {}
    for key, value in table.items():
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        values[key] = _coerce(f"{name}.{key}", value, getattr(defaults, key))
    return cls(**values)


def parse_config(text: str) -> ExperimentConfig:
    """Parse TOML text; absent keys take their defaults."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from e
    values: dict[str, Any] = {}
    for key, value in data.items():
        if key == "field_schedule":
            values[key] = _coerce(key, value, "")
        elif key in _SECTIONS:
            values[key] = _build_section(key, value)
        else:
            raise ConfigError(f"unknown key {key}")
    return ExperimentConfig(**values)


def load_config(path: Optional[Union[str, Path]]) -> ExperimentConfig:
    """Read a configuration file; ``None`` yields the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    return parse_config(text)
