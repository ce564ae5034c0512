"""Constants used throughout py-vhalab."""

from typing import Final

# Coefficients below this magnitude are dropped when operators are simplified
COEFFICIENT_TOLERANCE: Final[float] = 1e-12

# Hermiticity / antisymmetry checks on matrices
MATRIX_TOLERANCE: Final[float] = 1e-12

# Largest mode count for which dense matrices are built (dimension 2^14)
MAX_DENSE_MODES: Final[int] = 14

# Orbital energies closer than this are treated as a degenerate Fermi level
DEGENERACY_TOLERANCE: Final[float] = 1e-9

# ED eigenvalues closer than this to the ground energy count towards the degeneracy
ED_DEGENERACY_TOLERANCE: Final[float] = 1e-8

# Imaginary part of the pairing expectation that triggers a diagnostic warning
IMAGINARY_PART_TOLERANCE: Final[float] = 1e-6

# Gate kinds and durations in units of the single-qubit gate time
GATE_KINDS: Final[tuple[str, ...]] = ("RX", "RY", "RZ", "CZ")
GATE_DURATIONS: Final[dict[str, float]] = {"RX": 1.0, "RY": 1.0, "RZ": 0.0, "CZ": 3.0}

# Lattice defaults
DEFAULT_HOPPING: Final[float] = -1.0
DEFAULT_U_SWEEP_LATTICE: Final[tuple[int, int]] = (3, 2)
DEFAULT_NOISE_LATTICE: Final[tuple[int, int]] = (2, 2)
DEFAULT_NOISE_U: Final[float] = -3.0

# External-field schedule
FIELD_SCHEDULES: Final[tuple[str, ...]] = ("abs", "literal", "off")
MINIMUM_FIELD: Final[float] = 0.1
FIELD_SLOPE: Final[float] = 0.1

# Mean-field self-consistency
SCF_MIXING: Final[float] = 0.5
SCF_TOLERANCE: Final[float] = 1e-8
SCF_MAX_ITER: Final[int] = 500
MEAN_FIELD_KINDS: Final[tuple[str, ...]] = ("BCS", "AF", "COMBINED")

# Ansatz
DEFAULT_REPS: Final[int] = 4
ANSATZ_KINDS: Final[tuple[str, ...]] = ("VHA", "VEHA", "VMFHA")
SYMMETRY_COMBOS: Final[tuple[str, ...]] = ("BCS", "AF", "BCS+AF")

# Optimizer
OPTIMIZER_METHODS: Final[tuple[str, ...]] = ("auto", "quasi-newton-fd", "cobyla")
DEFAULT_RESTARTS: Final[int] = 10
DEFAULT_SEED: Final[int] = 1234
DEFAULT_FD_STEP: Final[float] = 1e-6
DEFAULT_MAX_EVALS: Final[int] = 2000
COBYLA_RHOBEG: Final[float] = 0.5
COBYLA_TOL: Final[float] = 1e-8

# Measurement
MEASUREMENT_MODES: Final[tuple[str, ...]] = ("exact", "shots")
DEFAULT_SHOTS: Final[int] = 25000

# Richardson mitigation
DEFAULT_STRETCHES: Final[tuple[float, ...]] = (1.0, 1.5)

# Algorithms understood by the sweep runners, in CSV order
ALGORITHMS: Final[tuple[str, ...]] = ("ED", "MF", "VHA-PS", "VEHA", "VMFHA")

# Default sweep grids
DEFAULT_U_GRID: Final[tuple[float, ...]] = tuple(-4.0 + 0.5 * i for i in range(17))
DEFAULT_NOISE_GRID: Final[tuple[float, ...]] = (0.0, 1e-6, 5e-6, 1e-5, 5e-5, 1e-4)

# CSV schema; the last three columns carry provenance
CSV_COLUMNS: Final[tuple[str, ...]] = (
    "u",
    "algorithm",
    "energy",
    "ed_energy",
    "rel_err",
    "m_af",
    "delta_s",
    "gate_time_over_t2",
    "mitigated",
    "shots",
    "seed",
    "restart_index",
    "gate_count",
    "circuit_duration",
    "n_evals",
    "error",
    "restart_energies",
    "config_hash",
    "version",
)

# Output file names
U_SWEEP_CSV: Final[str] = "u_sweep.csv"
NOISE_SWEEP_CSV: Final[str] = "noise_sweep.csv"
ED_CSV: Final[str] = "ed.csv"
FIGURE_FILES: Final[dict[str, str]] = {
    "1": "fig1_rel_error.svg",
    "2": "fig2_observables.svg",
    "3": "fig3_noise_energy.svg",
    "4": "fig4_noise_delta.svg",
}

# Environment variable supplying the default worker count
JOBS_ENV_VAR: Final[str] = "VHALAB_JOBS"

# Timeouts (in seconds)
GIT_DESCRIBE_TIMEOUT: Final[int] = 10

# Objective value reported for parameter points where the trial state is ill-defined
OBJECTIVE_SENTINEL: Final[float] = 1e6
