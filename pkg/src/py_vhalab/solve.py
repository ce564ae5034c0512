"""Energy minimization, multi-start post-selection and the algorithm drivers.

Every driver returns a :class:`RunResult` whose energy is the lowest value seen
over all restarts of the selected candidate (mean-field order for VHA-PS,
symmetry-breaking combination for VEHA). Noiseless objectives use a bounded
quasi-Newton method with central finite-difference gradients; noisy ones use
COBYLA.
"""

import functools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, TypeVar, cast

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize

from .ansatz import AnsatzSpec, veha_spec, vha_spec, vmfha_spec
from .circuit import (
    Circuit,
    NoiseModel,
    apply_circuit_noisy,
    apply_circuit_pure,
    apply_rotations_pure,
    expectation,
    sample_pauli_expectation,
    zero_state,
)
from .constants import (
    COBYLA_RHOBEG,
    COBYLA_TOL,
    DEFAULT_FD_STEP,
    DEFAULT_MAX_EVALS,
    DEFAULT_REPS,
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    DEFAULT_SHOTS,
    DEFAULT_STRETCHES,
    MEASUREMENT_MODES,
    OBJECTIVE_SENTINEL,
    OPTIMIZER_METHODS,
    SCF_MAX_ITER,
    SCF_MIXING,
    SCF_TOLERANCE,
    SYMMETRY_COMBOS,
)
from .exceptions import NumericalError, SelfConsistencyError, VhaLabError
from .hubbard import LatticeSpec, qubit_hamiltonian
from .meanfield import (
    MeanFieldParams,
    build_mf_hamiltonian,
    gaussian_prep_circuit,
    mean_field_energy,
    mean_field_state,
    self_consistent_loop,
)
from .reference import report_observables, richardson_extrapolate

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
State = npt.NDArray[np.complex128]
Objective = Callable[[FloatArray], float]
Bounds = Sequence[tuple[float, float]]

# Mean-field orders tried by VHA-PS and MF
MEAN_FIELD_ORDERS = ("BCS", "AF")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str = "auto"
    restarts: int = DEFAULT_RESTARTS
    seed: int = DEFAULT_SEED
    fd_step: float = DEFAULT_FD_STEP
    max_evals: int = DEFAULT_MAX_EVALS

    def __post_init__(self) -> None:
        if self.method not in OPTIMIZER_METHODS:
            raise ValueError(f"unknown optimizer {self.method!r}; expected one of {OPTIMIZER_METHODS}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be at least 1, got {self.restarts}")
        if self.max_evals < 1:
            raise ValueError(f"max_evals must be at least 1, got {self.max_evals}")
        if self.fd_step <= 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")

    def resolve(self, noisy: bool) -> str:
        if self.method != "auto":
            return self.method
        return "cobyla" if noisy else "quasi-newton-fd"


@dataclass(frozen=True)
class SolveConfig:
    """Everything a driver needs besides the lattice and the noise model."""

    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    reps: int = DEFAULT_REPS
    measurement: str = "exact"
    shots: int = DEFAULT_SHOTS
    scf_tol: float = SCF_TOLERANCE
    scf_max_iter: int = SCF_MAX_ITER
    scf_mixing: float = SCF_MIXING
    mitigate_in_loop: bool = False
    stretches: tuple[float, ...] = DEFAULT_STRETCHES
    combos: tuple[str, ...] = SYMMETRY_COMBOS

    def __post_init__(self) -> None:
        if self.measurement not in MEASUREMENT_MODES:
            raise ValueError(f"unknown measurement mode {self.measurement!r}")
        if self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")
        for combo in self.combos:
            if combo not in SYMMETRY_COMBOS:
                raise ValueError(f"unknown symmetry-breaking combination {combo!r}")


@dataclass(frozen=True)
class MinimizeResult:
    x: FloatArray
    value: float
    n_evals: int
    exhausted: bool
    trace: tuple[float, ...] = ()


@dataclass(frozen=True)
class Evaluation:
    energy: float
    m_af: float
    delta_s: float


@dataclass(frozen=True)
class RunResult:
    """Outcome of one algorithm at one lattice point."""

    algorithm: str
    energy: float
    parameters: tuple[float, ...]
    m_af: float = math.nan
    delta_s: float = math.nan
    n_evals: int = 0
    restart_energies: tuple[float, ...] = ()
    selected_restart: int = 0
    gate_count: int = 0
    circuit_duration: float = 0.0
    label: str = ""
    mf_params: Optional[MeanFieldParams] = None
    exhausted: bool = False
    candidate_energies: tuple[tuple[str, float], ...] = ()


class _BudgetExhausted(Exception):
    pass


class _TrackedObjective:
    """Counts evaluations, remembers the best point and enforces the budget."""

    def __init__(self, objective: Objective, max_evals: int) -> None:
        self.objective = objective
        self.max_evals = max_evals
        self.n_evals = 0
        self.best_value = math.inf
        self.best_x: Optional[FloatArray] = None
        self.trace: list[float] = []

    def __call__(self, x: FloatArray) -> float:
        if self.n_evals >= self.max_evals:
            raise _BudgetExhausted
        point = np.array(x, dtype=np.float64)
        value = float(self.objective(point))
        if not math.isfinite(value):
            value = OBJECTIVE_SENTINEL
        self.n_evals += 1
        self.trace.append(value)
        if value < self.best_value:
            self.best_value = value
            self.best_x = point
        return value


def _finite_difference(
    tracked: _TrackedObjective, bounds: Bounds, step: float
) -> Callable[[FloatArray], tuple[float, FloatArray]]:
    def value_and_gradient(x: FloatArray) -> tuple[float, FloatArray]:
        value = tracked(x)
        gradient = np.zeros_like(x, dtype=np.float64)
        for i, (low, high) in enumerate(bounds):
            forward, backward = np.array(x, dtype=np.float64), np.array(x, dtype=np.float64)
            forward[i] += step
            backward[i] -= step
            if forward[i] > high:
                gradient[i] = (value - tracked(backward)) / step
            elif backward[i] < low:
                gradient[i] = (tracked(forward) - value) / step
            else:
                gradient[i] = (tracked(forward) - tracked(backward)) / (2 * step)
        return value, gradient

    return value_and_gradient


def _draw_starts(bounds: Bounds, restarts: int, seed: int) -> list[FloatArray]:
    low = np.array([b[0] for b in bounds], dtype=np.float64)
    high = np.array([b[1] for b in bounds], dtype=np.float64)
    starts = []
    for child in np.random.SeedSequence(seed).spawn(restarts):
        rng = np.random.Generator(np.random.Philox(child))
        starts.append(rng.uniform(low, high))
    return starts


def minimize_energy(
    objective: Objective,
    config: OptimizerConfig,
    bounds: Bounds,
    x0: Optional[npt.ArrayLike] = None,
    noisy: bool = False,
) -> MinimizeResult:
    """Minimize within box ``bounds``; the returned point is the best one ever evaluated.

    Without ``x0`` the start is the first seeded draw that
    :func:`multistart_postselect` would use. An exhausted budget is reported
    through ``exhausted`` and never raised.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    start = _draw_starts(bounds, 1, config.seed)[0] if x0 is None else np.asarray(x0, dtype=np.float64)
    start = np.clip(start, [b[0] for b in bounds], [b[1] for b in bounds])
    tracked = _TrackedObjective(objective, config.max_evals)
    method = config.resolve(noisy)
    exhausted = False
    try:
        if not bounds:
            tracked(start)
        elif method == "quasi-newton-fd":
            minimize(
                _finite_difference(tracked, bounds, config.fd_step),
                start,
                jac=True,
                method="L-BFGS-B",
                bounds=bounds,
                options={"maxfun": config.max_evals, "maxiter": config.max_evals},
            )
        else:
            minimize(
                tracked,
                start,
                method="COBYLA",
                bounds=bounds,
                tol=COBYLA_TOL,
                options={"maxiter": config.max_evals, "rhobeg": COBYLA_RHOBEG},
            )
    except _BudgetExhausted:
        exhausted = True
        logger.warning("optimizer budget of %d evaluations exhausted; keeping best point", config.max_evals)
    if tracked.best_x is None:
        tracked(start)
    assert tracked.best_x is not None
    return MinimizeResult(tracked.best_x, tracked.best_value, tracked.n_evals, exhausted, tuple(tracked.trace))


def multistart_postselect(
    objective: Objective,
    config: OptimizerConfig,
    bounds: Bounds,
    start_bounds: Optional[Bounds] = None,
    anchors: Sequence[npt.ArrayLike] = (),
    noisy: bool = False,
    algorithm: str = "",
) -> RunResult:
    """Run ``config.restarts`` minimizations and keep the lowest energy.

    Starts are uniform in ``start_bounds`` (default ``bounds``) from
    independent seeded streams; ``anchors`` replace the first starts.
    """
    starts = _draw_starts(start_bounds if start_bounds is not None else bounds, config.restarts, config.seed)
    for i, anchor in enumerate(list(anchors)[: config.restarts]):
        starts[i] = np.asarray(anchor, dtype=np.float64)
    results = []
    for index, start in enumerate(starts):
        result = minimize_energy(objective, config, bounds, x0=start, noisy=noisy)
        logger.debug("restart %d: %.10g after %d evaluations", index, result.value, result.n_evals)
        results.append(result)
    energies = tuple(r.value for r in results)
    best = int(np.argmin(energies))
    return RunResult(
        algorithm=algorithm,
        energy=energies[best],
        parameters=tuple(float(v) for v in results[best].x),
        n_evals=sum(r.n_evals for r in results),
        restart_energies=energies,
        selected_restart=best,
        exhausted=any(r.exhausted for r in results),
    )


def _evaluation_seed(seed: int, counter: int) -> int:
    return int(np.random.SeedSequence([seed, counter]).generate_state(1)[0])


class EnergyObjective:
    """``<H>`` of an ansatz trial state, external fields included.

    Noiseless states are built by simulating the preparation circuit and then
    applying the body's Pauli rotations directly; noisy states evolve the
    lowered circuit as a density matrix.
    """

    def __init__(
        self,
        ansatz: AnsatzSpec,
        config: SolveConfig,
        noise: NoiseModel,
        mf_params: Optional[MeanFieldParams] = None,
        strict: bool = False,
    ) -> None:
        self.ansatz = ansatz
        self.config = config
        self.noise = noise
        self.mf_params = mf_params
        self.strict = strict
        self.hamiltonian = qubit_hamiltonian(ansatz.lattice)
        self.evaluations = 0
        self._initial: Optional[State] = None

    @property
    def noisy(self) -> bool:
        return not self.noise.is_noiseless or self.config.measurement == "shots"

    def _initial_circuit(self, params: FloatArray) -> Circuit:
        _, _, own = self.ansatz.split(params)
        return self.ansatz.initial_circuit(own if own is not None else self.mf_params, strict=self.strict)

    def state(self, params: npt.ArrayLike, noise: Optional[NoiseModel] = None) -> State:
        self.ansatz.split(params)
        bounds = self.ansatz.bounds()
        vector = np.clip(
            np.asarray(params, dtype=np.float64), [b[0] for b in bounds], [b[1] for b in bounds]
        )
        noise = self.noise if noise is None else noise
        modes = self.ansatz.lattice.mode_count
        if noise.is_noiseless:
            if self.ansatz.mf_count or self._initial is None:
                initial = apply_circuit_pure(self._initial_circuit(vector), zero_state(modes))
                if not self.ansatz.mf_count:
                    self._initial = initial
            else:
                initial = self._initial
            return apply_rotations_pure(self.ansatz.program(vector), initial)
        circuit = self.ansatz.circuit(vector, self.mf_params, strict=self.strict)
        return apply_circuit_noisy(circuit, zero_state(modes), noise)

    def measure(self, state: State) -> float:
        if self.config.measurement == "shots":
            self.evaluations += 1
            seed = _evaluation_seed(self.config.optimizer.seed, self.evaluations)
            return sample_pauli_expectation(state, self.hamiltonian, self.config.shots, seed)
        return float(expectation(state, self.hamiltonian).real)

    def energy(self, params: npt.ArrayLike, noise: Optional[NoiseModel] = None) -> float:
        noise = self.noise if noise is None else noise
        if self.config.mitigate_in_loop and not noise.is_noiseless:
            points = [(s, self.measure(self.state(params, noise.stretched(s)))) for s in self.config.stretches]
            return richardson_extrapolate(points)
        return self.measure(self.state(params, noise))

    def __call__(self, params: FloatArray) -> float:
        try:
            return self.energy(params)
        except (VhaLabError, ValueError) as exc:
            logger.debug("objective rejected parameters: %s", exc)
            return OBJECTIVE_SENTINEL


def _finalize(
    result: RunResult, objective: EnergyObjective, label: str, mf_params: Optional[MeanFieldParams]
) -> RunResult:
    params = np.array(result.parameters)
    _, _, own = objective.ansatz.split(params)
    state = objective.state(params)
    m_af, delta_s = report_observables(state, objective.ansatz.lattice)
    circuit = objective.ansatz.circuit(params, mf_params)
    return replace(
        result,
        m_af=m_af,
        delta_s=delta_s,
        gate_count=len(circuit),
        circuit_duration=circuit.total_duration,
        label=label,
        mf_params=own if own is not None else mf_params,
    )


def _converged_orders(spec: LatticeSpec, config: SolveConfig) -> dict[str, MeanFieldParams]:
    converged = {}
    for kind in MEAN_FIELD_ORDERS:
        try:
            converged[kind] = self_consistent_loop(
                spec, kind, tol=config.scf_tol, max_iter=config.scf_max_iter, mixing=config.scf_mixing
            )
        except SelfConsistencyError as exc:
            logger.warning("skipping %s order at U=%g: %s", kind, spec.u, exc)
    if not converged:
        raise SelfConsistencyError(f"no mean-field order converged at U={spec.u}")
    return converged


def _select(algorithm: str, candidates: dict[str, RunResult]) -> RunResult:
    label = min(candidates, key=lambda k: candidates[k].energy)
    return replace(
        candidates[label],
        algorithm=algorithm,
        n_evals=sum(r.n_evals for r in candidates.values()),
        exhausted=any(r.exhausted for r in candidates.values()),
        candidate_energies=tuple((k, r.energy) for k, r in candidates.items()),
    )


_Driver = TypeVar("_Driver", bound=Callable[..., RunResult])


def numerical_guard(driver: _Driver) -> _Driver:
    """Re-raise linear-algebra and floating-point failures of ``driver`` as :class:`NumericalError`."""

    @functools.wraps(driver)
    def guarded(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
        try:
            return driver(spec, config, noise)
        except (np.linalg.LinAlgError, ArithmeticError) as exc:
            raise NumericalError(f"{driver.__name__} failed at U={spec.u}: {exc}") from exc

    return cast(_Driver, guarded)


@numerical_guard
def run_mf(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
    """Self-consistent BCS and AF mean fields; the lower full-Hamiltonian energy wins.

    Under noise the preparation circuit is simulated as a density matrix;
    otherwise the exact Gaussian state is used.
    """
    noise = noise or NoiseModel()
    candidates = {}
    for kind, params in _converged_orders(spec, config).items():
        circuit = gaussian_prep_circuit(build_mf_hamiltonian(spec, params))
        if noise.is_noiseless:
            state = mean_field_state(spec, params).state
            energy = mean_field_energy(spec, params)
        else:
            state = apply_circuit_noisy(circuit, zero_state(spec.mode_count), noise)
            energy = float(expectation(state, qubit_hamiltonian(spec)).real)
        m_af, delta_s = report_observables(state, spec)
        candidates[kind] = RunResult(
            algorithm="MF",
            energy=energy,
            parameters=tuple(float(v) for v in params.as_vector()),
            m_af=m_af,
            delta_s=delta_s,
            restart_energies=(energy,),
            gate_count=len(circuit),
            circuit_duration=circuit.total_duration,
            label=kind,
            mf_params=params,
        )
    return _select("MF", candidates)


@numerical_guard
def run_vha_ps(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
    """VHA from each converged mean-field order, post-selected by energy."""
    noise = noise or NoiseModel()
    candidates = {}
    for kind, params in _converged_orders(spec, config).items():
        ansatz = vha_spec(spec, config.reps, kind)
        objective = EnergyObjective(ansatz, config, noise, mf_params=params)
        result = multistart_postselect(
            objective,
            config.optimizer,
            ansatz.bounds(),
            anchors=[np.zeros(ansatz.parameter_count)],
            noisy=objective.noisy,
            algorithm="VHA-PS",
        )
        candidates[kind] = _finalize(result, objective, kind, params)
    return _select("VHA-PS", candidates)


@numerical_guard
def run_veha(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
    """VEHA from the vacuum for every symmetry-breaking combination, post-selected by energy."""
    noise = noise or NoiseModel()
    candidates = {}
    for combo in config.combos:
        ansatz = veha_spec(spec, config.reps, combo)
        objective = EnergyObjective(ansatz, config, noise)
        result = multistart_postselect(
            objective, config.optimizer, ansatz.bounds(), noisy=objective.noisy, algorithm="VEHA"
        )
        candidates[combo] = _finalize(result, objective, combo, None)
    return _select("VEHA", candidates)


def _combined(params: MeanFieldParams) -> MeanFieldParams:
    return MeanFieldParams(
        "COMBINED",
        delta_s=params.delta_s if params.has_pairing else 0.0,
        n_minus=params.n_minus if params.has_occupations else 0.5,
        n_plus=params.n_plus if params.has_occupations else 0.5,
    )


@numerical_guard
def run_vmfha(spec: LatticeSpec, config: SolveConfig, noise: Optional[NoiseModel] = None) -> RunResult:
    """VHA angles and combined mean fields optimized together.

    The self-consistent orders that converge seed the first restarts; points
    where the preparation is ill-defined score a large finite sentinel.
    """
    noise = noise or NoiseModel()
    ansatz = vmfha_spec(spec, config.reps)
    objective = EnergyObjective(ansatz, config, noise, strict=True)
    bounds = ansatz.bounds()
    anchors = []
    try:
        orders = _converged_orders(spec, config)
    except SelfConsistencyError:
        orders = {}
    for params in orders.values():
        anchor = np.concatenate([np.zeros(ansatz.theta_count), _combined(params).as_vector()])
        anchors.append(np.clip(anchor, [b[0] for b in bounds], [b[1] for b in bounds]))
    result = multistart_postselect(
        objective,
        config.optimizer,
        bounds,
        start_bounds=ansatz.start_bounds(),
        anchors=anchors,
        noisy=objective.noisy,
        algorithm="VMFHA",
    )
    return _finalize(result, objective, "COMBINED", None)


DRIVERS: dict[str, Callable[[LatticeSpec, SolveConfig, Optional[NoiseModel]], RunResult]] = {
    "MF": run_mf,
    "VHA-PS": run_vha_ps,
    "VEHA": run_veha,
    "VMFHA": run_vmfha,
}


def ansatz_for(spec: LatticeSpec, result: RunResult, reps: int) -> Optional[AnsatzSpec]:
    """Ansatz that produced ``result``; ``None`` for the plain mean field."""
    if result.algorithm == "VHA-PS":
        return vha_spec(spec, reps, result.label)
    if result.algorithm == "VEHA":
        return veha_spec(spec, reps, result.label)
    if result.algorithm == "VMFHA":
        return vmfha_spec(spec, reps, result.label or "COMBINED")
    return None


def evaluate_result(spec: LatticeSpec, result: RunResult, config: SolveConfig, noise: NoiseModel) -> Evaluation:
    """Energy and observables of a finished run's trial state under ``noise``."""
    ansatz = ansatz_for(spec, result, config.reps)
    if ansatz is None:
        if result.mf_params is None:
            raise ValueError(f"{result.algorithm} result carries no mean-field parameters")
        circuit = gaussian_prep_circuit(build_mf_hamiltonian(spec, result.mf_params))
        state = apply_circuit_noisy(circuit, zero_state(spec.mode_count), noise)
    else:
        state = EnergyObjective(ansatz, config, noise, mf_params=result.mf_params).state(np.array(result.parameters))
    hamiltonian = qubit_hamiltonian(spec)
    if config.measurement == "shots":
        energy = sample_pauli_expectation(state, hamiltonian, config.shots, _evaluation_seed(config.optimizer.seed, 0))
    else:
        energy = float(expectation(state, hamiltonian).real)
    m_af, delta_s = report_observables(state, spec)
    return Evaluation(energy, m_af, delta_s)
