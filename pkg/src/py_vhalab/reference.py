"""Exact diagonalization, observable reporting and Richardson extrapolation."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING, Callable

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .circuit import NoiseModel, expectation
from .constants import ED_DEGENERACY_TOLERANCE, IMAGINARY_PART_TOLERANCE, MAX_DENSE_MODES
from .exceptions import MatrixSizeError, MitigationError
from .fermion import operator_matrix
from .hubbard import LatticeSpec, qubit_hamiltonian, qubit_observables

if TYPE_CHECKING:
    from .solve import Evaluation, RunResult, SolveConfig

logger = logging.getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]

# Lowest eigenpairs requested from the dense solver
_ED_LEVELS = 16


@dataclass(frozen=True)
class EDResult:
    energy: float
    state: ComplexArray
    m_af: float
    delta_s: float
    degeneracy: int
    residual: float


@lru_cache(maxsize=64)
def exact_ground_state(spec: LatticeSpec) -> EDResult:
    """Lowest eigenpair of the full Hamiltonian over the whole Fock space."""
    if spec.mode_count > MAX_DENSE_MODES:
        raise MatrixSizeError(f"{spec.mode_count} modes exceeds the limit of {MAX_DENSE_MODES} for diagonalization")
    sparse = qubit_hamiltonian(spec).sparse_matrix()
    if not np.any(sparse.data.imag):
        matrix = sparse.real.toarray()
    else:
        matrix = operator_matrix(qubit_hamiltonian(spec))
    levels = min(_ED_LEVELS, matrix.shape[0])
    values, vectors = scipy.linalg.eigh(matrix, subset_by_index=[0, levels - 1])
    energy = float(values[0])
    state = np.asarray(vectors[:, 0], dtype=np.complex128)
    pivot = int(np.argmax(np.abs(state)))
    state = state * (abs(state[pivot]) / state[pivot])
    residual = float(np.linalg.norm(matrix @ state - energy * state))
    degeneracy = int(np.sum(values - energy < ED_DEGENERACY_TOLERANCE))
    # shared through the cache
    state.flags.writeable = False
    m_af, delta_s = report_observables(state, spec)
    logger.debug("ED %s U=%g: E=%.10g degeneracy %d", spec.label(), spec.u, energy, degeneracy)
    return EDResult(energy, state, m_af, delta_s, degeneracy, residual)


def report_observables(state: ComplexArray, spec: LatticeSpec) -> tuple[float, float]:
    """``(m_af, delta_s)`` as signed reals for a state vector or density matrix.

    The pairing sum is not Hermitian; its real part is reported and an
    imaginary part above tolerance is logged.
    """
    m_af_op, delta_s_op = qubit_observables(spec)
    m_af = expectation(state, m_af_op)
    delta_s = expectation(state, delta_s_op)
    if abs(delta_s.imag) > IMAGINARY_PART_TOLERANCE:
        logger.warning("pairing expectation has imaginary part %.3g", delta_s.imag)
    return float(m_af.real), float(delta_s.real)


def richardson_extrapolate(values: Sequence[tuple[float, float]]) -> float:
    """Zero-stretch intercept of the least-squares line through ``(stretch, value)`` pairs."""
    if len(values) < 2:
        raise MitigationError(f"extrapolation needs at least two points, got {len(values)}")
    stretches = np.array([s for s, _ in values], dtype=np.float64)
    samples = np.array([v for _, v in values], dtype=np.float64)
    if np.ptp(stretches) == 0.0:
        raise MitigationError(f"extrapolation needs distinct stretch factors, got {stretches.tolist()}")
    if np.all(samples == samples[0]):
        return float(samples[0])
    _, intercept = np.polyfit(stretches, samples, 1)
    return float(intercept)


@dataclass(frozen=True)
class MitigatedResult:
    raw: "RunResult"
    evaluations: tuple[tuple[float, "Evaluation"], ...]
    energy: float
    m_af: float
    delta_s: float


def mitigated_run(
    driver: Callable[[LatticeSpec, "SolveConfig", NoiseModel], "RunResult"],
    spec: LatticeSpec,
    config: "SolveConfig",
    noise: NoiseModel,
) -> MitigatedResult:
    """Optimize at the base noise level, re-evaluate at every stretch and extrapolate."""
    from .solve import Evaluation, evaluate_result

    raw = driver(spec, config, noise)
    if noise.is_noiseless:
        same = Evaluation(raw.energy, raw.m_af, raw.delta_s)
        evaluations = tuple((s, same) for s in config.stretches)
    else:
        evaluations = tuple((s, evaluate_result(spec, raw, config, noise.stretched(s))) for s in config.stretches)
    return MitigatedResult(
        raw=raw,
        evaluations=evaluations,
        energy=richardson_extrapolate([(s, e.energy) for s, e in evaluations]),
        m_af=richardson_extrapolate([(s, e.m_af) for s, e in evaluations]),
        delta_s=richardson_extrapolate([(s, e.delta_s) for s, e in evaluations]),
    )
