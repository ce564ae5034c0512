"""Mean-field Hamiltonians, their Gaussian ground states and preparation circuits.

Quadratic Hamiltonians use the convention

    H = sum_ij h_ij c_i^dagger c_j + 1/2 sum_ij (P_ij c_i c_j + h.c.) + constant

with ``h`` Hermitian and ``P`` antisymmetric. Particle-conserving ground states
are Slater determinants at half filling and are prepared with a Givens network
on the filled-orbital rectangle. States with pairing are Bogoliubov vacua and
are prepared from the Majorana form: the orthogonal rotation that
block-diagonalizes it is factored into adjacent Majorana rotations, preceded by
a particle-hole flip of the last mode when the rotation has determinant -1.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Optional

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse as sp

from .circuit import Circuit, expectation, pauli_rotation, rng_from_seed
from .constants import (
    DEGENERACY_TOLERANCE,
    MATRIX_TOLERANCE,
    MAX_DENSE_MODES,
    MEAN_FIELD_KINDS,
    SCF_MAX_ITER,
    SCF_MIXING,
    SCF_TOLERANCE,
)
from .exceptions import (
    DegenerateFermiLevelError,
    MatrixSizeError,
    MeanFieldError,
    NonHermitianError,
    SelfConsistencyError,
)
from .fermion import FermionOperator, majorana
from .hubbard import DOWN, SPINS, UP, LatticeSpec, bonds, qubit_hamiltonian, qubit_observables

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

# Rotations with a smaller component to eliminate are skipped
_GIVENS_TOLERANCE = 1e-14


@dataclass(frozen=True)
class MeanFieldParams:
    """Order-parameter values; only the fields relevant to ``kind`` are read.

    ``delta_s`` is the on-site gap per site, so the reported pairing observable
    equals ``nx * ny * delta_s`` at a self-consistent point.
    """

    kind: str
    delta_s: float = 0.0
    n_minus: float = 0.5
    n_plus: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in MEAN_FIELD_KINDS:
            raise ValueError(f"unknown mean-field kind {self.kind!r}; expected one of {MEAN_FIELD_KINDS}")
        for name in ("delta_s", "n_minus", "n_plus"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"mean field {name} must be finite, got {getattr(self, name)}")

    @property
    def has_pairing(self) -> bool:
        return self.kind in ("BCS", "COMBINED")

    @property
    def has_occupations(self) -> bool:
        return self.kind in ("AF", "COMBINED")

    def as_vector(self) -> FloatArray:
        values = []
        if self.has_pairing:
            values.append(self.delta_s)
        if self.has_occupations:
            values.extend([self.n_minus, self.n_plus])
        return np.array(values, dtype=np.float64)

    @classmethod
    def from_vector(cls, kind: str, vector: npt.ArrayLike) -> "MeanFieldParams":
        values = [float(v) for v in np.ravel(vector)]
        expected = parameter_count(kind)
        if len(values) != expected:
            raise ValueError(f"{kind} mean field takes {expected} value(s), got {len(values)}")
        if kind == "BCS":
            return cls(kind, delta_s=values[0])
        if kind == "AF":
            return cls(kind, n_minus=values[0], n_plus=values[1])
        return cls(kind, delta_s=values[0], n_minus=values[1], n_plus=values[2])


def parameter_count(kind: str) -> int:
    return {"BCS": 1, "AF": 2, "COMBINED": 3}[kind]


@dataclass(frozen=True)
class BogoliubovTransform:
    """Canonical form of a quadratic Hamiltonian in Majorana operators.

    ``rotation`` is orthogonal with rows giving the new Majoranas in terms of
    the old ones; ``energies`` are the non-negative quasi-particle energies.
    """

    energies: FloatArray
    rotation: FloatArray
    ground_energy: float

    @property
    def odd_parity(self) -> bool:
        return bool(np.linalg.det(self.rotation) < 0)

    def nambu_matrix(self) -> ComplexArray:
        """Unitary ``W`` with ``(b, b^dagger) = W (a, a^dagger)``."""
        omega = _omega(self.energies.shape[0])
        return 2.0 * omega @ self.rotation @ omega.conj().T


@dataclass(frozen=True)
class QuadraticHamiltonian:
    hopping: ComplexArray
    pairing: ComplexArray
    constant: float = 0.0

    def __post_init__(self) -> None:
        hopping = np.asarray(self.hopping, dtype=np.complex128)
        pairing = np.asarray(self.pairing, dtype=np.complex128)
        if hopping.ndim != 2 or hopping.shape[0] != hopping.shape[1] or pairing.shape != hopping.shape:
            raise ValueError(f"hopping {hopping.shape} and pairing {pairing.shape} must be equal square matrices")
        if not np.all(np.isfinite(hopping)) or not np.all(np.isfinite(pairing)):
            raise NonHermitianError("quadratic Hamiltonian has non-finite coefficients")
        if not np.allclose(hopping, hopping.conj().T, atol=MATRIX_TOLERANCE, rtol=0.0):
            raise NonHermitianError("hopping block is not Hermitian")
        if not np.allclose(pairing, -pairing.T, atol=MATRIX_TOLERANCE, rtol=0.0):
            raise ValueError("pairing block is not antisymmetric")
        object.__setattr__(self, "hopping", hopping)
        object.__setattr__(self, "pairing", pairing)

    @property
    def mode_count(self) -> int:
        return int(self.hopping.shape[0])

    def conserves_particle_number(self) -> bool:
        return bool(np.all(np.abs(self.pairing) < MATRIX_TOLERANCE))

    def is_zero(self) -> bool:
        return (
            bool(np.all(np.abs(self.hopping) < MATRIX_TOLERANCE))
            and self.conserves_particle_number()
            and abs(self.constant) < MATRIX_TOLERANCE
        )

    def to_fermion_operator(self) -> FermionOperator:
        m = self.mode_count
        terms: list[tuple[complex, list[tuple[int, bool]]]] = [(self.constant, [])]
        for i in range(m):
            for j in range(m):
                if abs(self.hopping[i, j]) >= MATRIX_TOLERANCE:
                    terms.append((self.hopping[i, j], [(i, True), (j, False)]))
                p = self.pairing[i, j]
                if abs(p) >= MATRIX_TOLERANCE:
                    terms.append((0.5 * p, [(i, False), (j, False)]))
                    terms.append((0.5 * p.conjugate(), [(j, True), (i, True)]))
        return FermionOperator(m, terms)

    def majorana_form(self) -> tuple[FloatArray, float]:
        """``(A, offset)`` with ``H = (i/4) sum_kl A_kl gamma_k gamma_l + offset`` and ``A`` real antisymmetric."""
        delta = -self.pairing.conj()
        nambu = np.block([[self.hopping, delta], [-delta.conj(), -self.hopping.conj()]])
        omega = _omega(self.mode_count)
        generator = 2.0 * (omega.conj().T @ nambu @ omega).imag
        generator = 0.5 * (generator - generator.T)
        offset = 0.5 * float(np.trace(self.hopping).real) + self.constant
        return generator, offset

    def bogoliubov_transform(self) -> BogoliubovTransform:
        generator, offset = self.majorana_form()
        schur_form, vectors, _ = scipy.linalg.schur(
            generator, output="real", sort=lambda re, im: abs(im) > DEGENERACY_TOLERANCE
        )
        rotation = np.array(vectors.T, dtype=np.float64)
        energies = np.zeros(self.mode_count)
        for j in range(self.mode_count):
            a, b = 2 * j, 2 * j + 1
            value = 0.5 * (schur_form[a, b] - schur_form[b, a])
            if value < 0:
                rotation[[a, b]] = rotation[[b, a]]
                value = -value
            energies[j] = value
        return BogoliubovTransform(energies, rotation, offset - 0.5 * float(energies.sum()))


@lru_cache(maxsize=16)
def _omega(mode_count: int) -> ComplexArray:
    """Rows map Majoranas to (a, a^dagger)."""
    omega = np.zeros((2 * mode_count, 2 * mode_count), dtype=np.complex128)
    for p in range(mode_count):
        omega[p, 2 * p] = 0.5
        omega[p, 2 * p + 1] = 0.5j
        omega[mode_count + p, 2 * p] = 0.5
        omega[mode_count + p, 2 * p + 1] = -0.5j
    omega.setflags(write=False)
    return omega


@dataclass(frozen=True)
class GaussianGroundState:
    """Lowest-energy Gaussian state of a quadratic Hamiltonian.

    Exactly one of ``orbitals`` (filled orbitals as rows, particle-conserving
    case) and ``transform`` (pairing case) is set unless the Hamiltonian is zero.
    """

    energy: float
    state: ComplexArray
    orbital_energies: FloatArray
    conserves_particle_number: bool
    degenerate: bool = False
    orbitals: Optional[ComplexArray] = field(default=None, repr=False)
    transform: Optional[BogoliubovTransform] = field(default=None, repr=False)

    @property
    def particle_count(self) -> Optional[int]:
        if self.orbitals is not None:
            return int(self.orbitals.shape[0])
        return 0 if self.transform is None else None


def _flag_degeneracy(message: str, strict: bool) -> None:
    if strict:
        raise DegenerateFermiLevelError(message)
    logger.warning("%s; occupying the lowest-index orbitals", message)


def slater_state(orbitals: ComplexArray) -> ComplexArray:
    """Amplitudes ``det(Q[:, S])`` of the Slater determinant with orbital rows ``Q``."""
    count, modes = orbitals.shape
    state = np.zeros(1 << modes, dtype=np.complex128)
    for occupied in combinations(range(modes), count):
        index = sum(1 << (modes - 1 - q) for q in occupied)
        state[index] = np.linalg.det(orbitals[:, list(occupied)])
    return state


@lru_cache(maxsize=8)
def _majorana_matrices(mode_count: int) -> tuple[sp.csr_matrix, ...]:
    return tuple(majorana(k, mode_count).sparse_matrix() for k in range(2 * mode_count))


def bogoliubov_vacuum(rotation: FloatArray) -> ComplexArray:
    """State annihilated by every ``b_j = (gamma'_{2j} + i gamma'_{2j+1}) / 2`` with ``gamma' = R gamma``."""
    modes = rotation.shape[0] // 2
    gammas = _majorana_matrices(modes)
    annihilators = []
    for j in range(modes):
        weights = 0.5 * (rotation[2 * j] + 1j * rotation[2 * j + 1])
        annihilators.append(sum(w * g for w, g in zip(weights, gammas) if abs(w) > _GIVENS_TOLERANCE))
    for seed in range(8):
        rng = rng_from_seed(seed)
        psi = rng.standard_normal(1 << modes) + 1j * rng.standard_normal(1 << modes)
        for b in annihilators:
            # b b^dagger projects onto the kernel of b
            psi = b @ (b.conj().T @ psi)
        norm = np.linalg.norm(psi)
        if norm > 1e-8:
            psi = psi / norm
            pivot = int(np.argmax(np.abs(psi)))
            return np.asarray(psi * (abs(psi[pivot]) / psi[pivot]), dtype=np.complex128)
    raise MeanFieldError("could not project onto the Bogoliubov vacuum")


def ground_state_quadratic(h: QuadraticHamiltonian, strict: bool = False) -> GaussianGroundState:
    """Half-filled Slater determinant or Bogoliubov vacuum of ``h``.

    A degenerate Fermi level is resolved by occupying the lowest-index
    orbitals with a warning, or raises :class:`DegenerateFermiLevelError`
    when ``strict``.
    """
    modes = h.mode_count
    if modes > MAX_DENSE_MODES:
        raise MatrixSizeError(f"{modes} modes exceeds the limit of {MAX_DENSE_MODES}")
    if h.is_zero():
        vacuum = np.zeros(1 << modes, dtype=np.complex128)
        vacuum[0] = 1.0
        return GaussianGroundState(0.0, vacuum, np.zeros(modes), True)

    if h.conserves_particle_number():
        energies, vectors = np.linalg.eigh(h.hopping)
        filled = modes // 2
        degenerate = 0 < filled < modes and energies[filled] - energies[filled - 1] < DEGENERACY_TOLERANCE
        if degenerate:
            _flag_degeneracy(
                f"degenerate Fermi level: orbitals {filled - 1} and {filled} at {energies[filled]:.6g}", strict
            )
        orbitals = np.ascontiguousarray(vectors[:, :filled].T)
        return GaussianGroundState(
            energy=float(energies[:filled].sum()) + h.constant,
            state=slater_state(orbitals),
            orbital_energies=energies,
            conserves_particle_number=True,
            degenerate=bool(degenerate),
            orbitals=orbitals,
        )

    transform = h.bogoliubov_transform()
    degenerate = bool(np.min(transform.energies) < DEGENERACY_TOLERANCE)
    if degenerate:
        _flag_degeneracy("zero-energy Bogoliubov mode", strict)
    return GaussianGroundState(
        energy=transform.ground_energy,
        state=bogoliubov_vacuum(transform.rotation),
        orbital_energies=np.sort(transform.energies),
        conserves_particle_number=False,
        degenerate=degenerate,
        transform=transform,
    )


def givens_network(orbitals: ComplexArray) -> list[tuple[int, float, float]]:
    """Column operations ``(c, theta, phi)`` reducing the orbital rows to a diagonal.

    Each entry multiplies column ``c`` by ``exp(i phi)`` and then rotates columns
    ``(c - 1, c)`` by ``[[cos, -sin], [sin, cos]]``. A unitary row transform is
    applied first so the rows form a staircase; it changes the determinant only
    by a global phase.
    """
    count, modes = orbitals.shape
    if count == 0:
        return []
    reversal = np.eye(count)[::-1]
    unitary, _ = np.linalg.qr(orbitals[:, modes - count :] @ reversal)
    q = reversal @ unitary.conj().T @ orbitals
    operations = []
    for row in range(count):
        for col in range(modes - count + row, row, -1):
            a, b = q[row, col - 1], q[row, col]
            if abs(b) < _GIVENS_TOLERANCE:
                continue
            phi = float(np.angle(a) - np.angle(b)) if abs(a) > _GIVENS_TOLERANCE else -float(np.angle(b))
            q[:, col] *= np.exp(1j * phi)
            theta = math.atan2(abs(b), abs(a))
            c, s = math.cos(theta), math.sin(theta)
            left, right = q[:, col - 1].copy(), q[:, col].copy()
            q[:, col - 1] = c * left + s * right
            q[:, col] = -s * left + c * right
            operations.append((col, theta, phi))
    return operations


def majorana_network(rotation: FloatArray) -> list[tuple[int, float]]:
    """Adjacent Majorana rotations ``(k, theta)`` with ``R = Q_1 Q_2 ... Q_m``, ``Q_1`` first in time.

    ``R`` must have determinant +1. Rotation ``(k, theta)`` is
    ``exp(theta/2 gamma_k gamma_{k+1})``.
    """
    r = np.array(rotation, dtype=np.float64)
    size = r.shape[0]
    operations = []
    for col in range(size - 1):
        for row in range(size - 1, col, -1):
            a, b = r[row - 1, col], r[row, col]
            if abs(b) < _GIVENS_TOLERANCE and a >= 0:
                continue
            theta = math.atan2(b, a)
            c, s = math.cos(theta), math.sin(theta)
            upper, lower = r[row - 1].copy(), r[row].copy()
            r[row - 1] = c * upper + s * lower
            r[row] = -s * upper + c * lower
            operations.append((row - 1, theta))
    return operations


def _slater_circuit(orbitals: ComplexArray, modes: int) -> Circuit:
    circuit = Circuit(modes)
    for q in range(orbitals.shape[0]):
        circuit.rx(q, math.pi)
    for col, theta, phi in reversed(givens_network(orbitals)):
        # exp(theta (a+_c a_{c-1} - a+_{c-1} a_c)) then the phase on mode c
        circuit.extend(pauli_rotation(((col - 1, "Y"), (col, "X")), -theta, modes))
        circuit.extend(pauli_rotation(((col - 1, "X"), (col, "Y")), theta, modes))
        if abs(phi) > _GIVENS_TOLERANCE:
            circuit.rz(col, -phi)
    return circuit


def _bogoliubov_circuit(transform: BogoliubovTransform, modes: int) -> Circuit:
    circuit = Circuit(modes)
    rotation = np.array(transform.rotation)
    if transform.odd_parity:
        # particle-hole flip of the last mode
        rotation[-1] *= -1.0
        circuit.rx(modes - 1, math.pi)
    for k, theta in majorana_network(rotation):
        qubit = k // 2
        if k % 2 == 0:
            circuit.rz(qubit, -theta)
        else:
            circuit.extend(pauli_rotation(((qubit, "X"), (qubit + 1, "X")), -theta, modes))
    return circuit


def gaussian_prep_circuit(h: QuadraticHamiltonian, strict: bool = False) -> Circuit:
    """Circuit mapping ``|0...0>`` to the ground state of ``h`` up to a global phase."""
    ground = ground_state_quadratic(h, strict=strict)
    if ground.orbitals is not None:
        return _slater_circuit(ground.orbitals, h.mode_count)
    if ground.transform is not None:
        return _bogoliubov_circuit(ground.transform, h.mode_count)
    return Circuit(h.mode_count)


def build_mf_hamiltonian(spec: LatticeSpec, params: MeanFieldParams) -> QuadraticHamiltonian:
    """Hopping, external fields and the decoupled interaction for ``params.kind``."""
    modes = spec.mode_count
    sites = spec.site_count
    hopping = np.zeros((modes, modes), dtype=np.complex128)
    pairing = np.zeros((modes, modes), dtype=np.complex128)
    constant = 0.0

    for (xa, ya), (xb, yb) in bonds(spec, "x") + bonds(spec, "y"):
        for spin in SPINS:
            a, b = spec.mode(xa, ya, spin), spec.mode(xb, yb, spin)
            hopping[a, b] += spec.t
            hopping[b, a] += spec.t

    gap = spec.delta_s_ext + (params.delta_s if params.has_pairing else 0.0)
    for x, y in spec.sites():
        down, up = spec.mode(x, y, DOWN), spec.mode(x, y, UP)
        # gap * (c_down c_up + h.c.)
        pairing[down, up] += gap
        pairing[up, down] -= gap
        for spin in SPINS:
            q = spec.mode(x, y, spin)
            parity = spec.orbital_parity(x, y, spin)
            hopping[q, q] += spec.b_af_ext * parity
            if params.has_occupations:
                opposite = params.n_plus if parity < 0 else params.n_minus
                hopping[q, q] += spec.u * (opposite - 0.5)

    if params.has_pairing and spec.u != 0.0:
        constant -= sites * params.delta_s**2 / spec.u
    if params.has_occupations:
        constant -= sites * spec.u * (params.n_plus * params.n_minus - 0.25)
    return QuadraticHamiltonian(hopping, pairing, constant)


def mean_field_state(spec: LatticeSpec, params: MeanFieldParams, strict: bool = False) -> GaussianGroundState:
    return ground_state_quadratic(build_mf_hamiltonian(spec, params), strict=strict)


def mean_field_energy(spec: LatticeSpec, params: MeanFieldParams) -> float:
    """``<psi_MF|H|psi_MF>`` of the full interacting Hamiltonian, external fields included."""
    state = mean_field_state(spec, params).state
    return float(expectation(state, qubit_hamiltonian(spec)).real)


def occupations(state: ComplexArray, mode_count: int) -> FloatArray:
    """``<n_q>`` for every mode of a state vector or density matrix."""
    probabilities = np.abs(state) ** 2 if state.ndim == 1 else np.real(np.diag(state))
    index = np.arange(1 << mode_count, dtype=np.int64)
    return np.array([probabilities[(index >> (mode_count - 1 - q)) & 1 == 1].sum() for q in range(mode_count)])


def measure_mean_fields(spec: LatticeSpec, kind: str, state: ComplexArray) -> MeanFieldParams:
    """Mean fields implied by ``state``: per-site gap ``U <c_down c_up>`` and sublattice occupations."""
    delta_s = 0.0
    n_minus = n_plus = 0.5
    if kind in ("BCS", "COMBINED"):
        delta_s = float(expectation(state, qubit_observables(spec)[1]).real) / spec.site_count
    if kind in ("AF", "COMBINED"):
        n = occupations(state, spec.mode_count)
        minus, plus = [], []
        for x, y in spec.sites():
            for spin in SPINS:
                q = spec.mode(x, y, spin)
                (plus if spec.orbital_parity(x, y, spin) > 0 else minus).append(n[q])
        n_minus, n_plus = float(np.mean(minus)), float(np.mean(plus))
    return MeanFieldParams(kind, delta_s=delta_s, n_minus=n_minus, n_plus=n_plus)


def initial_mean_fields(spec: LatticeSpec, kind: str) -> MeanFieldParams:
    """Symmetry-broken starting point aligned with the external fields."""
    gap = max(1.0, 0.5 * abs(spec.u))
    high, low = 0.9, 0.1
    # a positive staggered field lowers the p = -1 orbitals
    n_minus, n_plus = (high, low) if spec.b_af_ext >= 0 else (low, high)
    return MeanFieldParams(kind, delta_s=gap, n_minus=n_minus, n_plus=n_plus)


def self_consistent_loop(
    spec: LatticeSpec,
    kind: str,
    initial: Optional[MeanFieldParams] = None,
    tol: float = SCF_TOLERANCE,
    max_iter: int = SCF_MAX_ITER,
    mixing: float = SCF_MIXING,
) -> MeanFieldParams:
    """Fixed-point iteration ``params <- (1 - mixing) params + mixing <fields>``.

    Returns the first iterate whose implied mean fields differ from it by less
    than ``tol`` in the infinity norm.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if not 0 < mixing <= 1:
        raise ValueError(f"mixing must lie in (0, 1], got {mixing}")
    params = initial if initial is not None else initial_mean_fields(spec, kind)
    if params.kind != kind:
        raise ValueError(f"initial parameters are {params.kind}, expected {kind}")
    residual = math.inf
    for iteration in range(1, max_iter + 1):
        state = mean_field_state(spec, params).state
        implied = measure_mean_fields(spec, kind, state)
        current, target = params.as_vector(), implied.as_vector()
        residual = float(np.max(np.abs(target - current)))
        if residual < tol:
            logger.debug("%s mean field converged after %d iterations (residual %.3g)", kind, iteration, residual)
            return params
        params = MeanFieldParams.from_vector(kind, (1 - mixing) * current + mixing * target)
    raise SelfConsistencyError(
        f"{kind} mean field did not converge in {max_iter} iterations (residual {residual:.3g})",
        last=params,
        residual=residual,
    )
