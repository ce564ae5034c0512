"""Gate-level simulation over the native gate set {RX, RY, RZ, CZ}.

Pure states are flat complex vectors of length ``2**n`` and density matrices
are ``2**n x 2**n`` arrays; qubit 0 is the most significant bit of the basis
index. Noisy evolution applies a phase-damping channel after every gate to the
qubits the gate touches, multiplying their coherences by
``exp(-duration * stretch * gate_time_over_t2)``.
"""

import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np
import numpy.typing as npt

from .constants import GATE_DURATIONS, GATE_KINDS
from .exceptions import CircuitError, NonHermitianError
from .fermion import PauliString, QubitOperator, pauli_action

logger = logging.getLogger(__name__)

ComplexArray = npt.NDArray[np.complex128]

HALF_PI = math.pi / 2


@dataclass(frozen=True)
class Gate:
    """One native gate; ``angle`` is ignored for CZ."""

    kind: str
    targets: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        arity = 2 if self.kind == "CZ" else 1
        if len(self.targets) != arity:
            raise CircuitError(f"{self.kind} acts on {arity} qubit(s), got targets {self.targets}")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise CircuitError(f"CZ needs two distinct qubits, got {self.targets}")

    @property
    def duration(self) -> float:
        return GATE_DURATIONS[self.kind]

    def matrix(self) -> ComplexArray:
        if self.kind == "CZ":
            return np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)
        c, s = math.cos(self.angle / 2), math.sin(self.angle / 2)
        if self.kind == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
        if self.kind == "RY":
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        return np.diag([complex(c, -s), complex(c, s)])


@dataclass
class Circuit:
    """Ordered gate list on a fixed register."""

    qubit_count: int
    gates: list[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.qubit_count < 1:
            raise CircuitError(f"qubit_count must be positive, got {self.qubit_count}")
        for gate in self.gates:
            self._check(gate)

    def _check(self, gate: Gate) -> None:
        for q in gate.targets:
            if not 0 <= q < self.qubit_count:
                raise CircuitError(f"{gate.kind} target {q} outside register of {self.qubit_count} qubits")

    def append(self, gate: Gate) -> "Circuit":
        self._check(gate)
        self.gates.append(gate)
        return self

    def extend(self, gates: Union["Circuit", Iterable[Gate]]) -> "Circuit":
        if isinstance(gates, Circuit):
            if gates.qubit_count > self.qubit_count:
                raise CircuitError(f"cannot append a {gates.qubit_count}-qubit circuit to {self.qubit_count} qubits")
            gates = gates.gates
        for gate in gates:
            self.append(gate)
        return self

    def rx(self, qubit: int, angle: float) -> "Circuit":
        return self.append(Gate("RX", (qubit,), angle))

    def ry(self, qubit: int, angle: float) -> "Circuit":
        return self.append(Gate("RY", (qubit,), angle))

    def rz(self, qubit: int, angle: float) -> "Circuit":
        return self.append(Gate("RZ", (qubit,), angle))

    def cz(self, control: int, target: int) -> "Circuit":
        return self.append(Gate("CZ", (control, target)))

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(max(self.qubit_count, other.qubit_count), list(self.gates) + list(other.gates))

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def total_duration(self) -> float:
        return float(sum(gate.duration for gate in self.gates))

    def depth(self) -> int:
        """Number of layers when every gate is placed as early as its qubits allow."""
        level = [0] * self.qubit_count
        for gate in self.gates:
            layer = max(level[q] for q in gate.targets) + 1
            for q in gate.targets:
                level[q] = layer
        return max(level, default=0)

    def gate_counts(self) -> dict[str, int]:
        counts = dict.fromkeys(GATE_KINDS, 0)
        for gate in self.gates:
            counts[gate.kind] += 1
        return counts

    def unitary(self) -> ComplexArray:
        """Dense unitary of the whole circuit (small registers only)."""
        dimension = 1 << self.qubit_count
        return _apply_rows(self.gates, np.eye(dimension, dtype=np.complex128), self.qubit_count)


@dataclass(frozen=True)
class PauliRotation:
    """``exp(-i * angle * P / 2)`` for a Pauli string ``P``."""

    pauli: PauliString
    angle: float


@dataclass(frozen=True)
class NoiseModel:
    """Per-gate dephasing strength and Richardson stretch factor."""

    gate_time_over_t2: float = 0.0
    stretch: float = 1.0
    idle_dephasing: bool = False

    def __post_init__(self) -> None:
        if self.gate_time_over_t2 < 0:
            raise ValueError(f"gate_time_over_t2 must be non-negative, got {self.gate_time_over_t2}")
        if self.stretch < 1.0:
            raise ValueError(f"stretch must be at least 1, got {self.stretch}")

    @property
    def is_noiseless(self) -> bool:
        return self.gate_time_over_t2 == 0.0

    def stretched(self, stretch: float) -> "NoiseModel":
        return replace(self, stretch=stretch)

    def coherence_factor(self, duration: float) -> float:
        return math.exp(-duration * self.stretch * self.gate_time_over_t2)


def pauli_rotation(pauli: PauliString, angle: float, qubit_count: int) -> list[Gate]:
    """Compile ``exp(-i * angle * P / 2)`` exactly.

    Single-qubit strings map to one rotation. Longer strings rotate X factors
    with RY(-pi/2) and Y factors with RX(pi/2) into Z, accumulate the parity on
    the last qubit with a CNOT ladder (CNOT = RY(-pi/2)_t CZ RY(pi/2)_t), apply
    RZ(angle) there, and undo everything in reverse.
    """
    for qubit, _ in pauli:
        if not 0 <= qubit < qubit_count:
            raise CircuitError(f"Pauli factor on qubit {qubit} outside register of {qubit_count} qubits")
    if not pauli:
        return []
    if len(pauli) == 1:
        qubit, letter = pauli[0]
        return [Gate("R" + letter, (qubit,), angle)]

    into_z: list[Gate] = []
    out_of_z: list[Gate] = []
    for qubit, letter in pauli:
        if letter == "X":
            into_z.append(Gate("RY", (qubit,), -HALF_PI))
            out_of_z.append(Gate("RY", (qubit,), HALF_PI))
        elif letter == "Y":
            into_z.append(Gate("RX", (qubit,), HALF_PI))
            out_of_z.append(Gate("RX", (qubit,), -HALF_PI))

    qubits = [qubit for qubit, _ in pauli]
    ladder: list[Gate] = []
    for control, target in zip(qubits, qubits[1:]):
        ladder.extend(
            [Gate("RY", (target,), -HALF_PI), Gate("CZ", (control, target)), Gate("RY", (target,), HALF_PI)]
        )
    # uncompute: triples in reverse order, each triple kept intact
    uncompute = [gate for start in range(len(ladder) - 3, -1, -3) for gate in ladder[start : start + 3]]
    return into_z + ladder + [Gate("RZ", (qubits[-1],), angle)] + uncompute + out_of_z


def lower(program: Sequence[PauliRotation], qubit_count: int) -> Circuit:
    """Native-gate circuit of a Pauli-rotation program."""
    circuit = Circuit(qubit_count)
    for rotation in program:
        circuit.extend(pauli_rotation(rotation.pauli, rotation.angle, qubit_count))
    return circuit


@lru_cache(maxsize=16)
def _bits(qubit_count: int) -> npt.NDArray[np.int64]:
    index = np.arange(1 << qubit_count, dtype=np.int64)
    return np.stack([(index >> (qubit_count - 1 - q)) & 1 for q in range(qubit_count)])


@lru_cache(maxsize=256)
def _partner(qubit_count: int, qubit: int) -> npt.NDArray[np.int64]:
    return np.arange(1 << qubit_count, dtype=np.int64) ^ (1 << (qubit_count - 1 - qubit))


@lru_cache(maxsize=4096)
def _pauli_permutation(pauli: PauliString, qubit_count: int) -> tuple[npt.NDArray[np.int64], ComplexArray]:
    flip, phase = pauli_action(pauli, qubit_count)
    permutation = np.arange(1 << qubit_count, dtype=np.int64) ^ flip
    return permutation, phase[permutation]


def _column(vector: npt.NDArray[np.generic], target: npt.NDArray[np.generic]) -> npt.NDArray[np.generic]:
    return vector.reshape((-1,) + (1,) * (target.ndim - 1))


def _apply_gate(gate: Gate, amplitudes: ComplexArray, qubit_count: int) -> ComplexArray:
    """Apply ``gate`` along axis 0 of ``amplitudes``."""
    bits = _bits(qubit_count)
    if gate.kind == "CZ":
        a, b = gate.targets
        sign = (1 - 2 * (bits[a] & bits[b])).astype(np.float64)
        return amplitudes * _column(sign, amplitudes)
    qubit = gate.targets[0]
    half = gate.angle / 2
    if gate.kind == "RZ":
        phase = np.where(bits[qubit] == 1, np.exp(1j * half), np.exp(-1j * half))
        return amplitudes * _column(phase, amplitudes)
    swapped = amplitudes[_partner(qubit_count, qubit)]
    if gate.kind == "RX":
        return math.cos(half) * amplitudes - 1j * math.sin(half) * swapped
    sign = (1 - 2 * bits[qubit]).astype(np.float64)
    return math.cos(half) * amplitudes - math.sin(half) * _column(sign, amplitudes) * swapped


def _apply_rows(gates: Iterable[Gate], amplitudes: ComplexArray, qubit_count: int) -> ComplexArray:
    for gate in gates:
        amplitudes = _apply_gate(gate, amplitudes, qubit_count)
    return amplitudes


def _check_dimension(qubit_count: int, length: int) -> None:
    if length != 1 << qubit_count:
        raise CircuitError(f"state of dimension {length} does not match a {qubit_count}-qubit register")


def zero_state(qubit_count: int) -> ComplexArray:
    state = np.zeros(1 << qubit_count, dtype=np.complex128)
    state[0] = 1.0
    return state


def density_matrix(state: ComplexArray) -> ComplexArray:
    return np.outer(state, state.conj())


def qubit_count_of(state: ComplexArray) -> int:
    length = state.shape[0]
    n = length.bit_length() - 1
    if length != 1 << n or (state.ndim == 2 and state.shape[1] != length) or state.ndim > 2:
        raise CircuitError(f"array of shape {state.shape} is not a register state")
    return n


def apply_circuit_pure(circuit: Circuit, state: ComplexArray) -> ComplexArray:
    """Evolve a state vector through ``circuit``."""
    if state.ndim != 1:
        raise CircuitError(f"expected a state vector, got shape {state.shape}")
    _check_dimension(circuit.qubit_count, state.shape[0])
    return _apply_rows(circuit.gates, np.asarray(state, dtype=np.complex128), circuit.qubit_count)


def apply_rotations_pure(program: Sequence[PauliRotation], state: ComplexArray) -> ComplexArray:
    """Apply Pauli rotations directly; identical to simulating ``lower(program)``."""
    n = qubit_count_of(state)
    psi = np.asarray(state, dtype=np.complex128)
    for rotation in program:
        if not rotation.pauli:
            continue
        permutation, phase = _pauli_permutation(rotation.pauli, n)
        half = rotation.angle / 2
        psi = math.cos(half) * psi - 1j * math.sin(half) * (phase * psi[permutation])
    return psi


@lru_cache(maxsize=64)
def _differing(qubit_count: int, qubit: int) -> npt.NDArray[np.int64]:
    bits = _bits(qubit_count)[qubit]
    return np.asarray(bits[:, None] ^ bits[None, :], dtype=np.int64)


@lru_cache(maxsize=8)
def _hamming(qubit_count: int) -> npt.NDArray[np.int64]:
    total = np.zeros((1 << qubit_count, 1 << qubit_count), dtype=np.int64)
    for q in range(qubit_count):
        total += _differing(qubit_count, q)
    return total


def _dephase(rho: ComplexArray, gate: Gate, noise: NoiseModel, qubit_count: int) -> ComplexArray:
    factor = noise.coherence_factor(gate.duration)
    if factor == 1.0:
        return rho
    if noise.idle_dephasing:
        distance = _hamming(qubit_count)
    else:
        distance = sum(_differing(qubit_count, q) for q in gate.targets)  # type: ignore[assignment]
    return rho * np.power(factor, distance)


def apply_circuit_noisy(circuit: Circuit, rho: ComplexArray, noise: NoiseModel) -> ComplexArray:
    """Evolve a density matrix (or a state vector, lifted) under per-gate dephasing."""
    if rho.ndim == 1:
        rho = density_matrix(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise CircuitError(f"expected a square density matrix, got shape {rho.shape}")
    n = circuit.qubit_count
    _check_dimension(n, rho.shape[0])
    rho = np.asarray(rho, dtype=np.complex128)
    for gate in circuit.gates:
        rho = _apply_gate(gate, rho, n)
        rho = _apply_gate(gate, rho.conj().T, n).conj().T
        if not noise.is_noiseless:
            rho = _dephase(rho, gate, noise, n)
    return rho


def expectation(state: ComplexArray, obs: QubitOperator) -> complex:
    """Exact ``<psi|O|psi>`` or ``tr(rho O)``."""
    n = qubit_count_of(state)
    if n != obs.qubit_count:
        raise CircuitError(f"observable on {obs.qubit_count} qubits cannot act on a {n}-qubit state")
    matrix = obs.sparse_matrix()
    if state.ndim == 1:
        return complex(np.vdot(state, matrix @ state))
    coo = matrix.tocoo()
    return complex(np.sum(coo.data * state[coo.col, coo.row]))


def _measurement_basis(pauli: PauliString) -> list[Gate]:
    gates = []
    for qubit, letter in pauli:
        if letter == "X":
            gates.append(Gate("RY", (qubit,), -HALF_PI))
        elif letter == "Y":
            gates.append(Gate("RX", (qubit,), HALF_PI))
    return gates


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator used by every stochastic interface."""
    return np.random.Generator(np.random.Philox(seed))


def sample_pauli_expectation(state: ComplexArray, obs: QubitOperator, shots: int, seed: int) -> float:
    """Estimate ``<O>`` from ``shots`` projective measurements per Pauli product."""
    if shots < 1:
        raise ValueError(f"shots must be positive, got {shots}")
    if not obs.is_hermitian():
        raise NonHermitianError("shot-based estimation needs real Pauli coefficients")
    n = qubit_count_of(state)
    if n != obs.qubit_count:
        raise CircuitError(f"observable on {obs.qubit_count} qubits cannot act on a {n}-qubit state")
    rng = rng_from_seed(seed)
    bits = _bits(n)
    estimate = obs.constant.real
    for coefficient, pauli in obs.terms:
        if not pauli:
            continue
        rotated = _apply_rows(_measurement_basis(pauli), np.asarray(state, dtype=np.complex128), n)
        if rotated.ndim == 1:
            probabilities = np.abs(rotated) ** 2
        else:
            rotated = _apply_rows(_measurement_basis(pauli), rotated.conj().T, n).conj().T
            probabilities = np.real(np.diag(rotated))
        parity = np.zeros(1 << n, dtype=np.int64)
        for qubit, _ in pauli:
            parity ^= bits[qubit]
        p_plus = float(np.clip(probabilities[parity == 0].sum(), 0.0, 1.0))
        plus = int(rng.binomial(shots, p_plus))
        estimate += coefficient.real * (2 * plus - shots) / shots
    return float(estimate)
