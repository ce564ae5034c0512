"""Tests for the gate-level simulator."""

import math

import numpy as np
import pytest
import scipy.linalg

from py_vhalab.circuit import (
    Circuit,
    Gate,
    NoiseModel,
    PauliRotation,
    apply_circuit_noisy,
    apply_circuit_pure,
    apply_rotations_pure,
    density_matrix,
    expectation,
    lower,
    pauli_rotation,
    sample_pauli_expectation,
    zero_state,
)
from py_vhalab.exceptions import CircuitError, NonHermitianError
from py_vhalab.fermion import QubitOperator, operator_matrix
from py_vhalab.hubbard import LatticeSpec, qubit_hamiltonian


def _random_state(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


class TestGate:
    def test_unknown_kind(self) -> None:
        with pytest.raises(CircuitError):
            Gate("H", (0,))

    def test_wrong_arity(self) -> None:
        with pytest.raises(CircuitError):
            Gate("CZ", (0,))
        with pytest.raises(CircuitError):
            Gate("CZ", (1, 1))

    def test_durations(self) -> None:
        circuit = Circuit(2).rx(0, 0.1).ry(1, 0.2).rz(0, 0.3).cz(0, 1)
        assert circuit.total_duration == 5.0
        assert circuit.gate_counts() == {"RX": 1, "RY": 1, "RZ": 1, "CZ": 1}

    @pytest.mark.parametrize("kind", ["RX", "RY", "RZ"])
    def test_single_qubit_unitary(self, kind: str) -> None:
        gate = Gate(kind, (0,), 0.7)
        assert np.allclose(Circuit(1, [gate]).unitary(), gate.matrix())

    def test_cz_unitary(self) -> None:
        assert np.allclose(Circuit(2).cz(0, 1).unitary(), Gate("CZ", (0, 1)).matrix())

    def test_rx_pi_flips_zero(self) -> None:
        state = apply_circuit_pure(Circuit(1).rx(0, math.pi), zero_state(1))
        assert abs(state[1]) == pytest.approx(1.0)


class TestCircuit:
    def test_target_outside_register(self) -> None:
        with pytest.raises(CircuitError):
            Circuit(2).rx(2, 0.1)

    def test_dimension_mismatch(self) -> None:
        with pytest.raises(CircuitError):
            apply_circuit_pure(Circuit(2), zero_state(3))

    def test_depth(self) -> None:
        circuit = Circuit(3).rx(0, 0.1).rx(1, 0.1).cz(0, 1).rz(2, 0.2)
        assert circuit.depth() == 2
        assert Circuit(2).depth() == 0

    def test_concatenation(self) -> None:
        combined = Circuit(2).rx(0, 0.1) + Circuit(2).cz(0, 1)
        assert [g.kind for g in combined] == ["RX", "CZ"]


class TestPauliRotation:
    @pytest.mark.parametrize(
        "pauli",
        [((1, "X"),), ((0, "X"), (1, "Y")), ((0, "Y"), (2, "X")), ((0, "Z"), (1, "Z"), (2, "Y")), ((0, "X"), (2, "X"))],
    )
    def test_matches_matrix_exponential(self, pauli: tuple[tuple[int, str], ...]) -> None:
        angle = 0.83
        matrix = np.asarray(operator_matrix(QubitOperator(3, [(1.0, dict(pauli))])))
        expected = scipy.linalg.expm(-0.5j * angle * matrix)
        assert np.allclose(Circuit(3, pauli_rotation(pauli, angle, 3)).unitary(), expected, atol=1e-12)

    @pytest.mark.parametrize("pauli", [((0, "Z"), (1, "Z"), (2, "Z")), ((0, "X"), (1, "Y"), (2, "X"))])
    def test_zero_angle_leaves_no_stray_phase(self, pauli: tuple[tuple[int, str], ...]) -> None:
        assert np.allclose(Circuit(3, pauli_rotation(pauli, 0.0, 3)).unitary(), np.eye(8), atol=1e-12)

    def test_uncompute_mirrors_the_ladder(self) -> None:
        gates = pauli_rotation(((0, "Z"), (1, "Z"), (2, "Z")), 0.5, 3)
        middle = gates.index(Gate("RZ", (2,), 0.5))
        assert gates[middle + 1 :] == [gates[3], gates[4], gates[5], gates[0], gates[1], gates[2]]

    def test_empty_string_is_identity(self) -> None:
        assert pauli_rotation((), 0.3, 2) == []

    def test_direct_application_matches_lowered_circuit(self) -> None:
        program = [
            PauliRotation(((0, "X"), (1, "Z"), (2, "Y")), 0.4),
            PauliRotation(((1, "Y"), (3, "X")), -1.1),
            PauliRotation(((2, "Z"),), 0.9),
        ]
        psi = _random_state(4, seed=3)
        assert np.allclose(apply_rotations_pure(program, psi), apply_circuit_pure(lower(program, 4), psi))


class TestNoisySimulation:
    def test_noiseless_matches_pure(self) -> None:
        circuit = lower([PauliRotation(((0, "X"), (1, "Y")), 0.6)], 2).rx(1, 0.2)
        psi = apply_circuit_pure(circuit, zero_state(2))
        rho = apply_circuit_noisy(circuit, zero_state(2), NoiseModel())
        assert np.allclose(rho, density_matrix(psi))

    def test_dephasing_damps_coherence(self) -> None:
        noise = NoiseModel(gate_time_over_t2=0.01)
        rho = apply_circuit_noisy(Circuit(1).ry(0, math.pi / 2), zero_state(1), noise)
        assert rho[0, 1].real == pytest.approx(0.5 * math.exp(-0.01))
        assert np.trace(rho).real == pytest.approx(1.0)
        assert np.allclose(np.diag(rho).real, [0.5, 0.5])

    def test_stretch_scales_the_rate(self) -> None:
        noise = NoiseModel(gate_time_over_t2=0.01).stretched(1.5)
        rho = apply_circuit_noisy(Circuit(1).ry(0, math.pi / 2), zero_state(1), noise)
        assert rho[0, 1].real == pytest.approx(0.5 * math.exp(-0.015))

    def test_rz_is_instantaneous(self) -> None:
        plus = np.array([1, 1], dtype=complex) / math.sqrt(2)
        rho = apply_circuit_noisy(Circuit(1).rz(0, 0.0), plus, NoiseModel(gate_time_over_t2=0.1))
        assert rho[0, 1].real == pytest.approx(0.5)

    def test_idle_dephasing(self) -> None:
        plus_plus = np.full(4, 0.5, dtype=complex)
        circuit = Circuit(2).rx(0, 0.0)
        busy = apply_circuit_noisy(circuit, plus_plus, NoiseModel(gate_time_over_t2=0.1))
        idle = apply_circuit_noisy(circuit, plus_plus, NoiseModel(gate_time_over_t2=0.1, idle_dephasing=True))
        # coherence between |00> and |01> differs only on the idle qubit
        assert busy[0, 1].real == pytest.approx(0.25)
        assert idle[0, 1].real == pytest.approx(0.25 * math.exp(-0.1))

    def test_zero_noise_matches_direct_rotations(self) -> None:
        rng = np.random.default_rng(11)
        letters = "XYZ"
        program = []
        for _ in range(12):
            qubits = sorted(rng.choice(4, size=int(rng.integers(2, 5)), replace=False).tolist())
            pauli = tuple((q, letters[int(rng.integers(3))]) for q in qubits)
            program.append(PauliRotation(pauli, float(rng.uniform(-math.pi, math.pi))))
        psi = _random_state(4, seed=5)
        rho = apply_circuit_noisy(lower(program, 4), psi, NoiseModel())
        assert np.allclose(rho, density_matrix(apply_rotations_pure(program, psi)), atol=1e-10)

    @pytest.mark.parametrize("idle", [False, True])
    def test_long_noisy_circuit_stays_a_density_matrix(self, idle: bool) -> None:
        rng = np.random.default_rng(2)
        program = [
            PauliRotation(((0, "X"), (1, "Z"), (2, "Z"), (3, "Y")), float(a)) for a in rng.uniform(-2, 2, size=20)
        ]
        program += [PauliRotation(((1, "Y"), (2, "X")), float(a)) for a in rng.uniform(-2, 2, size=20)]
        noise = NoiseModel(gate_time_over_t2=1e-2, idle_dephasing=idle)
        rho = apply_circuit_noisy(lower(program, 4), _random_state(4, seed=9), noise)
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-10)
        assert np.allclose(rho, rho.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        assert np.trace(rho @ rho).real < 1.0

    def test_invalid_noise(self) -> None:
        with pytest.raises(ValueError):
            NoiseModel(gate_time_over_t2=-1.0)
        with pytest.raises(ValueError):
            NoiseModel(stretch=0.5)


class TestMeasurement:
    def test_expectation_vector_and_density_matrix_agree(self) -> None:
        spec = LatticeSpec(2, 1, u=2.0).with_fields(0.2, 0.2)
        obs = qubit_hamiltonian(spec)
        psi = _random_state(4, seed=5)
        assert expectation(psi, obs) == pytest.approx(expectation(density_matrix(psi), obs))

    def test_expectation_size_mismatch(self) -> None:
        with pytest.raises(CircuitError):
            expectation(zero_state(2), QubitOperator(3, [(1.0, {0: "Z"})]))

    def test_sampling_exact_on_eigenstate(self) -> None:
        obs = QubitOperator(2, [(0.5, {0: "Z"}), (0.25, {})])
        assert sample_pauli_expectation(zero_state(2), obs, shots=100, seed=1) == pytest.approx(0.75)

    def test_sampling_is_seeded(self) -> None:
        obs = QubitOperator(2, [(1.0, {0: "X", 1: "Y"}), (0.3, {1: "Z"})])
        psi = _random_state(2, seed=9)
        first = sample_pauli_expectation(psi, obs, shots=500, seed=42)
        assert sample_pauli_expectation(psi, obs, shots=500, seed=42) == first

    def test_sampling_rejects_complex_coefficients(self) -> None:
        with pytest.raises(NonHermitianError):
            sample_pauli_expectation(zero_state(1), QubitOperator(1, [(1j, {0: "Z"})]), shots=10, seed=0)

    def test_shot_noise_matches_binomial_prediction(self) -> None:
        spec = LatticeSpec(2, 1, u=-3.0).with_fields(0.3, 0.3)
        obs = qubit_hamiltonian(spec)
        psi = _random_state(4, seed=13)
        shots = 25000
        samples = [sample_pauli_expectation(psi, obs, shots, seed) for seed in range(60)]
        predicted = 0.0
        for coefficient, pauli in obs.terms:
            if pauli:
                mean = expectation(psi, QubitOperator(4, [(1.0, dict(pauli))])).real
                predicted += coefficient.real**2 * (1 - mean**2) / shots
        ratio = float(np.std(samples)) / math.sqrt(predicted)
        assert 0.5 < ratio < 2.0
        assert np.mean(samples) == pytest.approx(expectation(psi, obs).real, abs=5 * math.sqrt(predicted))
