"""Variational ansatz compilation: Trotter blocks, VHA, VEHA and VMFHA.

Every ansatz body is a product over repetitions of second-order Trotterized
pseudo-time evolutions ``exp(i theta H)``. Bodies are kept as
:class:`~py_vhalab.circuit.PauliRotation` programs so that noiseless
optimization can apply them directly to a state vector; the lowered native-gate
circuit is used for noisy runs and for gate accounting.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
import numpy.typing as npt

from .circuit import Circuit, PauliRotation, lower
from .constants import ANSATZ_KINDS, DEFAULT_REPS, MEAN_FIELD_KINDS, SYMMETRY_COMBOS
from .exceptions import NonHermitianError, ParameterCountError
from .fermion import FermionOperator, PauliString, jordan_wigner
from .hubbard import LatticeSpec, decompose, symmetry_breaking_terms
from .meanfield import MeanFieldParams, build_mf_hamiltonian, gaussian_prep_circuit, parameter_count

FloatArray = npt.NDArray[np.float64]

# Angle bound for Trotter parameters
THETA_BOUND = np.pi


class TrotterBlock:
    """A Hermitian generator compiled once into its sorted JW Pauli terms."""

    def __init__(self, generator: FermionOperator) -> None:
        if not generator.is_hermitian():
            raise NonHermitianError("Trotter generators must be Hermitian")
        self.qubit_count = generator.mode_count
        self.terms: list[tuple[float, PauliString]] = [
            (c.real, pauli) for c, pauli in jordan_wigner(generator).terms if pauli
        ]

    def __len__(self) -> int:
        return len(self.terms)

    def rotations(self, theta: float) -> list[PauliRotation]:
        """Symmetric (Strang) product approximating ``exp(i theta H)``; the identity term is a global phase."""
        if not self.terms:
            return []
        steps = [(pauli, -2.0 * theta * c) for c, pauli in self.terms]
        *outer, (middle, angle) = steps
        half = [PauliRotation(pauli, a / 2) for pauli, a in outer]
        return half + [PauliRotation(middle, angle)] + half[::-1]

    def circuit(self, theta: float) -> Circuit:
        return lower(self.rotations(theta), self.qubit_count)


def trotter_circuit(h: FermionOperator, theta: float) -> Circuit:
    """Second-order Trotter circuit for ``exp(i theta JW(h))``."""
    return TrotterBlock(h).circuit(theta)


@dataclass(frozen=True, eq=False)
class AnsatzSpec:
    """One ansatz on one lattice.

    ``generators`` are the H_alpha of the Hamiltonian decomposition,
    ``extra_generators`` the VEHA symmetry-breaking terms. ``mf_kind`` names the
    mean field that prepares the initial state (VHA, VMFHA); VEHA starts from
    the vacuum.
    """

    kind: str
    lattice: LatticeSpec
    reps: int = DEFAULT_REPS
    generators: tuple[FermionOperator, ...] = ()
    extra_generators: tuple[FermionOperator, ...] = ()
    mf_kind: Optional[str] = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in ANSATZ_KINDS:
            raise ValueError(f"unknown ansatz {self.kind!r}; expected one of {ANSATZ_KINDS}")
        if self.reps < 1:
            raise ValueError(f"reps must be positive, got {self.reps}")
        if self.mf_kind is not None and self.mf_kind not in MEAN_FIELD_KINDS:
            raise ValueError(f"unknown mean-field kind {self.mf_kind!r}")
        if self.kind == "VMFHA" and self.mf_kind is None:
            raise ValueError("VMFHA needs a mean-field kind")

    @cached_property
    def blocks(self) -> tuple[TrotterBlock, ...]:
        return tuple(TrotterBlock(g) for g in self.generators)

    @cached_property
    def extra_blocks(self) -> tuple[TrotterBlock, ...]:
        return tuple(TrotterBlock(g) for g in self.extra_generators)

    @property
    def theta_count(self) -> int:
        return self.reps * len(self.generators)

    @property
    def theta_e_count(self) -> int:
        return self.reps * len(self.extra_generators)

    @property
    def mf_count(self) -> int:
        return parameter_count(self.mf_kind) if self.kind == "VMFHA" and self.mf_kind else 0

    @property
    def parameter_count(self) -> int:
        return self.theta_count + self.theta_e_count + self.mf_count

    def bounds(self) -> list[tuple[float, float]]:
        """Box bounds per parameter: angles in [-pi, pi], gap in +-(|U| + 0.5), occupations in [0, 1]."""
        limits = [(-THETA_BOUND, THETA_BOUND)] * (self.theta_count + self.theta_e_count)
        if self.mf_count:
            gap = abs(self.lattice.u) + 0.5
            if self.mf_kind in ("BCS", "COMBINED"):
                limits.append((-gap, gap))
            if self.mf_kind in ("AF", "COMBINED"):
                limits.extend([(0.0, 1.0), (0.0, 1.0)])
        return limits

    def start_bounds(self) -> list[tuple[float, float]]:
        """Bounds for random starting points; the gap is drawn from ``[0, |U| + 0.5]``."""
        limits = self.bounds()
        if self.mf_count and self.mf_kind in ("BCS", "COMBINED"):
            index = self.theta_count + self.theta_e_count
            limits[index] = (0.0, limits[index][1])
        return limits

    def split(self, params: npt.ArrayLike) -> tuple[FloatArray, FloatArray, Optional[MeanFieldParams]]:
        """``(theta, theta_e, mean fields)`` from a flat parameter vector."""
        vector = np.asarray(params, dtype=np.float64).ravel()
        if vector.shape[0] != self.parameter_count:
            raise ParameterCountError(
                f"{self.kind} on {self.lattice.label()} with {self.reps} reps takes "
                f"{self.parameter_count} parameters, got {vector.shape[0]}"
            )
        theta = vector[: self.theta_count]
        theta_e = vector[self.theta_count : self.theta_count + self.theta_e_count]
        mf = None
        if self.mf_count and self.mf_kind is not None:
            mf = MeanFieldParams.from_vector(self.mf_kind, vector[self.theta_count + self.theta_e_count :])
        return theta, theta_e, mf

    def program(self, params: npt.ArrayLike) -> list[PauliRotation]:
        """Ansatz body for a flat parameter vector (initial state excluded)."""
        theta, theta_e, _ = self.split(params)
        if self.extra_generators:
            return veha_program(self, theta, theta_e)
        return vha_program(self, theta)

    def initial_circuit(self, mf_params: Optional[MeanFieldParams], strict: bool = False) -> Circuit:
        """Mean-field preparation, or the empty circuit for a vacuum start."""
        if mf_params is None:
            return Circuit(self.lattice.mode_count)
        return vmfha_initial_circuit(self.lattice, mf_params, strict=strict)

    def circuit(
        self, params: npt.ArrayLike, mf_params: Optional[MeanFieldParams] = None, strict: bool = False
    ) -> Circuit:
        """Full trial circuit: initialization followed by the body."""
        _, _, own = self.split(params)
        initial = self.initial_circuit(own if own is not None else mf_params, strict=strict)
        return initial + lower(self.program(params), self.lattice.mode_count)


def vha_spec(lattice: LatticeSpec, reps: int = DEFAULT_REPS, mf_kind: str = "BCS") -> AnsatzSpec:
    return AnsatzSpec("VHA", lattice, reps, tuple(decompose(lattice)), mf_kind=mf_kind, label=mf_kind)


def veha_spec(lattice: LatticeSpec, reps: int = DEFAULT_REPS, combo: str = "BCS+AF") -> AnsatzSpec:
    if combo not in SYMMETRY_COMBOS:
        raise ValueError(f"unknown symmetry-breaking combination {combo!r}")
    return AnsatzSpec(
        "VEHA",
        lattice,
        reps,
        tuple(decompose(lattice)),
        tuple(symmetry_breaking_terms(lattice, combo)),
        label=combo,
    )


def vmfha_spec(lattice: LatticeSpec, reps: int = DEFAULT_REPS, mf_kind: str = "COMBINED") -> AnsatzSpec:
    return AnsatzSpec("VMFHA", lattice, reps, tuple(decompose(lattice)), mf_kind=mf_kind, label=mf_kind)


def _check_length(name: str, values: Sequence[float], expected: int) -> None:
    if len(values) != expected:
        raise ParameterCountError(f"{name} needs {expected} values, got {len(values)}")


def vha_program(spec: AnsatzSpec, theta: Sequence[float]) -> list[PauliRotation]:
    _check_length("theta", theta, spec.theta_count)
    count = len(spec.blocks)
    program: list[PauliRotation] = []
    for k in range(spec.reps):
        for alpha, block in enumerate(spec.blocks):
            program.extend(block.rotations(float(theta[k * count + alpha])))
    return program


def vha_circuit(spec: AnsatzSpec, theta: Sequence[float]) -> Circuit:
    """``prod_k prod_alpha exp(i theta_{alpha,k} H_alpha)``, initialization not included."""
    return lower(vha_program(spec, theta), spec.lattice.mode_count)


def veha_program(spec: AnsatzSpec, theta: Sequence[float], theta_e: Sequence[float]) -> list[PauliRotation]:
    _check_length("theta", theta, spec.theta_count)
    _check_length("theta_e", theta_e, spec.theta_e_count)
    count, extra = len(spec.blocks), len(spec.extra_blocks)
    program: list[PauliRotation] = []
    for k in range(spec.reps):
        for alpha, block in enumerate(spec.blocks):
            program.extend(block.rotations(float(theta[k * count + alpha])))
        for beta, block in enumerate(spec.extra_blocks):
            program.extend(block.rotations(float(theta_e[k * extra + beta])))
    return program


def veha_circuit(spec: AnsatzSpec, theta: Sequence[float], theta_e: Sequence[float]) -> Circuit:
    """Per repetition the system blocks, then the symmetry-breaking blocks; meant for the vacuum."""
    return lower(veha_program(spec, theta, theta_e), spec.lattice.mode_count)


def vmfha_initial_circuit(lattice: LatticeSpec, params: MeanFieldParams, strict: bool = False) -> Circuit:
    """Preparation circuit of the (not necessarily self-consistent) mean-field ground state."""
    for name in ("n_minus", "n_plus"):
        value = getattr(params, name)
        if params.has_occupations and not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return gaussian_prep_circuit(build_mf_hamiltonian(lattice, params), strict=strict)


@dataclass(frozen=True)
class GateReport:
    """Gate accounting of one ansatz: initialization, one repetition and the full circuit."""

    ansatz: str
    label: str
    lattice: str
    reps: int
    parameters: int
    init_gates: int
    rep_gates: int
    extra_rep_gates: int
    extra_rep_depth: int
    total_gates: int
    cz_gates: int
    depth: int
    duration: float


# Generic symmetry-broken point used only to size preparation circuits
_REPORT_MEAN_FIELDS = {"delta_s": 0.5, "n_minus": 0.7, "n_plus": 0.3}


def gate_report(lattice: LatticeSpec, reps: int = DEFAULT_REPS) -> list[GateReport]:
    """Gate counts for VHA (both orders), VEHA (all combinations) and VMFHA."""
    specs = [vha_spec(lattice, reps, kind) for kind in ("BCS", "AF")]
    specs += [veha_spec(lattice, reps, combo) for combo in SYMMETRY_COMBOS]
    specs.append(vmfha_spec(lattice, reps))
    rows = []
    modes = lattice.mode_count
    for spec in specs:
        mf_kind = spec.mf_kind
        mf = MeanFieldParams(mf_kind, **_REPORT_MEAN_FIELDS) if mf_kind else None
        initial = spec.initial_circuit(mf)
        params = np.full(spec.parameter_count, 0.1)
        if spec.mf_count and mf is not None:
            params[spec.theta_count + spec.theta_e_count :] = mf.as_vector()
        full = spec.circuit(params, mf)
        one_rep = lower([r for block in spec.blocks for r in block.rotations(0.1)], modes)
        extra = lower([r for block in spec.extra_blocks for r in block.rotations(0.1)], modes)
        rows.append(
            GateReport(
                ansatz=spec.kind,
                label=spec.label,
                lattice=lattice.label(),
                reps=reps,
                parameters=spec.parameter_count,
                init_gates=len(initial),
                rep_gates=len(one_rep) + len(extra),
                extra_rep_gates=len(extra),
                extra_rep_depth=extra.depth(),
                total_gates=len(full),
                cz_gates=full.gate_counts()["CZ"],
                depth=full.depth(),
                duration=full.total_duration,
            )
        )
    return rows
