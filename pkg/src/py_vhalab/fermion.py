"""Fermionic operator algebra and the Jordan-Wigner mapping to qubit operators.

Both operator types are immutable sums of weighted products. A
:class:`FermionOperator` stores its terms in normal order (creators left of
annihilators, each group sorted by descending mode index) purely as a canonical
form for merging; a :class:`QubitOperator` stores Pauli strings sorted by qubit
with identity factors omitted.

Basis convention for every matrix built here: qubit (mode) 0 is the most
significant bit of the basis index and a set bit means "occupied". Under the
Jordan-Wigner map the occupation basis and the computational basis coincide.
"""

from collections.abc import Iterable, Iterator, Mapping, Sequence
from numbers import Number
from typing import Any, Optional, Union

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from .constants import COEFFICIENT_TOLERANCE, MAX_DENSE_MODES
from .exceptions import MatrixSizeError, ModeIndexError

Factor = tuple[int, bool]
FactorString = tuple[Factor, ...]
PauliString = tuple[tuple[int, str], ...]
Scalar = Union[complex, float, int]

_PAULI_PRODUCTS: dict[tuple[str, str], tuple[complex, str]] = {
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}


def _accumulate(target: dict[Any, complex], key: Any, coefficient: complex) -> None:
    target[key] = target.get(key, 0.0) + coefficient


def _prune(terms: Mapping[Any, complex]) -> dict[Any, complex]:
    return {key: complex(c) for key, c in terms.items() if abs(c) >= COEFFICIENT_TOLERANCE}


def _normal_order(factors: Sequence[Factor], coefficient: complex) -> dict[FactorString, complex]:
    """Expand a ladder product into normal-ordered terms using the anticommutation relations."""
    ordered: dict[FactorString, complex] = {}
    stack: list[tuple[list[Factor], complex]] = [(list(factors), coefficient)]
    while stack:
        term, c = stack.pop()
        vanishes = False
        for i in range(1, len(term)):
            for j in range(i, 0, -1):
                left, right = term[j - 1], term[j]
                if right[1] and not left[1]:
                    if right[0] == left[0]:
                        stack.append((term[: j - 1] + term[j + 1 :], c))
                    term[j - 1], term[j] = right, left
                    c = -c
                elif right[1] == left[1]:
                    if right[0] == left[0]:
                        vanishes = True
                        break
                    if right[0] > left[0]:
                        term[j - 1], term[j] = right, left
                        c = -c
            if vanishes:
                break
        if not vanishes:
            _accumulate(ordered, tuple(term), c)
    return ordered


class FermionOperator:
    """Weighted sum of products of creation/annihilation operators on ``mode_count`` modes."""

    __slots__ = ("_terms", "mode_count")

    def __init__(self, mode_count: int, terms: Optional[Iterable[tuple[Scalar, Sequence[Factor]]]] = None) -> None:
        if mode_count < 1:
            raise ValueError(f"mode_count must be positive, got {mode_count}")
        self.mode_count = int(mode_count)
        merged: dict[FactorString, complex] = {}
        for coefficient, factors in terms or ():
            normalized = [(int(mode), bool(dagger)) for mode, dagger in factors]
            for mode, _ in normalized:
                if not 0 <= mode < self.mode_count:
                    raise ModeIndexError(f"mode {mode} outside register of {self.mode_count} modes")
            for key, c in _normal_order(normalized, complex(coefficient)).items():
                _accumulate(merged, key, c)
        self._terms: dict[FactorString, complex] = _prune(merged)

    @classmethod
    def _from_ordered(cls, mode_count: int, terms: Mapping[FactorString, complex]) -> "FermionOperator":
        op = cls.__new__(cls)
        op.mode_count = mode_count
        op._terms = _prune(terms)
        return op

    @classmethod
    def identity(cls, mode_count: int, coefficient: Scalar = 1.0) -> "FermionOperator":
        return cls(mode_count, [(coefficient, ())])

    @classmethod
    def zero(cls, mode_count: int) -> "FermionOperator":
        return cls(mode_count)

    @property
    def terms(self) -> list[tuple[complex, FactorString]]:
        """Terms as ``(coefficient, factors)`` in a deterministic order."""
        return [(self._terms[key], key) for key in sorted(self._terms, key=lambda k: (len(k), k))]

    @property
    def constant(self) -> complex:
        return self._terms.get((), 0.0j)

    def __iter__(self) -> Iterator[tuple[complex, FactorString]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: Union["FermionOperator", Scalar]) -> "FermionOperator":
        if isinstance(other, Number):
            other = FermionOperator.identity(self.mode_count, complex(other))  # type: ignore[arg-type]
        if not isinstance(other, FermionOperator):
            return NotImplemented
        merged = dict(self._terms)
        for key, c in other._terms.items():
            _accumulate(merged, key, c)
        return FermionOperator._from_ordered(max(self.mode_count, other.mode_count), merged)

    __radd__ = __add__

    def __neg__(self) -> "FermionOperator":
        return FermionOperator._from_ordered(self.mode_count, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: Union["FermionOperator", Scalar]) -> "FermionOperator":
        if isinstance(other, (FermionOperator, Number)):
            return self + (-other)  # type: ignore[operator]
        return NotImplemented

    def __rsub__(self, other: Scalar) -> "FermionOperator":
        return (-self) + other

    def __mul__(self, other: Union["FermionOperator", Scalar]) -> "FermionOperator":
        if isinstance(other, Number):
            scale = complex(other)  # type: ignore[arg-type]
            return FermionOperator._from_ordered(self.mode_count, {k: scale * c for k, c in self._terms.items()})
        if not isinstance(other, FermionOperator):
            return NotImplemented
        merged: dict[FactorString, complex] = {}
        for left_key, left_c in self._terms.items():
            for right_key, right_c in other._terms.items():
                for key, c in _normal_order(left_key + right_key, left_c * right_c).items():
                    _accumulate(merged, key, c)
        return FermionOperator._from_ordered(max(self.mode_count, other.mode_count), merged)

    def __rmul__(self, other: Scalar) -> "FermionOperator":
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __truediv__(self, other: Scalar) -> "FermionOperator":
        return self * (1.0 / complex(other))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FermionOperator):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(
            self.mode_count,
            [(c.conjugate(), [(mode, not dagger) for mode, dagger in reversed(key)]) for key, c in self._terms.items()],
        )

    def is_hermitian(self) -> bool:
        return self == self.adjoint()

    def __repr__(self) -> str:
        if not self._terms:
            return f"FermionOperator({self.mode_count}, 0)"
        parts = []
        for c, key in self.terms:
            word = " ".join(f"c{mode}{'^' if dagger else ''}" for mode, dagger in key) or "I"
            parts.append(f"({c:.6g}) {word}")
        return f"FermionOperator({self.mode_count}, " + " + ".join(parts) + ")"


def creation(mode: int, mode_count: int) -> FermionOperator:
    return FermionOperator(mode_count, [(1.0, [(mode, True)])])


def annihilation(mode: int, mode_count: int) -> FermionOperator:
    return FermionOperator(mode_count, [(1.0, [(mode, False)])])


def number(mode: int, mode_count: int) -> FermionOperator:
    return FermionOperator(mode_count, [(1.0, [(mode, True), (mode, False)])])


def commutator(a: FermionOperator, b: FermionOperator) -> FermionOperator:
    return a * b - b * a


def _multiply_strings(left: PauliString, right: PauliString) -> tuple[complex, PauliString]:
    phase: complex = 1.0
    merged = dict(left)
    for qubit, pauli in right:
        current = merged.get(qubit)
        if current is None:
            merged[qubit] = pauli
        elif current == pauli:
            del merged[qubit]
        else:
            factor, result = _PAULI_PRODUCTS[(current, pauli)]
            phase *= factor
            merged[qubit] = result
    return phase, tuple(sorted(merged.items()))


class QubitOperator:
    """Weighted sum of Pauli strings on ``qubit_count`` qubits."""

    __slots__ = ("_sparse", "_terms", "qubit_count")

    def __init__(self, qubit_count: int, terms: Optional[Iterable[tuple[Scalar, Mapping[int, str]]]] = None) -> None:
        if qubit_count < 1:
            raise ValueError(f"qubit_count must be positive, got {qubit_count}")
        self.qubit_count = int(qubit_count)
        merged: dict[PauliString, complex] = {}
        for coefficient, pauli in terms or ():
            key: PauliString = tuple(sorted((int(q), p.upper()) for q, p in pauli.items() if p.upper() != "I"))
            for qubit, letter in key:
                if not 0 <= qubit < self.qubit_count:
                    raise ModeIndexError(f"qubit {qubit} outside register of {self.qubit_count} qubits")
                if letter not in ("X", "Y", "Z"):
                    raise ValueError(f"unknown Pauli letter {letter!r}")
            _accumulate(merged, key, complex(coefficient))
        self._terms: dict[PauliString, complex] = _prune(merged)
        self._sparse: Optional[sp.csr_matrix] = None

    @classmethod
    def _from_strings(cls, qubit_count: int, terms: Mapping[PauliString, complex]) -> "QubitOperator":
        op = cls.__new__(cls)
        op.qubit_count = qubit_count
        op._terms = _prune(terms)
        op._sparse = None
        return op

    @classmethod
    def identity(cls, qubit_count: int, coefficient: Scalar = 1.0) -> "QubitOperator":
        return cls._from_strings(qubit_count, {(): complex(coefficient)})

    @classmethod
    def zero(cls, qubit_count: int) -> "QubitOperator":
        return cls._from_strings(qubit_count, {})

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        """Terms as ``(coefficient, pauli string)`` sorted by string."""
        return [(self._terms[key], key) for key in sorted(self._terms)]

    @property
    def constant(self) -> complex:
        return self._terms.get((), 0.0j)

    def __iter__(self) -> Iterator[tuple[complex, PauliString]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: Union["QubitOperator", Scalar]) -> "QubitOperator":
        if isinstance(other, Number):
            other = QubitOperator.identity(self.qubit_count, complex(other))  # type: ignore[arg-type]
        if not isinstance(other, QubitOperator):
            return NotImplemented
        merged = dict(self._terms)
        for key, c in other._terms.items():
            _accumulate(merged, key, c)
        return QubitOperator._from_strings(max(self.qubit_count, other.qubit_count), merged)

    __radd__ = __add__

    def __neg__(self) -> "QubitOperator":
        return QubitOperator._from_strings(self.qubit_count, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other: Union["QubitOperator", Scalar]) -> "QubitOperator":
        if isinstance(other, (QubitOperator, Number)):
            return self + (-other)  # type: ignore[operator]
        return NotImplemented

    def __mul__(self, other: Union["QubitOperator", Scalar]) -> "QubitOperator":
        if isinstance(other, Number):
            scale = complex(other)  # type: ignore[arg-type]
            return QubitOperator._from_strings(self.qubit_count, {k: scale * c for k, c in self._terms.items()})
        if not isinstance(other, QubitOperator):
            return NotImplemented
        merged: dict[PauliString, complex] = {}
        for left_key, left_c in self._terms.items():
            for right_key, right_c in other._terms.items():
                phase, key = _multiply_strings(left_key, right_key)
                _accumulate(merged, key, phase * left_c * right_c)
        return QubitOperator._from_strings(max(self.qubit_count, other.qubit_count), merged)

    def __rmul__(self, other: Scalar) -> "QubitOperator":
        if isinstance(other, Number):
            return self * other
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def adjoint(self) -> "QubitOperator":
        return QubitOperator._from_strings(self.qubit_count, {k: c.conjugate() for k, c in self._terms.items()})

    def is_hermitian(self) -> bool:
        return all(abs(c.imag) < COEFFICIENT_TOLERANCE for c in self._terms.values())

    def sparse_matrix(self) -> sp.csr_matrix:
        """CSR matrix in the computational basis; built once and cached."""
        if self._sparse is None:
            self._sparse = _pauli_sum_matrix(self.terms, self.qubit_count)
        return self._sparse

    def __repr__(self) -> str:
        if not self._terms:
            return f"QubitOperator({self.qubit_count}, 0)"
        parts = []
        for c, key in self.terms:
            word = " ".join(f"{p}{q}" for q, p in key) or "I"
            parts.append(f"({c:.6g}) {word}")
        return f"QubitOperator({self.qubit_count}, " + " + ".join(parts) + ")"


def pauli_action(pauli: PauliString, qubit_count: int) -> tuple[int, npt.NDArray[np.complex128]]:
    """Return ``(flip, phase)`` such that ``P|b> = phase[b] |b ^ flip>`` for every basis index ``b``."""
    index = np.arange(1 << qubit_count, dtype=np.int64)
    flip = 0
    parity = np.zeros(index.shape, dtype=np.int64)
    y_count = 0
    for qubit, letter in pauli:
        shift = qubit_count - 1 - qubit
        if letter in ("X", "Y"):
            flip |= 1 << shift
        if letter in ("Y", "Z"):
            parity ^= (index >> shift) & 1
        if letter == "Y":
            y_count += 1
    phase = (1j**y_count) * (1 - 2 * parity).astype(np.complex128)
    return flip, phase


def _pauli_sum_matrix(terms: Sequence[tuple[complex, PauliString]], qubit_count: int) -> sp.csr_matrix:
    dimension = 1 << qubit_count
    index = np.arange(dimension, dtype=np.int64)
    rows, cols, data = [], [], []
    for coefficient, pauli in terms:
        flip, phase = pauli_action(pauli, qubit_count)
        rows.append(index ^ flip)
        cols.append(index)
        data.append(coefficient * phase)
    if not data:
        return sp.csr_matrix((dimension, dimension), dtype=np.complex128)
    return sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dimension, dimension)
    ).tocsr()


def _fermion_matrix(op: FermionOperator) -> sp.csr_matrix:
    modes = op.mode_count
    dimension = 1 << modes
    rows, cols, data = [], [], []
    for coefficient, factors in op.terms:
        state = np.arange(dimension, dtype=np.int64)
        sign = np.ones(dimension, dtype=np.float64)
        alive = np.ones(dimension, dtype=bool)
        for mode, dagger in reversed(factors):
            bit = 1 << (modes - 1 - mode)
            occupied = (state & bit) != 0
            alive &= ~occupied if dagger else occupied
            lower_modes = (dimension - 1) ^ ((bit << 1) - 1)
            parity = np.zeros(dimension, dtype=np.int64)
            masked = state & lower_modes
            while np.any(masked):
                parity ^= masked & 1
                masked >>= 1
            sign *= 1 - 2 * parity
            state = state ^ bit
        rows.append(state[alive])
        cols.append(np.arange(dimension, dtype=np.int64)[alive])
        data.append(coefficient * sign[alive])
    if not data:
        return sp.csr_matrix((dimension, dimension), dtype=np.complex128)
    return sp.coo_matrix(
        (np.concatenate(data).astype(np.complex128), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dimension, dimension),
    ).tocsr()


def operator_matrix(
    op: Union[FermionOperator, QubitOperator], sparse: bool = False
) -> Union[npt.NDArray[np.complex128], sp.csr_matrix]:
    """Matrix of ``op`` in the occupation/computational basis (dense unless ``sparse``)."""
    size = op.mode_count if isinstance(op, FermionOperator) else op.qubit_count
    if size > MAX_DENSE_MODES:
        raise MatrixSizeError(f"{size} modes exceeds the limit of {MAX_DENSE_MODES} for explicit matrices")
    matrix = _fermion_matrix(op) if isinstance(op, FermionOperator) else op.sparse_matrix()
    if sparse:
        return matrix
    return np.asarray(matrix.toarray(), dtype=np.complex128)


def _ladder_image(mode: int, dagger: bool, mode_count: int) -> QubitOperator:
    string = {q: "Z" for q in range(mode)}
    return QubitOperator(
        mode_count,
        [(0.5, {**string, mode: "X"}), (-0.5j if dagger else 0.5j, {**string, mode: "Y"})],
    )


def jordan_wigner(op: FermionOperator) -> QubitOperator:
    """Map ``c_j -> (prod_{k<j} Z_k) (X_j + iY_j)/2`` and ``c_j^dagger`` to its adjoint."""
    modes = op.mode_count
    images: dict[Factor, QubitOperator] = {}
    total: dict[PauliString, complex] = {}
    for coefficient, factors in op.terms:
        term = QubitOperator.identity(modes, coefficient)
        for mode, dagger in factors:
            if not 0 <= mode < modes:
                raise ModeIndexError(f"mode {mode} outside register of {modes} modes")
            if (mode, dagger) not in images:
                images[(mode, dagger)] = _ladder_image(mode, dagger, modes)
            term = term * images[(mode, dagger)]
        for c, key in term.terms:
            _accumulate(total, key, c)
    return QubitOperator._from_strings(modes, total)


def majorana(index: int, mode_count: int) -> QubitOperator:
    """JW image of ``gamma_{2j} = c_j + c_j^dagger`` or ``gamma_{2j+1} = i(c_j^dagger - c_j)``."""
    mode, odd = divmod(index, 2)
    if not 0 <= mode < mode_count:
        raise ModeIndexError(f"Majorana index {index} outside register of {mode_count} modes")
    string = {q: "Z" for q in range(mode)}
    string[mode] = "Y" if odd else "X"
    return QubitOperator(mode_count, [(1.0, string)])
