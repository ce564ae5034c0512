"""2D Hubbard model with external symmetry-breaking fields.

Spin-orbital ordering is ``q = 2 * (x + nx * y) + s`` with ``s = 0`` for spin up
and ``s = 1`` for spin down, so both spins of a site are adjacent under the
Jordan-Wigner map. The spin sign is ``+1`` for up and ``-1`` for down and the
sublattice parity of a site is ``(x + y) % 2``.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from .constants import DEFAULT_HOPPING, FIELD_SCHEDULES, FIELD_SLOPE, MINIMUM_FIELD, SYMMETRY_COMBOS
from .fermion import FermionOperator, QubitOperator, annihilation, creation, jordan_wigner, number

UP = 0
DOWN = 1
SPINS = (UP, DOWN)

Site = tuple[int, int]
Bond = tuple[Site, Site]


def spin_sign(spin: int) -> int:
    return 1 if spin == UP else -1


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry, couplings and external fields of one Hubbard instance."""

    nx: int
    ny: int
    t: float = DEFAULT_HOPPING
    u: float = 0.0
    b_af_ext: float = 0.0
    delta_s_ext: float = 0.0
    periodic: bool = True
    dedup_bonds: bool = True

    def __post_init__(self) -> None:
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"lattice dimensions must be positive, got {self.nx}x{self.ny}")

    @property
    def site_count(self) -> int:
        return self.nx * self.ny

    @property
    def mode_count(self) -> int:
        return 2 * self.nx * self.ny

    def sites(self) -> list[Site]:
        return [(x, y) for y in range(self.ny) for x in range(self.nx)]

    def mode(self, x: int, y: int, spin: int) -> int:
        return 2 * (x + self.nx * y) + spin

    def parity(self, x: int, y: int) -> int:
        return (x + y) % 2

    def orbital_parity(self, x: int, y: int, spin: int) -> int:
        """``sigma * (-1)^((x + y) % 2)``, the label splitting orbitals into AF sublattices."""
        return spin_sign(spin) * (1 - 2 * self.parity(x, y))

    def with_u(self, u: float) -> "LatticeSpec":
        return replace(self, u=u)

    def with_fields(self, delta_s_ext: float, b_af_ext: float) -> "LatticeSpec":
        return replace(self, delta_s_ext=delta_s_ext, b_af_ext=b_af_ext)

    def without_fields(self) -> "LatticeSpec":
        return replace(self, delta_s_ext=0.0, b_af_ext=0.0)

    def label(self) -> str:
        return f"{self.nx}x{self.ny}"


def bonds(spec: LatticeSpec, direction: str) -> list[Bond]:
    """Nearest-neighbour bonds along ``direction`` ("x" or "y"), source site first."""
    if direction not in ("x", "y"):
        raise ValueError(f"direction must be 'x' or 'y', got {direction!r}")
    length = spec.nx if direction == "x" else spec.ny
    seen: set[frozenset[Site]] = set()
    found: list[Bond] = []
    for x, y in spec.sites():
        step = x if direction == "x" else y
        if step + 1 < length:
            nxt = step + 1
        elif spec.periodic and length > 1:
            nxt = 0
        else:
            continue
        target = (nxt, y) if direction == "x" else (x, nxt)
        key = frozenset(((x, y), target))
        if spec.dedup_bonds and key in seen:
            continue
        seen.add(key)
        found.append(((x, y), target))
    return found


def _hopping(spec: LatticeSpec, bond_list: list[Bond]) -> FermionOperator:
    modes = spec.mode_count
    terms = []
    for (xa, ya), (xb, yb) in bond_list:
        for spin in SPINS:
            a = spec.mode(xa, ya, spin)
            b = spec.mode(xb, yb, spin)
            terms.append((spec.t, [(a, True), (b, False)]))
            terms.append((spec.t, [(b, True), (a, False)]))
    return FermionOperator(modes, terms)


def interaction(spec: LatticeSpec) -> FermionOperator:
    """``U * sum_sites (n_up - 1/2)(n_down - 1/2)``."""
    modes = spec.mode_count
    total = FermionOperator.zero(modes)
    if spec.u == 0.0:
        return total
    for x, y in spec.sites():
        up = number(spec.mode(x, y, UP), modes) - 0.5
        down = number(spec.mode(x, y, DOWN), modes) - 0.5
        total = total + spec.u * (up * down)
    return total


def af_coupling(spec: LatticeSpec) -> FermionOperator:
    """Unnormalized staggered magnetization ``sum (-1)^p sigma n``."""
    modes = spec.mode_count
    terms = []
    for x, y in spec.sites():
        for spin in SPINS:
            q = spec.mode(x, y, spin)
            terms.append((float(spec.orbital_parity(x, y, spin)), [(q, True), (q, False)]))
    return FermionOperator(modes, terms)


def pairing_sum(spec: LatticeSpec) -> FermionOperator:
    """``sum_sites c_down c_up`` (not Hermitian)."""
    modes = spec.mode_count
    return FermionOperator(
        modes,
        [(1.0, [(spec.mode(x, y, DOWN), False), (spec.mode(x, y, UP), False)]) for x, y in spec.sites()],
    )


def build_hamiltonian(spec: LatticeSpec) -> FermionOperator:
    """Hopping, on-site interaction and both external-field couplings."""
    h = _hopping(spec, bonds(spec, "x") + bonds(spec, "y")) + interaction(spec)
    if spec.b_af_ext != 0.0:
        h = h + spec.b_af_ext * af_coupling(spec)
    if spec.delta_s_ext != 0.0:
        pairs = pairing_sum(spec)
        h = h + spec.delta_s_ext * (pairs + pairs.adjoint())
    return h


def decompose(spec: LatticeSpec) -> list[FermionOperator]:
    """``[H1, H2, H3, H4, H5]``: x hopping (odd x, even x), y hopping (odd y, even y), interaction.

    External fields are left out; the five parts sum to the field-free Hamiltonian.
    """
    x_bonds = bonds(spec, "x")
    y_bonds = bonds(spec, "y")
    return [
        _hopping(spec, [b for b in x_bonds if b[0][0] % 2 == 1]),
        _hopping(spec, [b for b in x_bonds if b[0][0] % 2 == 0]),
        _hopping(spec, [b for b in y_bonds if b[0][1] % 2 == 1]),
        _hopping(spec, [b for b in y_bonds if b[0][1] % 2 == 0]),
        interaction(spec),
    ]


def order_parameter_observables(spec: LatticeSpec) -> tuple[FermionOperator, FermionOperator]:
    """``(m_af, delta_s)``: normalized staggered magnetization and ``U * sum c_down c_up``."""
    return af_coupling(spec) / spec.site_count, spec.u * pairing_sum(spec)


def symmetry_breaking_terms(spec: LatticeSpec, combo: str) -> list[FermionOperator]:
    """Extra VEHA generators: ``[H_BCS]``, ``[H_AF(-1), H_AF(+1)]`` or all three."""
    if combo not in SYMMETRY_COMBOS:
        raise ValueError(f"unknown symmetry-breaking combination {combo!r}")
    modes = spec.mode_count
    generators: list[FermionOperator] = []
    if "BCS" in combo:
        pairs = pairing_sum(spec)
        generators.append(pairs + pairs.adjoint())
    if "AF" in combo:
        for target in (-1, 1):
            h = FermionOperator.zero(modes)
            for x, y in spec.sites():
                for spin in SPINS:
                    if spec.orbital_parity(x, y, spin) == target:
                        q = spec.mode(x, y, spin)
                        h = h + annihilation(q, modes) + creation(q, modes)
            generators.append(h)
    return generators


def external_field_schedule(u: float, mode: str = "abs") -> tuple[float, float]:
    """``(delta_s_ext, b_af_ext)``; ``abs`` uses ``max(0.1, 0.1|u|)``, ``literal`` uses ``max(0.1, 0.1u)``.

    ``off`` switches both fields off.
    """
    if mode not in FIELD_SCHEDULES:
        raise ValueError(f"unknown field schedule {mode!r}")
    if mode == "off":
        return 0.0, 0.0
    scale = abs(u) if mode == "abs" else u
    field = max(MINIMUM_FIELD, FIELD_SLOPE * scale)
    return field, field


def total_number(spec: LatticeSpec) -> FermionOperator:
    modes = spec.mode_count
    total = FermionOperator.zero(modes)
    for q in range(modes):
        total = total + number(q, modes)
    return total


def total_sz(spec: LatticeSpec) -> FermionOperator:
    modes = spec.mode_count
    total = FermionOperator.zero(modes)
    for x, y in spec.sites():
        for spin in SPINS:
            total = total + 0.5 * spin_sign(spin) * number(spec.mode(x, y, spin), modes)
    return total


def spin_flip_matrix(spec: LatticeSpec) -> npt.NDArray[np.float64]:
    """Global up/down exchange in the occupation basis, including fermionic reordering signs."""
    modes = spec.mode_count
    dimension = 1 << modes
    matrix = np.zeros((dimension, dimension))
    for index in range(dimension):
        mapped = [q ^ 1 for q in range(modes) if (index >> (modes - 1 - q)) & 1]
        inversions = sum(1 for i, a in enumerate(mapped) for b in mapped[i + 1 :] if a > b)
        target = sum(1 << (modes - 1 - q) for q in mapped)
        matrix[target, index] = -1.0 if inversions % 2 else 1.0
    return matrix


@lru_cache(maxsize=64)
def qubit_hamiltonian(spec: LatticeSpec) -> QubitOperator:
    """Cached JW image of :func:`build_hamiltonian`."""
    return jordan_wigner(build_hamiltonian(spec))


@lru_cache(maxsize=64)
def qubit_observables(spec: LatticeSpec) -> tuple[QubitOperator, QubitOperator]:
    """Cached JW images of :func:`order_parameter_observables`."""
    m_af, delta_s = order_parameter_observables(spec)
    return jordan_wigner(m_af), jordan_wigner(delta_s)
