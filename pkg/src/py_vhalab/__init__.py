"""Variational Hamiltonian ansatz lab for the two-dimensional Hubbard model.

This package simulates variational quantum eigensolvers built from
pseudo-time-evolutions under parts of the Hubbard Hamiltonian, and compares
them with mean-field theory and exact diagonalization on small clusters.

Key Features:
    - Jordan-Wigner fermion algebra and Hubbard Hamiltonians on periodic lattices
    - Gaussian-state preparation circuits from self-consistent mean fields
    - VHA with post-selection, the extended VEHA and the mean-field VMFHA
    - Gate-level state-vector and dephasing density-matrix simulation
    - Richardson zero-noise extrapolation
    - U and noise sweeps with CSV output and figures
"""

__version__ = "0.1.0"

from .config import ExperimentConfig, load_config, parse_config
from .core import run_ed, run_noise_sweep, run_u_sweep
from .hubbard import LatticeSpec, build_hamiltonian, external_field_schedule
from .reference import exact_ground_state, mitigated_run, richardson_extrapolate
from .solve import RunResult, SolveConfig, run_mf, run_veha, run_vha_ps, run_vmfha

__all__ = [
    "ExperimentConfig",
    "LatticeSpec",
    "RunResult",
    "SolveConfig",
    "build_hamiltonian",
    "exact_ground_state",
    "external_field_schedule",
    "load_config",
    "mitigated_run",
    "parse_config",
    "richardson_extrapolate",
    "run_ed",
    "run_mf",
    "run_noise_sweep",
    "run_u_sweep",
    "run_veha",
    "run_vha_ps",
    "run_vmfha",
]
