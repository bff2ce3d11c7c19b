"""Void-monomer-dimer tilings and gap bounds for a truncated boson chain."""

from .fock import OBC, PER, Config, Sector, SparseState
from .hamiltonian import HamiltonianParams, SparseMatrix, apply_H, build_matrix
from .tiling import Tiling, TilingFamily, enumerate_roots, expand_class, recognize

__all__ = [
    "OBC",
    "PER",
    "Config",
    "Sector",
    "SparseState",
    "HamiltonianParams",
    "SparseMatrix",
    "apply_H",
    "build_matrix",
    "Tiling",
    "TilingFamily",
    "enumerate_roots",
    "expand_class",
    "recognize",
]

__version__ = "0.1.0"
