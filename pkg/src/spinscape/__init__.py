"""Elliptic spin chains with long-range interactions: special functions, R-matrices,
dense chain operators, limit checks and nearest-neighbour expansions."""

from .elliptic import DeformedPotentialParams, LatticeParams
from .rmatrix import RMatrixParams
from .spin import ChainOperator
from .chains import ChainSpec, TranslationSpec, build_hamiltonian, build_translation
from .verify import LimitScanSpec, Residual, VerificationReport, limit_scan

__all__ = [
    "ChainOperator",
    "ChainSpec",
    "DeformedPotentialParams",
    "LatticeParams",
    "LimitScanSpec",
    "RMatrixParams",
    "Residual",
    "TranslationSpec",
    "VerificationReport",
    "build_hamiltonian",
    "build_translation",
    "limit_scan",
]
