"""Rational K-matrices for sl(n): construction, boundary Yang-Baxter
residuals, involution extraction and residual-symmetry classification."""

from .classify import (
    ClassificationReport,
    Involution,
    classify_kmatrix,
    extract_involution,
    solvable_structure,
    symmetric_pair_check,
    twist_class,
)
from .kmatrix import (
    KMatrix,
    aiii_kappa,
    bybe_residual,
    cbybe_residual,
    classical_perturbative_solve,
    constant_twisted_k,
    diagonal_k,
    irreducibility_check,
    k1_structure_check,
    nilpotent_k,
    perturbative_solve,
    residual_symmetry,
    symmetry_residual,
)
from .lie import build_sl, centralizer, classify_subalgebra, contragredient, restricted_casimir, split_casimir
from .rmatrix import classical_r, crossed_r, find_crossing, ybe_residual, yang_r
from .series import MatrixSeries, RationalMatrixFn, expand, series_inverse, series_mul

__version__ = "0.1.0"

__all__ = [
    "aiii_kappa",
    "build_sl",
    "bybe_residual",
    "cbybe_residual",
    "centralizer",
    "classical_perturbative_solve",
    "classical_r",
    "ClassificationReport",
    "classify_kmatrix",
    "classify_subalgebra",
    "constant_twisted_k",
    "contragredient",
    "crossed_r",
    "diagonal_k",
    "expand",
    "extract_involution",
    "find_crossing",
    "Involution",
    "irreducibility_check",
    "k1_structure_check",
    "KMatrix",
    "MatrixSeries",
    "nilpotent_k",
    "perturbative_solve",
    "RationalMatrixFn",
    "residual_symmetry",
    "restricted_casimir",
    "series_inverse",
    "series_mul",
    "solvable_structure",
    "split_casimir",
    "symmetric_pair_check",
    "symmetry_residual",
    "twist_class",
    "yang_r",
    "ybe_residual",
]
