"""PT-symmetric SU(2)-like 2x2 random matrix ensembles.

Closed-form matrix-element and spacing densities, exact samplers for the
Gaussian-weighted (unbounded) and unit-ball (bounded) variants, and the
numerical oracles used to check them.
"""

from ptrmt.core import (
    Bounded,
    BoundedExponents,
    EigenPair,
    EnsembleSpec,
    ExponentTriple,
    InvalidParameterError,
    MatrixParams,
    SuTwoLikeMatrix,
    Unbounded,
    build_matrix,
    eigenvalues,
    normality_residual,
)

__version__ = "0.1.0"

__all__ = [
    "Bounded",
    "BoundedExponents",
    "EigenPair",
    "EnsembleSpec",
    "ExponentTriple",
    "InvalidParameterError",
    "MatrixParams",
    "SuTwoLikeMatrix",
    "Unbounded",
    "build_matrix",
    "eigenvalues",
    "normality_residual",
]
