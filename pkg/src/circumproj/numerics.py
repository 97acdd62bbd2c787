"""Dense small-matrix kernels shared by every other module.

Everything here operates on plain numpy float arrays. Rank decisions use a
relative singular value cutoff so callers never tune absolute thresholds to
the scale of their data. All functions are pure and never mutate inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space as _null_space
from scipy.linalg import orth as _orth

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_vector",
    "as_matrix",
    "orthonormal_basis",
    "complement_basis",
    "min_norm_solve",
    "spectral_norm",
    "sym_eigen_extremes",
]


@dataclass(frozen=True)
class Tolerance:
    """Shared numerical cutoffs.

    rank_tol is the relative singular value cutoff for rank decisions,
    consistency_tol decides whether a linear system or a membership test is
    satisfied, and eq_tol is the pointwise equality threshold used for
    deduplication and exactness checks.
    """

    rank_tol: float = 1e-10
    consistency_tol: float = 1e-8
    eq_tol: float = 1e-10

    def __post_init__(self) -> None:
        for name in ("rank_tol", "consistency_tol", "eq_tol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


DEFAULT_TOL = Tolerance()


def as_vector(x) -> np.ndarray:
    """Convert to a finite 1-d float array, validating shape and entries."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def as_matrix(a) -> np.ndarray:
    """Convert to a finite 2-d float array, validating shape and entries."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def orthonormal_basis(vectors, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal rows spanning the same space as the input vectors.

    Accepts a sequence of equal-length vectors or a 2-d array whose rows
    are the vectors. Returns an (r, n) array with orthonormal rows where r
    is the numerical rank, decided by a rank-revealing orthogonal
    factorization with singular values below ``tol.rank_tol`` relative to
    the largest one treated as zero.
    """
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2:
        raise ValueError("input vectors must share one ambient dimension")
    if arr.shape[1] < 1:
        raise ValueError("ambient dimension must be at least 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    if arr.shape[0] == 0 or not np.any(arr):
        return np.zeros((0, arr.shape[1]))
    basis_cols = _orth(arr.T, rcond=tol.rank_tol)
    return np.ascontiguousarray(basis_cols.T)


def complement_basis(basis, ambient_dim: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of the row space.

    ``basis`` may have zero rows, in which case the complement is all of
    R^n and the identity basis is returned.
    """
    arr = np.asarray(basis, dtype=float).reshape(-1, ambient_dim)
    if arr.shape[0] == 0:
        return np.eye(ambient_dim)
    ns_cols = _null_space(arr, rcond=tol.rank_tol)
    return np.ascontiguousarray(ns_cols.T)


def min_norm_solve(A, b, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, float]:
    """Minimum-norm least squares solution of A x = b.

    Returns the pseudoinverse solution together with the achieved residual
    norm ||A x - b||. Singular values below ``tol.rank_tol`` relative to
    the largest one are treated as zero, which keeps rank-deficient and
    inconsistent systems stable. The residual lets callers decide whether
    the system was consistent.
    """
    mat = as_matrix(A)
    rhs = as_vector(b)
    if mat.shape[0] != rhs.shape[0]:
        raise ValueError(
            f"matrix has {mat.shape[0]} rows but right-hand side has {rhs.shape[0]} entries"
        )
    solution, _, _, _ = np.linalg.lstsq(mat, rhs, rcond=tol.rank_tol)
    residual = float(np.linalg.norm(mat @ solution - rhs))
    return solution, residual


def spectral_norm(A) -> float:
    """Largest singular value of A.

    Equals the square root of the largest eigenvalue of A^T A, and is
    invariant under transposition.
    """
    mat = as_matrix(A)
    if mat.size == 0:
        raise ValueError("spectral norm of an empty matrix is undefined")
    return float(np.linalg.norm(mat, 2))


def sym_eigen_extremes(M) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the symmetric part (M + M^T) / 2.

    The input is symmetrized first: compressions B A B^T of self-adjoint
    operators are symmetric only up to round-off, and eigvalsh wants an
    exactly symmetric argument.
    """
    mat = as_matrix(M)
    if mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if mat.shape[0] == 0:
        raise ValueError("eigenvalues of an empty matrix are undefined")
    sym = 0.5 * (mat + mat.T)
    eigenvalues = np.linalg.eigvalsh(sym)
    return float(eigenvalues[0]), float(eigenvalues[-1])
