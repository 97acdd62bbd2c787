"""Affine and linear subspaces of R^n.

A subspace is stored as an anchor point plus an orthonormal basis of its
direction space, so projection is a single matrix-vector product and every
higher-level construction (complements, intersections, affine hulls)
reduces to the kernels in :mod:`circumproj.numerics`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .numerics import (
    DEFAULT_TOL,
    Tolerance,
    as_vector,
    complement_basis,
    min_norm_solve,
    orthonormal_basis,
)

__all__ = [
    "AffineSubspace",
    "Intersection",
    "intersect",
    "affine_hull",
    "subspace_from_literal",
]


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """An affine subspace given by one of its points and a direction basis.

    ``basis`` is an (r, n) array with orthonormal rows; r == 0 encodes a
    single point. The subspace is linear exactly when the origin belongs to
    it, see :meth:`is_linear`.
    """

    anchor: np.ndarray
    basis: np.ndarray

    def __post_init__(self) -> None:
        anchor = as_vector(self.anchor)
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2 or basis.shape[1] != anchor.shape[0]:
            raise ValueError(
                "basis must be a 2-d array whose rows live in the anchor's space"
            )
        if not np.all(np.isfinite(basis)):
            raise ValueError("basis entries must be finite")
        if basis.shape[0] > basis.shape[1]:
            raise ValueError("more basis vectors than ambient dimensions")
        if basis.shape[0] > 0:
            gram = basis @ basis.T
            defect = np.max(np.abs(gram - np.eye(basis.shape[0])))
            if defect > 1e-10:
                raise ValueError(
                    f"basis rows must be orthonormal to 1e-10, defect {defect:.3e}"
                )
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "basis", np.ascontiguousarray(basis))

    @property
    def ambient_dim(self) -> int:
        return self.anchor.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def from_span(cls, anchor, span, tol: Tolerance = DEFAULT_TOL) -> "AffineSubspace":
        """Build from a point and a raw, not necessarily orthonormal, span."""
        anchor = as_vector(anchor)
        span_arr = np.asarray(span, dtype=float)
        if span_arr.size == 0:
            return cls(anchor, np.zeros((0, anchor.shape[0])))
        return cls(anchor, orthonormal_basis(span_arr, tol))

    @classmethod
    def linear(cls, span, ambient_dim: Optional[int] = None,
               tol: Tolerance = DEFAULT_TOL) -> "AffineSubspace":
        """Linear subspace spanned by the given vectors, anchored at 0."""
        span_arr = np.asarray(span, dtype=float)
        if span_arr.size == 0:
            if ambient_dim is None:
                raise ValueError("ambient_dim is required for a trivial span")
            return cls(np.zeros(ambient_dim), np.zeros((0, ambient_dim)))
        basis = orthonormal_basis(span_arr, tol)
        return cls(np.zeros(basis.shape[1]), basis)

    @classmethod
    def point(cls, anchor) -> "AffineSubspace":
        anchor = as_vector(anchor)
        return cls(anchor, np.zeros((0, anchor.shape[0])))

    @classmethod
    def full(cls, ambient_dim: int) -> "AffineSubspace":
        return cls(np.zeros(ambient_dim), np.eye(ambient_dim))

    def _check_dim(self, x: np.ndarray) -> None:
        if x.shape[0] != self.ambient_dim:
            raise ValueError(
                f"point has dimension {x.shape[0]}, subspace lives in R^{self.ambient_dim}"
            )

    def projector_matrix(self) -> np.ndarray:
        """The n x n orthogonal projector onto the direction space."""
        return self.basis.T @ self.basis

    def project(self, x) -> np.ndarray:
        """Nearest point of the subspace."""
        x = as_vector(x)
        self._check_dim(x)
        shifted = x - self.anchor
        return self.anchor + self.basis.T @ (self.basis @ shifted)

    def reflect(self, x) -> np.ndarray:
        """Reflection through the subspace, 2 * project(x) - x."""
        x = as_vector(x)
        return 2.0 * self.project(x) - x

    def contains(self, x, tol: Tolerance = DEFAULT_TOL) -> bool:
        """Membership up to tol.consistency_tol relative to ||x||."""
        x = as_vector(x)
        gap = float(np.linalg.norm(self.project(x) - x))
        return gap <= tol.consistency_tol * (1.0 + float(np.linalg.norm(x)))

    def is_linear(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        """True when the subspace passes through the origin."""
        zero = np.zeros(self.ambient_dim)
        gap = float(np.linalg.norm(self.project(zero)))
        return gap <= tol.eq_tol * (1.0 + float(np.linalg.norm(self.anchor)))

    def orthogonal_complement(self, tol: Tolerance = DEFAULT_TOL) -> "AffineSubspace":
        """Orthogonal complement; defined for linear subspaces only."""
        if not self.is_linear(tol):
            raise ValueError("orthogonal complement is defined for linear subspaces only")
        comp = complement_basis(self.basis, self.ambient_dim, tol)
        return AffineSubspace(np.zeros(self.ambient_dim), comp)

    def translate(self, z) -> "AffineSubspace":
        return AffineSubspace(self.anchor + as_vector(z), self.basis)


@dataclass(frozen=True)
class Intersection:
    """Result of intersecting affine subspaces.

    ``subspace`` is None when the inputs share no common point; ``residual``
    is the smallest constraint violation achieved by any point, which
    diagnoses near-empty configurations.
    """

    subspace: Optional[AffineSubspace]
    residual: float

    @property
    def is_empty(self) -> bool:
        return self.subspace is None


def intersect(subspaces: Sequence[AffineSubspace],
              tol: Tolerance = DEFAULT_TOL) -> Intersection:
    """Intersect finitely many affine subspaces.

    Membership in each input is the linear constraint that the offset from
    its anchor has no component in the complement of its direction space.
    The stacked constraints are solved by a minimum-norm least squares
    solve; the intersection is declared empty when the residual exceeds
    tol.consistency_tol relative to the data scale. The direction space of
    the intersection is the complement of the sum of the complements.
    """
    if len(subspaces) == 0:
        raise ValueError("need at least one subspace to intersect")
    n = subspaces[0].ambient_dim
    for s in subspaces[1:]:
        if s.ambient_dim != n:
            raise ValueError("subspaces live in different ambient dimensions")
    constraint_rows = []
    rhs_parts = []
    for s in subspaces:
        comp = complement_basis(s.basis, n, tol)
        if comp.shape[0] == 0:
            continue
        constraint_rows.append(comp)
        rhs_parts.append(comp @ s.anchor)
    if not constraint_rows:
        return Intersection(AffineSubspace.full(n), 0.0)
    stacked = np.vstack(constraint_rows)
    rhs = np.concatenate(rhs_parts)
    solution, residual = min_norm_solve(stacked, rhs, tol)
    scale = 1.0 + float(np.linalg.norm(rhs))
    if residual > tol.consistency_tol * scale:
        return Intersection(None, residual)
    normals = orthonormal_basis(stacked, tol)
    direction = complement_basis(normals, n, tol)
    return Intersection(AffineSubspace(solution, direction), residual)


def affine_hull(points, tol: Tolerance = DEFAULT_TOL) -> AffineSubspace:
    """Affine hull of a finite nonempty point set."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("expected a nonempty 2-d array of points")
    anchor = pts[0]
    if pts.shape[0] == 1:
        return AffineSubspace.point(anchor)
    return AffineSubspace(anchor, orthonormal_basis(pts[1:] - anchor, tol))


def subspace_from_literal(obj, tol: Tolerance = DEFAULT_TOL) -> AffineSubspace:
    """Load a subspace from its literal form.

    The literal is a mapping with keys "anchor" (list of floats) and
    "span" (list of raw span vectors, orthonormalized on load). Either key
    may be omitted: a missing anchor means the origin, a missing span means
    a single point. At least one key must be present.
    """
    if not isinstance(obj, dict):
        raise ValueError(f"subspace literal must be a mapping, got {type(obj).__name__}")
    if "anchor" not in obj and "span" not in obj:
        raise ValueError("subspace literal needs an 'anchor' or a 'span' key")
    span = obj.get("span")
    if "anchor" in obj:
        anchor = as_vector(obj["anchor"])
    else:
        span_arr = np.asarray(span, dtype=float)
        if span_arr.ndim != 2:
            raise ValueError("subspace literal 'span' must be a list of vectors")
        anchor = np.zeros(span_arr.shape[1])
    if span is None:
        return AffineSubspace.point(anchor)
    return AffineSubspace.from_span(anchor, span, tol)
