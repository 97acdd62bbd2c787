"""Circumcenters of finite point sets and the maps they induce.

The circumcenter of a finite set K is the unique point of the affine hull
of K equidistant from every point of K, when such a point exists. Applied
to the images {T x : T in S} of a point under a finite family of affine
isometries, it yields an iteration map whose fixed points contain the
common fixed set of the family.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .isometry import AffineIsometry, compose, fixed_point_set, identity, linearize_about
from .numerics import DEFAULT_TOL, Tolerance, as_vector, min_norm_solve, orthonormal_basis
from .subspace import AffineSubspace, intersect

__all__ = [
    "CircumcenterResult",
    "NumericalPropernessError",
    "OperatorSet",
    "circumcenter",
    "circumcenter_map",
    "shift_operator_set",
    "build_psi",
    "PSI_PRODUCT_LIMIT",
]

PSI_PRODUCT_LIMIT = 16


class NumericalPropernessError(RuntimeError):
    """Raised when a circumcenter that theory guarantees cannot be produced
    numerically. Carries the achieved equidistance spread and the affine
    hull residual of the failed candidate."""

    def __init__(self, spread: float, residual: float):
        super().__init__(
            f"circumcenter absent within tolerance, spread {spread:.3e}, "
            f"hull residual {residual:.3e}"
        )
        self.spread = spread
        self.residual = residual


@dataclass(frozen=True)
class CircumcenterResult:
    """Outcome of a circumcenter computation.

    ``center`` is None when no point of the affine hull is equidistant from
    all inputs within tolerance. ``coefficients`` are affine-hull
    coordinates of the candidate relative to the first deduplicated point;
    they are the minimum-norm choice, which is one valid selection among
    many for affinely dependent inputs, so compare centers rather than
    coefficients. ``equidistance_spread`` is max minus min of the distances
    from the candidate to the input points, ``hull_residual`` the distance
    from the candidate to the affine hull.
    """

    center: Optional[np.ndarray]
    coefficients: np.ndarray
    equidistance_spread: float
    hull_residual: float


def _dedup(points: np.ndarray, tol: Tolerance) -> np.ndarray:
    scale = float(np.max(np.linalg.norm(points, axis=1))) if points.size else 0.0
    threshold = tol.eq_tol * (1.0 + scale)
    kept: list[int] = []
    for i in range(points.shape[0]):
        duplicate = False
        for j in kept:
            if float(np.linalg.norm(points[i] - points[j])) <= threshold:
                duplicate = True
                break
        if not duplicate:
            kept.append(i)
    return points[kept]


def _diameter(points: np.ndarray) -> float:
    k = points.shape[0]
    if k <= 1:
        return 0.0
    if k <= 512:
        diffs = points[:, None, :] - points[None, :, :]
        return float(np.max(np.linalg.norm(diffs, axis=2)))
    center = points[0]
    return 2.0 * float(np.max(np.linalg.norm(points - center, axis=1)))


def circumcenter(points, tol: Tolerance = DEFAULT_TOL) -> CircumcenterResult:
    """Circumcenter of a finite point set, if it exists.

    Points are deduplicated at eq_tol first. With d_i the offsets of the
    remaining points from the first one, the candidate p0 + sum a_i d_i is
    found by solving the Gram system 2 G a = h with G_ij = <d_i, d_j> and
    h_i = ||d_i||^2 in the minimum-norm sense. The candidate is accepted
    when the distances from it to all original points agree within
    tol.consistency_tol relative to the diameter; otherwise the result is
    absent with the achieved spread attached.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
        raise ValueError("expected a nonempty 2-d array of points")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point entries must be finite")
    rep = _dedup(pts, tol)
    p0 = rep[0]
    if rep.shape[0] == 1:
        dists = np.linalg.norm(pts - p0, axis=1)
        spread = float(np.max(dists) - np.min(dists))
        return CircumcenterResult(p0.copy(), np.zeros(0), spread, 0.0)
    offsets = rep[1:] - p0
    gram = offsets @ offsets.T
    rhs = np.einsum("ij,ij->i", offsets, offsets)
    alpha, _ = min_norm_solve(2.0 * gram, rhs, tol)
    candidate = p0 + offsets.T @ alpha
    dists = np.linalg.norm(pts - candidate, axis=1)
    spread = float(np.max(dists) - np.min(dists))
    hull = orthonormal_basis(offsets, tol)
    in_hull = candidate - p0
    hull_residual = float(np.linalg.norm(in_hull - hull.T @ (hull @ in_hull)))
    scale = _diameter(rep)
    if spread <= tol.consistency_tol * (1.0 + scale):
        return CircumcenterResult(candidate, alpha, spread, hull_residual)
    return CircumcenterResult(None, alpha, spread, hull_residual)


def _is_identity(op: AffineIsometry, tol: Tolerance) -> bool:
    n = op.ambient_dim
    return (
        float(np.max(np.abs(op.Q - np.eye(n)))) <= tol.eq_tol
        and float(np.max(np.abs(op.b))) <= tol.eq_tol
    )


def _same_operator(a: AffineIsometry, b: AffineIsometry, tol: Tolerance) -> bool:
    return (
        float(np.max(np.abs(a.Q - b.Q))) <= tol.eq_tol
        and float(np.max(np.abs(a.b - b.b))) <= tol.eq_tol
    )


@dataclass(frozen=True, eq=False)
class OperatorSet:
    """An ordered finite family of affine isometries with a common fixed
    point.

    The common fixed set is intersected once at construction and cached;
    construction fails when any operator has no fixed point or when the
    family shares none. ``solve_indices`` lists one representative per
    distinct operator (matrix equality at eq_tol), which is what the
    circumcenter map actually evaluates; structurally duplicated entries
    stay in ``ops``.
    """

    ops: tuple
    contains_identity: bool
    common_fixed: AffineSubspace
    solve_indices: tuple

    @classmethod
    def build(cls, operators: Sequence[AffineIsometry],
              tol: Tolerance = DEFAULT_TOL) -> "OperatorSet":
        ops = tuple(operators)
        if len(ops) == 0:
            raise ValueError("operator set must be nonempty")
        n = ops[0].ambient_dim
        for op in ops:
            if not isinstance(op, AffineIsometry):
                raise ValueError("operator sets hold affine isometries only")
            if op.ambient_dim != n:
                raise ValueError("operators live in different dimensions")
        fixed_sets = []
        for op in ops:
            fixed = fixed_point_set(op, tol)
            if fixed is None:
                raise ValueError(
                    "an operator has no fixed points, so the family has no common fixed set"
                )
            fixed_sets.append(fixed)
        common = intersect(fixed_sets, tol)
        if common.is_empty:
            raise ValueError(
                f"operators share no common fixed point, residual {common.residual:.3e}"
            )
        has_identity = any(_is_identity(op, tol) for op in ops)
        unique: list[int] = []
        for i, op in enumerate(ops):
            if not any(_same_operator(op, ops[j], tol) for j in unique):
                unique.append(i)
        return cls(ops, has_identity, common.subspace, tuple(unique))

    @property
    def ambient_dim(self) -> int:
        return self.ops[0].ambient_dim

    def __len__(self) -> int:
        return len(self.ops)


def circumcenter_map(operator_set: OperatorSet, x,
                     tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Circumcenter of the images of x under the family.

    Raises :class:`NumericalPropernessError` when the circumcenter is
    absent within tolerance, since for isometry families with a common
    fixed point it exists in exact arithmetic.
    """
    x = as_vector(x)
    images = np.array([operator_set.ops[i].apply(x) for i in operator_set.solve_indices])
    result = circumcenter(images, tol)
    if result.center is None:
        raise NumericalPropernessError(result.equidistance_spread, result.hull_residual)
    return result.center


def shift_operator_set(operator_set: OperatorSet, z,
                       tol: Tolerance = DEFAULT_TOL) -> OperatorSet:
    """Conjugate every operator by the translation taking z to the origin.

    Requires z to lie in the common fixed set. The shifted family consists
    of linear isometries and its circumcenter map satisfies
    C(x) = z + C_shifted(x - z).
    """
    z = as_vector(z)
    if not operator_set.common_fixed.contains(z, tol):
        raise ValueError("shift point must belong to the common fixed set")
    shifted = tuple(linearize_about(op, z, tol) for op in operator_set.ops)
    return OperatorSet.build(shifted, tol)


def build_psi(reflectors: Sequence[AffineIsometry],
              tol: Tolerance = DEFAULT_TOL,
              limit: int = PSI_PRODUCT_LIMIT) -> OperatorSet:
    """All increasing-index products of the given reflectors.

    For reflectors R_1, .., R_m this is the family of 2^m operators
    R_{i_r} .. R_{i_1} over index subsets i_1 < .. < i_r, ordered by subset
    size and lexicographically within a size, starting with the empty
    product (the identity). Inputs must be reflectors of linear subspaces,
    that is linear isometries with symmetric orthogonal linear part.
    Structural duplicates (repeated input reflectors make repeated
    products) are kept in order; the circumcenter map deduplicates them by
    matrix equality before solving.
    """
    ops = list(reflectors)
    if len(ops) == 0:
        raise ValueError("need at least one reflector")
    if len(ops) > limit:
        raise ValueError(
            f"{len(ops)} reflectors would give 2^{len(ops)} products, limit is {limit}"
        )
    n = ops[0].ambient_dim
    for op in ops:
        if not isinstance(op, AffineIsometry):
            raise ValueError("inputs must be affine isometries")
        if op.ambient_dim != n:
            raise ValueError("reflectors live in different dimensions")
        if float(np.linalg.norm(op.b)) > tol.eq_tol:
            raise ValueError("inputs must be reflectors of linear subspaces")
        if float(np.max(np.abs(op.Q - op.Q.T))) > tol.eq_tol:
            raise ValueError("inputs must have symmetric linear part")
    products = []
    for size in range(len(ops) + 1):
        for combo in combinations(range(len(ops)), size):
            product = identity(n)
            for index in combo:
                product = compose(ops[index], product)
            products.append(product)
    return OperatorSet.build(products, tol)
