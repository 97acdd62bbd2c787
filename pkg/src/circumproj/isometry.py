"""Affine isometries of R^n and the averaged maps built from them.

An affine isometry is x -> Q x + b with Q orthogonal; that property is
enforced at construction so it cannot be forged. General affine maps (whose
linear part is arbitrary) are a deliberately separate type: averaged
combinations of isometries are nonexpansive but no longer isometric, and
keeping the types apart keeps the isometry invariant meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .numerics import DEFAULT_TOL, Tolerance, as_matrix, as_vector, min_norm_solve, spectral_norm
from .subspace import AffineSubspace, subspace_from_literal

__all__ = [
    "AffineIsometry",
    "AffineMap",
    "AveragedSpec",
    "identity",
    "make_reflector",
    "make_translation",
    "make_orthogonal",
    "compose",
    "fixed_point_set",
    "linearize_about",
    "build_sum_averaged",
    "build_product_averaged",
    "accelerated_apply",
    "is_self_adjoint",
    "is_nonexpansive",
    "is_normal",
    "operator_from_literal",
]

_ORTHOGONALITY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class AffineIsometry:
    """x -> Q x + b with Q orthogonal.

    Construction rejects any Q with ||Q^T Q - I||_max above 1e-10, so every
    value of this type is an isometry by construction.
    """

    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        Q = as_matrix(self.Q)
        b = as_vector(self.b)
        if Q.shape[0] != Q.shape[1]:
            raise ValueError(f"linear part must be square, got shape {Q.shape}")
        if Q.shape[0] != b.shape[0]:
            raise ValueError("linear part and offset dimensions differ")
        defect = np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0])))
        if defect > _ORTHOGONALITY_TOL:
            raise ValueError(f"linear part is not orthogonal, defect {defect:.3e}")
        object.__setattr__(self, "Q", np.ascontiguousarray(Q))
        object.__setattr__(self, "b", b)

    @property
    def ambient_dim(self) -> int:
        return self.b.shape[0]

    def apply(self, x) -> np.ndarray:
        x = as_vector(x)
        return self.Q @ x + self.b

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def is_linear(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return float(np.linalg.norm(self.b)) <= tol.eq_tol

    def as_map(self) -> "AffineMap":
        return AffineMap(self.Q, self.b)


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> A x + b with arbitrary linear part.

    ``averagedness`` is set only by the averaged builders below and serves
    as their certificate; hand-built maps carry None there.
    """

    A: np.ndarray
    b: np.ndarray
    averagedness: Optional[float] = None

    def __post_init__(self) -> None:
        A = as_matrix(self.A)
        b = as_vector(self.b)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"linear part must be square, got shape {A.shape}")
        if A.shape[0] != b.shape[0]:
            raise ValueError("linear part and offset dimensions differ")
        object.__setattr__(self, "A", np.ascontiguousarray(A))
        object.__setattr__(self, "b", b)

    @property
    def ambient_dim(self) -> int:
        return self.b.shape[0]

    def apply(self, x) -> np.ndarray:
        x = as_vector(x)
        return self.A @ x + self.b

    def __call__(self, x) -> np.ndarray:
        return self.apply(x)

    def is_linear(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return float(np.linalg.norm(self.b)) <= tol.eq_tol


AffineOperator = Union[AffineIsometry, AffineMap]


def identity(ambient_dim: int) -> AffineIsometry:
    return AffineIsometry(np.eye(ambient_dim), np.zeros(ambient_dim))


def make_reflector(subspace: AffineSubspace) -> AffineIsometry:
    """Reflector through an affine subspace, x -> 2 project(x) - x.

    For a linear subspace the offset is exactly zero and the linear part is
    symmetric orthogonal.
    """
    P = subspace.projector_matrix()
    Q = 2.0 * P - np.eye(subspace.ambient_dim)
    b = 2.0 * (subspace.anchor - P @ subspace.anchor)
    return AffineIsometry(Q, b)


def make_translation(offset) -> AffineIsometry:
    offset = as_vector(offset)
    return AffineIsometry(np.eye(offset.shape[0]), offset)


def make_orthogonal(Q, offset=None) -> AffineIsometry:
    Q = as_matrix(Q)
    if offset is None:
        offset = np.zeros(Q.shape[0])
    return AffineIsometry(Q, as_vector(offset))


def compose(second: AffineIsometry, first: AffineIsometry) -> AffineIsometry:
    """The isometry 'second after first'."""
    if second.ambient_dim != first.ambient_dim:
        raise ValueError("cannot compose isometries of different dimensions")
    return AffineIsometry(second.Q @ first.Q, second.Q @ first.b + second.b)


def _linear_part(op: AffineOperator) -> np.ndarray:
    return op.Q if isinstance(op, AffineIsometry) else op.A


def fixed_point_set(op: AffineOperator,
                    tol: Tolerance = DEFAULT_TOL) -> Optional[AffineSubspace]:
    """Fixed points of an affine operator, or None when there are none.

    Solves (M - I) x = -b by a minimum-norm least squares solve; the set is
    empty when the residual exceeds tol.consistency_tol relative to ||b||.
    The direction space is the numerical null space of M - I, with singular
    values below tol.rank_tol * (1 + largest) counting as exact fixed
    directions. The offset in that cutoff matters: when M is a product that
    collapses to the identity, every singular value of M - I is rounding
    noise, and a cutoff relative to the largest of them would keep all the
    noise as nonzero rank and report no fixed directions at all. Works for
    general affine maps too, which is how Douglas-Rachford operators get
    their fixed sets.
    """
    M = _linear_part(op)
    b = op.b
    n = M.shape[0]
    shifted = M - np.eye(n)
    anchor, residual = min_norm_solve(shifted, -b, tol)
    if residual > tol.consistency_tol * (1.0 + float(np.linalg.norm(b))):
        return None
    s, vt = np.linalg.svd(shifted)[1:]
    cutoff = tol.rank_tol * (1.0 + float(s[0]))
    rank = int(np.sum(s > cutoff))
    return AffineSubspace(anchor, np.ascontiguousarray(vt[rank:]))


def linearize_about(op: AffineOperator, z,
                    tol: Tolerance = DEFAULT_TOL) -> AffineOperator:
    """Conjugate by the translation taking z to the origin.

    Returns F with F(x) = op(x + z) - z. Requires z to be a fixed point of
    ``op``, which makes F linear up to round-off. The input type is
    preserved.
    """
    z = as_vector(z)
    image = op.apply(z)
    gap = float(np.linalg.norm(image - z))
    if gap > tol.consistency_tol * (1.0 + float(np.linalg.norm(z))):
        raise ValueError(f"point is not fixed by the operator, gap {gap:.3e}")
    M = _linear_part(op)
    new_offset = M @ z + op.b - z
    if isinstance(op, AffineIsometry):
        return AffineIsometry(M, new_offset)
    return AffineMap(M, new_offset)


@dataclass(frozen=True)
class AveragedSpec:
    """Weights for the averaged-map builders.

    ``weights`` must be positive and sum to 1 within 1e-12, ``alphas`` lie
    in (0, 1). ``lambdas`` are the inner relaxation parameters of the
    product-form builder; the first entry is unused there but kept so all
    three tuples share one length.
    """

    weights: tuple
    alphas: tuple
    lambdas: Optional[tuple] = None

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.weights)
        alphas = tuple(float(a) for a in self.alphas)
        lambdas = None if self.lambdas is None else tuple(float(l) for l in self.lambdas)
        if len(weights) == 0:
            raise ValueError("need at least one operator weight")
        if len(alphas) != len(weights):
            raise ValueError("weights and alphas must have equal length")
        if lambdas is not None and len(lambdas) != len(weights):
            raise ValueError("lambdas must match the other tuples in length")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(weights)!r}")
        for w in weights:
            if not 0.0 < w <= 1.0:
                raise ValueError(f"weights must lie in (0, 1], got {w!r}")
        for a in alphas:
            if not 0.0 < a < 1.0:
                raise ValueError(f"alphas must lie in (0, 1), got {a!r}")
        if lambdas is not None:
            for l in lambdas:
                if not 0.0 < l < 1.0:
                    raise ValueError(f"lambdas must lie in (0, 1), got {l!r}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "lambdas", lambdas)

    @classmethod
    def uniform(cls, count: int, alpha: float = 0.5, lam: float = 0.5) -> "AveragedSpec":
        """Equal weights 1/count with constant alpha and lambda."""
        if count < 1:
            raise ValueError("count must be positive")
        return cls((1.0 / count,) * count, (alpha,) * count, (lam,) * count)


def _linear_isometry_parts(operators: Sequence[AffineIsometry],
                           tol: Tolerance) -> list[np.ndarray]:
    if len(operators) == 0:
        raise ValueError("need at least one operator")
    n = operators[0].ambient_dim
    parts = []
    for op in operators:
        if not isinstance(op, AffineIsometry):
            raise ValueError("averaged builders take affine isometries")
        if op.ambient_dim != n:
            raise ValueError("operators live in different dimensions")
        if not op.is_linear(tol):
            raise ValueError("averaged builders require linear isometries")
        parts.append(op.Q)
    return parts


def build_sum_averaged(spec: AveragedSpec, operators: Sequence[AffineIsometry],
                       tol: Tolerance = DEFAULT_TOL) -> AffineMap:
    """Weighted sum of relaxed operators.

    A = sum_i w_i ((1 - a_i) I + a_i F_i) for linear isometries F_i. The
    result is averaged with constant sum_i w_i a_i and shares the common
    fixed set of the F_i.
    """
    parts = _linear_isometry_parts(operators, tol)
    if len(parts) != len(spec.weights):
        raise ValueError("spec length does not match the number of operators")
    n = parts[0].shape[0]
    A = np.zeros((n, n))
    for w, a, Q in zip(spec.weights, spec.alphas, parts):
        A += w * ((1.0 - a) * np.eye(n) + a * Q)
    certificate = sum(w * a for w, a in zip(spec.weights, spec.alphas))
    return AffineMap(A, np.zeros(n), averagedness=certificate)


def build_product_averaged(spec: AveragedSpec, operators: Sequence[AffineIsometry],
                           tol: Tolerance = DEFAULT_TOL) -> AffineMap:
    """Weighted sum of relaxed prefix products.

    A_1 = (1 - a_1) I + a_1 F_1 and, for i >= 2,
    A_i = (1 - a_i) I + a_i ((1 - l_i) I + l_i F_i) F_{i-1} ... F_1,
    combined as A = sum_i w_i A_i. Also averaged with constant
    sum_i w_i a_i and fixed set equal to the common fixed set of the F_i.
    """
    parts = _linear_isometry_parts(operators, tol)
    if len(parts) != len(spec.weights):
        raise ValueError("spec length does not match the number of operators")
    if len(parts) >= 2 and spec.lambdas is None:
        raise ValueError("the product builder needs lambdas for two or more operators")
    n = parts[0].shape[0]
    eye = np.eye(n)
    pieces = []
    prefix = parts[0]
    pieces.append((1.0 - spec.alphas[0]) * eye + spec.alphas[0] * parts[0])
    for i in range(1, len(parts)):
        lam = spec.lambdas[i]
        inner = (1.0 - lam) * eye + lam * parts[i]
        pieces.append((1.0 - spec.alphas[i]) * eye + spec.alphas[i] * (inner @ prefix))
        prefix = parts[i] @ prefix
    A = np.zeros((n, n))
    for w, piece in zip(spec.weights, pieces):
        A += w * piece
    certificate = sum(w * a for w, a in zip(spec.weights, spec.alphas))
    return AffineMap(A, np.zeros(n), averagedness=certificate)


_ACCEL_STATIONARY_FLOOR = 1e-13


def accelerated_apply(op: AffineMap, x, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """One step of the line-search acceleration of a nonexpansive map.

    Moves from x to t * T x + (1 - t) * x with
    t = <x, x - Tx> / ||x - Tx||^2, which is the projection of the limit
    point onto the line through x and T x. Requires a linear nonexpansive
    map. Once the residual x - Tx is dominated by rounding noise in the
    subtraction, the step length is meaningless and could throw the iterate
    an O(||x||) distance away, so x is returned unchanged below a floor a
    few orders above machine epsilon.
    """
    x = as_vector(x)
    if float(np.linalg.norm(op.b)) > tol.consistency_tol:
        raise ValueError("acceleration requires a linear map")
    norm_bound = spectral_norm(op.A)
    if norm_bound > 1.0 + tol.eq_tol:
        raise ValueError(f"acceleration requires a nonexpansive map, norm {norm_bound:.12f}")
    image = op.A @ x
    direction = x - image
    gap = float(np.linalg.norm(direction))
    if gap <= _ACCEL_STATIONARY_FLOOR * (1.0 + float(np.linalg.norm(x))):
        return x.copy()
    t = float(x @ direction) / float(direction @ direction)
    return t * image + (1.0 - t) * x


def is_self_adjoint(op: AffineOperator, tol: Tolerance = DEFAULT_TOL) -> bool:
    M = _linear_part(op)
    return float(np.max(np.abs(M - M.T))) <= tol.eq_tol * (1.0 + float(np.max(np.abs(M))))


def is_nonexpansive(op: AffineOperator, tol: Tolerance = DEFAULT_TOL) -> bool:
    return spectral_norm(_linear_part(op)) <= 1.0 + tol.eq_tol


def is_normal(op: AffineOperator, tol: Tolerance = DEFAULT_TOL) -> bool:
    M = _linear_part(op)
    commutator = M @ M.T - M.T @ M
    return float(np.max(np.abs(commutator))) <= tol.eq_tol * (1.0 + float(np.max(np.abs(M))) ** 2)


def operator_from_literal(obj, tol: Tolerance = DEFAULT_TOL) -> AffineIsometry:
    """Load an affine isometry from its literal form.

    Supported kinds:

    - {"kind": "reflector", "subspace": <subspace literal>}
    - {"kind": "translation", "offset": [..]}
    - {"kind": "orthogonal", "matrix": [[..]], "offset": [..]?}
    - {"kind": "compose", "factors": [<literal>, ..]} where the first
      factor acts first.
    """
    if not isinstance(obj, dict):
        raise ValueError(f"operator literal must be a mapping, got {type(obj).__name__}")
    kind = obj.get("kind")
    if kind == "reflector":
        if "subspace" not in obj:
            raise ValueError("reflector literal needs a 'subspace' key")
        return make_reflector(subspace_from_literal(obj["subspace"], tol))
    if kind == "translation":
        if "offset" not in obj:
            raise ValueError("translation literal needs an 'offset' key")
        return make_translation(obj["offset"])
    if kind == "orthogonal":
        if "matrix" not in obj:
            raise ValueError("orthogonal literal needs a 'matrix' key")
        return make_orthogonal(obj["matrix"], obj.get("offset"))
    if kind == "compose":
        factors = obj.get("factors")
        if not isinstance(factors, list) or len(factors) == 0:
            raise ValueError("compose literal needs a nonempty 'factors' list")
        ops = [operator_from_literal(f, tol) for f in factors]
        product = ops[0]
        for op in ops[1:]:
            product = compose(op, product)
        return product
    raise ValueError(f"unknown operator kind {kind!r}")
