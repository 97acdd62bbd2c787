"""Iteration drivers for the best-approximation methods.

Every driver produces an :class:`IterationTrace` whose error column always
measures distance to the projection of the original start point onto the
relevant fixed set, also when a prefix operator was applied to the start.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .circumcenter import OperatorSet, circumcenter_map
from .isometry import (
    AffineIsometry,
    AffineMap,
    accelerated_apply,
    fixed_point_set,
    is_self_adjoint,
    make_reflector,
)
from .numerics import DEFAULT_TOL, Tolerance, as_vector, spectral_norm
from .subspace import AffineSubspace, intersect

__all__ = [
    "METHOD_TAGS",
    "MethodConfig",
    "IterationTrace",
    "run_cim",
    "run_map",
    "run_sym_map",
    "run_accel",
    "run_dr",
    "run_blockwise_cim",
    "run_averaged_iter",
    "map_operator",
    "symmetric_map_operator",
    "dr_operator",
]

METHOD_TAGS = ("cim", "map", "sym_map", "accel_map", "dr", "averaged_iter")

PrefixOperator = Union[AffineIsometry, AffineMap]


@dataclass(frozen=True)
class MethodConfig:
    """Stopping rule and optional start transformation for one run.

    ``stop_tol`` acts on the distance between consecutive iterates; zero
    disables early stopping. ``prefix`` is applied once to the start point
    before iterating, while errors keep referring to the original start.
    """

    method: str
    max_iters: int = 50
    stop_tol: float = 0.0
    prefix: Optional[PrefixOperator] = None

    def __post_init__(self) -> None:
        if self.method not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.stop_tol < 0:
            raise ValueError("stop_tol must be nonnegative")


def _fmt17(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """Recorded iterates of one run.

    ``iterates[0]`` is the start point after any prefix; ``errors[k]`` is
    the distance from ``iterates[k]`` to ``target``, the projection of the
    original, pre-prefix start onto the fixed set of the method. Wall time
    lives only in memory and is never written to artifacts, so reruns of a
    seeded experiment are byte-identical.
    """

    method: str
    iterates: np.ndarray
    errors: np.ndarray
    stopped_at: int
    wall_time: float
    x0_original: np.ndarray
    target: np.ndarray

    def __post_init__(self) -> None:
        if self.iterates.ndim != 2:
            raise ValueError("iterates must be a 2-d array, one row per iterate")
        if self.errors.shape[0] != self.iterates.shape[0]:
            raise ValueError("errors must have one entry per iterate")

    @property
    def ambient_dim(self) -> int:
        return self.iterates.shape[1]

    @property
    def error_origin(self) -> float:
        """Distance from the original start to the target."""
        return float(np.linalg.norm(self.x0_original - self.target))

    def step_norms(self) -> np.ndarray:
        steps = np.zeros(self.iterates.shape[0])
        if self.iterates.shape[0] > 1:
            steps[1:] = np.linalg.norm(np.diff(self.iterates, axis=0), axis=1)
        return steps

    def to_csv(self) -> str:
        lines = ["k,x_norm,error,step_norm"]
        steps = self.step_norms()
        for k in range(self.iterates.shape[0]):
            x_norm = float(np.linalg.norm(self.iterates[k]))
            lines.append(
                f"{k},{_fmt17(x_norm)},{_fmt17(self.errors[k])},{_fmt17(steps[k])}"
            )
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        steps = self.step_norms()
        return {
            "method": self.method,
            "ambient_dim": int(self.ambient_dim),
            "stopped_at": int(self.stopped_at),
            "x0_original": [float(v) for v in self.x0_original],
            "target": [float(v) for v in self.target],
            "error_origin": self.error_origin,
            "rows": [
                {
                    "k": k,
                    "x_norm": float(np.linalg.norm(self.iterates[k])),
                    "error": float(self.errors[k]),
                    "step_norm": float(steps[k]),
                }
                for k in range(self.iterates.shape[0])
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)


def _drive(method: str, step: Callable[[np.ndarray], np.ndarray], x0,
           config: MethodConfig, target: np.ndarray) -> IterationTrace:
    x0_original = as_vector(x0)
    start = x0_original if config.prefix is None else as_vector(config.prefix.apply(x0_original))
    clock = time.perf_counter()
    iterates = [start]
    current = start
    steps_taken = 0
    for _ in range(config.max_iters):
        nxt = step(current)
        if not np.all(np.isfinite(nxt)):
            raise RuntimeError(f"{method} produced a non-finite iterate at step {steps_taken + 1}")
        iterates.append(nxt)
        steps_taken += 1
        if config.stop_tol > 0 and float(np.linalg.norm(nxt - current)) <= config.stop_tol:
            current = nxt
            break
        current = nxt
    elapsed = time.perf_counter() - clock
    stacked = np.array(iterates)
    errors = np.linalg.norm(stacked - target, axis=1)
    return IterationTrace(
        method=method,
        iterates=stacked,
        errors=errors,
        stopped_at=steps_taken,
        wall_time=elapsed,
        x0_original=x0_original,
        target=target,
    )


def run_cim(operator_set: OperatorSet, x0, config: MethodConfig,
            tol: Tolerance = DEFAULT_TOL) -> IterationTrace:
    """Iterate the circumcenter map of the family."""
    x0 = as_vector(x0)
    target = operator_set.common_fixed.project(x0)
    return _drive(config.method, lambda x: circumcenter_map(operator_set, x, tol),
                  x0, config, target)


def run_map(subspaces: Sequence[AffineSubspace], x0, config: MethodConfig,
            tol: Tolerance = DEFAULT_TOL) -> IterationTrace:
    """Cyclic projections; one trace step is one full sweep through the list."""
    x0 = as_vector(x0)
    inter = intersect(subspaces, tol)
    if inter.is_empty:
        raise ValueError(
            f"subspaces have empty intersection, residual {inter.residual:.3e}"
        )
    target = inter.subspace.project(x0)

    def sweep(x: np.ndarray) -> np.ndarray:
        for s in subspaces:
            x = s.project(x)
        return x

    return _drive(config.method, sweep, x0, config, target)


def _check_sym_nonexpansive(op: AffineMap, tol: Tolerance) -> None:
    if float(np.linalg.norm(op.b)) > tol.consistency_tol:
        raise ValueError("expected a linear operator")
    if not is_self_adjoint(op, tol):
        raise ValueError("expected a self-adjoint operator")
    norm = spectral_norm(op.A)
    if norm > 1.0 + tol.eq_tol:
        raise ValueError(f"expected a nonexpansive operator, norm {norm:.12f}")


def run_sym_map(op: AffineMap, x0, config: MethodConfig,
                tol: Tolerance = DEFAULT_TOL) -> IterationTrace:
    """Iterate a self-adjoint nonexpansive linear operator."""
    x0 = as_vector(x0)
    _check_sym_nonexpansive(op, tol)
    fixed = fixed_point_set(op, tol)
    if fixed is None:
        raise ValueError("operator has no fixed points")
    target = fixed.project(x0)
    return _drive(config.method, op.apply, x0, config, target)


def run_accel(op: AffineMap, x0, config: MethodConfig,
              tol: Tolerance = DEFAULT_TOL) -> IterationTrace:
    """Iterate the line-search acceleration of a self-adjoint nonexpansive
    linear operator."""
    x0 = as_vector(x0)
    _check_sym_nonexpansive(op, tol)
    fixed = fixed_point_set(op, tol)
    if fixed is None:
        raise ValueError("operator has no fixed points")
    target = fixed.project(x0)
    return _drive(config.method, lambda x: accelerated_apply(op, x, tol),
                  x0, config, target)


def dr_operator(first: AffineSubspace, second: AffineSubspace,
                tol: Tolerance = DEFAULT_TOL) -> AffineMap:
    """The averaged reflector composition (I + R_second R_first) / 2."""
    for s in (first, second):
        if not s.is_linear(tol):
            raise ValueError("expected linear subspaces")
    q1 = make_reflector(first).Q
    q2 = make_reflector(second).Q
    n = first.ambient_dim
    return AffineMap(0.5 * (np.eye(n) + q2 @ q1), np.zeros(n))


def run_dr(first: AffineSubspace, second: AffineSubspace, x0,
           config: MethodConfig, tol: Tolerance = DEFAULT_TOL) -> IterationTrace:
    """Iterate the Douglas-Rachford operator of two linear subspaces.

    Errors are measured to the projection of the start onto the operator's
    own fixed set, which strictly contains the intersection whenever the
    two orthogonal complements meet nontrivially.
    """
    x0 = as_vector(x0)
    op = dr_operator(first, second, tol)
    fixed = fixed_point_set(op, tol)
    if fixed is None:
        raise ValueError("Douglas-Rachford operator has no fixed points")
    target = fixed.project(x0)
    return _drive(config.method, op.apply, x0, config, target)


def run_blockwise_cim(blocks: Sequence[OperatorSet], x0, config: MethodConfig,
                      tol: Tolerance = DEFAULT_TOL, mode: str = "compose",
                      weights: Optional[Sequence[float]] = None) -> IterationTrace:
    """Apply circumcenter maps of several families blockwise.

    ``compose`` chains the block maps in order within one trace step;
    ``convex`` averages the block images with the given weights (uniform by
    default). Every block must contain the identity, which makes each block
    map firmly quasinonexpansive and the combination convergent to the
    projection onto the intersection of all the blocks' fixed sets.
    """
    x0 = as_vector(x0)
    if len(blocks) == 0:
        raise ValueError("need at least one block")
    for i, block in enumerate(blocks):
        if not block.contains_identity:
            raise ValueError(f"block {i} does not contain the identity")
    if mode not in ("compose", "convex"):
        raise ValueError(f"unknown blockwise mode {mode!r}")
    inter = intersect([b.common_fixed for b in blocks], tol)
    if inter.is_empty:
        raise ValueError("blocks share no common fixed point")
    target = inter.subspace.project(x0)
    if mode == "compose":
        def step(x: np.ndarray) -> np.ndarray:
            for block in blocks:
                x = circumcenter_map(block, x, tol)
            return x
    else:
        if weights is None:
            weights = [1.0 / len(blocks)] * len(blocks)
        weights = [float(w) for w in weights]
        if len(weights) != len(blocks):
            raise ValueError("need one weight per block")
        if abs(sum(weights) - 1.0) > 1e-12 or any(w <= 0 for w in weights):
            raise ValueError("weights must be positive and sum to 1")

        def step(x: np.ndarray) -> np.ndarray:
            return sum(w * circumcenter_map(block, x, tol)
                       for w, block in zip(weights, blocks))

    return _drive(config.method, step, x0, config, target)


def run_averaged_iter(op: AffineMap, x0, config: MethodConfig,
                      tol: Tolerance = DEFAULT_TOL) -> IterationTrace:
    """Iterate a map produced by one of the averaged builders."""
    x0 = as_vector(x0)
    if op.averagedness is None:
        raise ValueError("operator carries no averagedness certificate; "
                         "use build_sum_averaged or build_product_averaged")
    fixed = fixed_point_set(op, tol)
    if fixed is None:
        raise ValueError("averaged operator has no fixed points")
    target = fixed.project(x0)
    return _drive(config.method, op.apply, x0, config, target)


def _projector_map(subspace: AffineSubspace) -> AffineMap:
    P = subspace.projector_matrix()
    return AffineMap(P, subspace.anchor - P @ subspace.anchor)


def _compose_maps(outer: AffineMap, inner: AffineMap) -> AffineMap:
    return AffineMap(outer.A @ inner.A, outer.A @ inner.b + outer.b)


def map_operator(subspaces: Sequence[AffineSubspace]) -> AffineMap:
    """The single-sweep cyclic projection operator P_m .. P_1."""
    if len(subspaces) == 0:
        raise ValueError("need at least one subspace")
    product = _projector_map(subspaces[0])
    for s in subspaces[1:]:
        product = _compose_maps(_projector_map(s), product)
    return product


def symmetric_map_operator(subspaces: Sequence[AffineSubspace]) -> AffineMap:
    """The palindromic sweep P_1 .. P_n .. P_1 over the given half list.

    The result is self-adjoint positive semidefinite for linear subspaces.
    """
    if len(subspaces) == 0:
        raise ValueError("need at least one subspace")
    full = list(subspaces) + list(subspaces[-2::-1])
    return map_operator(full)
