"""Experiment harness: seeded instances, method wiring, audited reports.

Configs are single JSON files (a key tree with lists, grammar documented in
the README). All randomness flows through numpy's default_rng (PCG64) with
documented seed derivation, artifacts are written atomically, and nothing
time-dependent is serialized, so rerunning a config reproduces every output
byte for byte.
"""

from __future__ import annotations

import json
import os
import platform
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .circumcenter import OperatorSet, build_psi
from .isometry import (
    AffineIsometry,
    AffineMap,
    AveragedSpec,
    build_product_averaged,
    build_sum_averaged,
    compose,
    fixed_point_set,
    identity,
    make_reflector,
    operator_from_literal,
)
from .methods import (
    METHOD_TAGS,
    IterationTrace,
    MethodConfig,
    dr_operator,
    run_accel,
    run_averaged_iter,
    run_cim,
    run_dr,
    run_map,
    run_sym_map,
    symmetric_map_operator,
)
from .numerics import DEFAULT_TOL, Tolerance, as_vector
from .rates import RateReport, accel_constants, audit_bound, operator_rate, tuple_angle_cos
from .subspace import AffineSubspace, intersect, subspace_from_literal

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "load_config",
    "parse_config",
    "generate_instance",
    "run_experiment",
    "compute_rates",
    "demo_config",
]


class ConfigError(ValueError):
    """Config parsing or validation failure, with a key-path diagnostic."""


OPERATOR_SET_RECIPES = ("psi", "identity_plus_reflectors", "identity_plus_prefix_products", "custom")
PREFIX_KINDS = ("none", "sym_map_product")
BUILDER_KINDS = ("sum", "product")


@dataclass(frozen=True)
class X0Spec:
    kind: str
    point: Optional[tuple] = None
    seed: Optional[int] = None


@dataclass(frozen=True)
class InstanceItem:
    label: str
    subspace_literals: tuple
    x0: Optional[X0Spec] = None
    product_fixed_line: Optional[tuple] = None


@dataclass(frozen=True)
class RandomInstances:
    count: int
    num_subspaces: int
    dim_range: tuple
    seed: int


@dataclass(frozen=True)
class MethodSpec:
    method: str
    operator_set: str = "psi"
    symmetrized: bool = False
    prefix: str = "none"
    builder: str = "sum"
    operators: Optional[tuple] = None
    label: Optional[str] = None
    max_iters: Optional[int] = None


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    ambient_dim: int
    seed: int
    max_iters: int
    stop_tol: float
    x0: X0Spec
    methods: tuple
    explicit_items: Optional[tuple] = None
    random_instances: Optional[RandomInstances] = None
    out_dir: Optional[str] = None


def _expect_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(obj).__name__}")
    return obj


def _expect_list(obj, path: str) -> list:
    if not isinstance(obj, list):
        raise ConfigError(f"{path}: expected a list, got {type(obj).__name__}")
    return obj


def _get(obj: dict, key: str, path: str):
    if key not in obj:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return obj[key]


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _parse_x0(obj, path: str) -> X0Spec:
    mapping = _expect_mapping(obj, path)
    kind = _get(mapping, "kind", path)
    if kind == "explicit":
        point = _expect_list(_get(mapping, "point", path), f"{path}.point")
        return X0Spec(kind="explicit",
                      point=tuple(_as_number(v, f"{path}.point[{i}]") for i, v in enumerate(point)))
    if kind == "random_unit":
        return X0Spec(kind="random_unit", seed=_as_int(_get(mapping, "seed", path), f"{path}.seed"))
    raise ConfigError(f"{path}.kind: expected 'explicit' or 'random_unit', got {kind!r}")


def _parse_method(obj, index: int) -> MethodSpec:
    path = f"methods[{index}]"
    mapping = _expect_mapping(obj, path)
    method = _get(mapping, "method", path)
    if method not in METHOD_TAGS:
        raise ConfigError(f"{path}.method: unknown tag {method!r}, expected one of {METHOD_TAGS}")
    operator_set = mapping.get("operator_set", "psi")
    if operator_set not in OPERATOR_SET_RECIPES:
        raise ConfigError(
            f"{path}.operator_set: unknown recipe {operator_set!r}, expected one of {OPERATOR_SET_RECIPES}"
        )
    prefix = mapping.get("prefix", "none")
    if prefix not in PREFIX_KINDS:
        raise ConfigError(f"{path}.prefix: unknown prefix {prefix!r}, expected one of {PREFIX_KINDS}")
    builder = mapping.get("builder", "sum")
    if builder not in BUILDER_KINDS:
        raise ConfigError(f"{path}.builder: unknown builder {builder!r}, expected one of {BUILDER_KINDS}")
    symmetrized = mapping.get("symmetrized", False)
    if not isinstance(symmetrized, bool):
        raise ConfigError(f"{path}.symmetrized: expected a boolean")
    if prefix == "sym_map_product" and not (method == "cim" and symmetrized and operator_set == "psi"):
        raise ConfigError(
            f"{path}.prefix: 'sym_map_product' requires method 'cim' with "
            "operator_set 'psi' and symmetrized true"
        )
    if method == "averaged_iter" and operator_set == "custom":
        raise ConfigError(f"{path}.operator_set: 'custom' is not valid for averaged_iter")
    operators = mapping.get("operators")
    if operator_set == "custom":
        operators = tuple(_expect_list(_get(mapping, "operators", path), f"{path}.operators"))
    elif operators is not None:
        raise ConfigError(f"{path}.operators: only allowed with operator_set 'custom'")
    label = mapping.get("label")
    if label is not None and not isinstance(label, str):
        raise ConfigError(f"{path}.label: expected a string")
    max_iters = mapping.get("max_iters")
    if max_iters is not None:
        max_iters = _as_int(max_iters, f"{path}.max_iters")
        if max_iters < 0:
            raise ConfigError(f"{path}.max_iters: must be nonnegative")
    return MethodSpec(method=method, operator_set=operator_set, symmetrized=symmetrized,
                      prefix=prefix, builder=builder, operators=operators,
                      label=label, max_iters=max_iters)


def parse_config(obj, source: str = "config") -> ExperimentConfig:
    """Validate a parsed JSON object into an :class:`ExperimentConfig`.

    Raises :class:`ConfigError` with the offending key path on any problem.
    """
    root = _expect_mapping(obj, source)
    name = _get(root, "name", source)
    if not isinstance(name, str) or not name:
        raise ConfigError(f"{source}.name: expected a nonempty string")
    ambient_dim = _as_int(_get(root, "ambient_dim", source), f"{source}.ambient_dim")
    if ambient_dim < 1:
        raise ConfigError(f"{source}.ambient_dim: must be at least 1")
    seed = _as_int(root.get("seed", 0), f"{source}.seed")
    max_iters = _as_int(root.get("max_iters", 50), f"{source}.max_iters")
    if max_iters < 0:
        raise ConfigError(f"{source}.max_iters: must be nonnegative")
    stop_tol = _as_number(root.get("stop_tol", 0.0), f"{source}.stop_tol")
    if stop_tol < 0:
        raise ConfigError(f"{source}.stop_tol: must be nonnegative")
    x0 = _parse_x0(root.get("x0", {"kind": "random_unit", "seed": seed}), f"{source}.x0")

    instances = _expect_mapping(_get(root, "instances", source), f"{source}.instances")
    kind = _get(instances, "kind", f"{source}.instances")
    explicit_items = None
    random_instances = None
    if kind == "explicit":
        raw_items = _expect_list(_get(instances, "items", f"{source}.instances"),
                                 f"{source}.instances.items")
        if not raw_items:
            raise ConfigError(f"{source}.instances.items: must be nonempty")
        items = []
        for i, raw in enumerate(raw_items):
            path = f"{source}.instances.items[{i}]"
            mapping = _expect_mapping(raw, path)
            label = mapping.get("label", f"instance_{i:02d}")
            if not isinstance(label, str) or not label:
                raise ConfigError(f"{path}.label: expected a nonempty string")
            subs = _expect_list(_get(mapping, "subspaces", path), f"{path}.subspaces")
            if not subs:
                raise ConfigError(f"{path}.subspaces: must be nonempty")
            item_x0 = _parse_x0(mapping["x0"], f"{path}.x0") if "x0" in mapping else None
            fixed_line = mapping.get("product_fixed_line")
            if fixed_line is not None:
                fixed_line = tuple(
                    _as_number(v, f"{path}.product_fixed_line[{j}]")
                    for j, v in enumerate(_expect_list(fixed_line, f"{path}.product_fixed_line"))
                )
            items.append(InstanceItem(label=label, subspace_literals=tuple(subs),
                                      x0=item_x0, product_fixed_line=fixed_line))
        labels = [item.label for item in items]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"{source}.instances.items: labels must be unique")
        explicit_items = tuple(items)
    elif kind == "random":
        path = f"{source}.instances"
        count = _as_int(_get(instances, "count", path), f"{path}.count")
        num_subspaces = _as_int(_get(instances, "num_subspaces", path), f"{path}.num_subspaces")
        dim_range = _expect_list(_get(instances, "dim_range", path), f"{path}.dim_range")
        if len(dim_range) != 2:
            raise ConfigError(f"{path}.dim_range: expected [low, high]")
        lo = _as_int(dim_range[0], f"{path}.dim_range[0]")
        hi = _as_int(dim_range[1], f"{path}.dim_range[1]")
        rseed = _as_int(_get(instances, "seed", path), f"{path}.seed")
        if count < 1:
            raise ConfigError(f"{path}.count: must be positive")
        if num_subspaces < 1:
            raise ConfigError(f"{path}.num_subspaces: must be positive")
        if not 1 <= lo <= hi <= ambient_dim:
            raise ConfigError(f"{path}.dim_range: need 1 <= low <= high <= ambient_dim")
        random_instances = RandomInstances(count=count, num_subspaces=num_subspaces,
                                           dim_range=(lo, hi), seed=rseed)
    else:
        raise ConfigError(f"{source}.instances.kind: expected 'explicit' or 'random', got {kind!r}")

    raw_methods = _expect_list(_get(root, "methods", source), f"{source}.methods")
    if not raw_methods:
        raise ConfigError(f"{source}.methods: must be nonempty")
    methods = tuple(_parse_method(m, i) for i, m in enumerate(raw_methods))
    labels = [m.label for m in methods if m.label is not None]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{source}.methods: labels must be unique")

    out_dir = root.get("out_dir")
    if out_dir is not None and not isinstance(out_dir, str):
        raise ConfigError(f"{source}.out_dir: expected a string")

    return ExperimentConfig(name=name, ambient_dim=ambient_dim, seed=seed,
                            max_iters=max_iters, stop_tol=stop_tol, x0=x0,
                            methods=methods, explicit_items=explicit_items,
                            random_instances=random_instances, out_dir=out_dir)


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}:{err.lineno}:{err.colno}: invalid JSON: {err.msg}") from None
    return parse_config(obj, source=str(path))


def generate_instance(ambient_dim: int, num_subspaces: int, dim_range,
                      rng: np.random.Generator, min_offset: float = 0.1,
                      max_tries: int = 100,
                      tol: Tolerance = DEFAULT_TOL):
    """Draw random linear subspaces and a unit start point.

    Subspace bases are orthonormalized Gaussian draws with dimensions from
    ``dim_range`` inclusive; the start point is uniform on the unit sphere.
    Draws whose start lies closer than ``min_offset`` to the intersection
    are retried, and after ``max_tries`` failures an error is raised.
    Consuming order per try: dimensions, then one Gaussian matrix per
    subspace, then the start point.
    """
    lo, hi = int(dim_range[0]), int(dim_range[1])
    if not 1 <= lo <= hi <= ambient_dim:
        raise ValueError("need 1 <= low <= high <= ambient_dim in dim_range")
    for _ in range(max_tries):
        dims = rng.integers(lo, hi + 1, size=num_subspaces)
        subspaces = [
            AffineSubspace.linear(rng.standard_normal((int(d), ambient_dim)), tol=tol)
            for d in dims
        ]
        raw = rng.standard_normal(ambient_dim)
        x0 = raw / float(np.linalg.norm(raw))
        inter = intersect(subspaces, tol)
        if inter.is_empty:
            continue
        offset = float(np.linalg.norm(x0 - inter.subspace.project(x0)))
        if offset > min_offset:
            return subspaces, x0
    raise RuntimeError(
        f"failed to draw a nondegenerate instance in {max_tries} tries; "
        "the requested dimensions leave no room between start and intersection"
    )


@dataclass(frozen=True)
class _MethodPlan:
    label: str
    method: str
    constant_name: Optional[str]
    rate: Optional[float]
    ingredients: dict
    scale_mode: str
    prefactor: Optional[float]
    runner: Callable[[], IterationTrace]


def _default_label(spec: MethodSpec, index: int) -> str:
    if spec.label is not None:
        return spec.label
    parts = [f"{index:02d}", spec.method]
    if spec.method == "cim":
        parts.append(spec.operator_set)
        if spec.symmetrized:
            parts.append("sym")
        if spec.prefix != "none":
            parts.append("prefixed")
    if spec.method == "averaged_iter":
        parts.append(spec.builder)
    return "_".join(parts)


def _plan_method(spec: MethodSpec, index: int, subspaces: Sequence[AffineSubspace],
                 x0: np.ndarray, base: ExperimentConfig,
                 tol: Tolerance) -> _MethodPlan:
    label = _default_label(spec, index)
    max_iters = spec.max_iters if spec.max_iters is not None else base.max_iters
    config = MethodConfig(method=spec.method, max_iters=max_iters, stop_tol=base.stop_tol)
    reflectors = None
    if spec.method == "averaged_iter" or (spec.method == "cim" and spec.operator_set != "custom"):
        reflectors = [make_reflector(s) for s in subspaces]

    if spec.method == "map":
        gamma = tuple_angle_cos(subspaces, tol)
        return _MethodPlan(label, spec.method, "cyclic_projection_tuple_rate", gamma,
                           {"tuple_angle_cos": gamma}, "plain", None,
                           lambda: run_map(subspaces, x0, config, tol))

    if spec.method == "sym_map":
        op = symmetric_map_operator(subspaces)
        fixed = fixed_point_set(op, tol)
        rate = operator_rate(op, fixed, tol)
        half = tuple_angle_cos(subspaces, tol)
        return _MethodPlan(label, spec.method, "symmetric_product_rate", rate,
                           {"operator_rate": rate, "tuple_angle_cos_half": half},
                           "plain", None,
                           lambda: run_sym_map(op, x0, config, tol))

    if spec.method == "accel_map":
        op = symmetric_map_operator(subspaces)
        consts = accel_constants(op, tol)
        ingredients = {"c1": consts.c1, "c2": consts.c2, "eta": consts.eta, "cT": consts.cT}
        return _MethodPlan(label, spec.method, "acceleration_rate", consts.eta,
                           ingredients, "plain", None,
                           lambda: run_accel(op, x0, config, tol))

    if spec.method == "dr":
        if len(subspaces) < 2:
            raise ConfigError(f"method {label!r} needs at least two subspaces")
        op = dr_operator(subspaces[0], subspaces[1], tol)
        fixed = fixed_point_set(op, tol)
        rate = operator_rate(op, fixed, tol)
        return _MethodPlan(label, spec.method, "douglas_rachford_rate", rate,
                           {"operator_rate": rate}, "plain", None,
                           lambda: run_dr(subspaces[0], subspaces[1], x0, config, tol))

    if spec.method == "averaged_iter":
        count = len(reflectors)
        avg_spec = AveragedSpec.uniform(count)
        if spec.builder == "sum":
            op = build_sum_averaged(avg_spec, reflectors, tol)
        else:
            op = build_product_averaged(avg_spec, reflectors, tol)
        fixed = fixed_point_set(op, tol)
        rate = operator_rate(op, fixed, tol)
        return _MethodPlan(label, spec.method, f"{spec.builder}_averaged_rate", rate,
                           {"operator_rate": rate}, "plain", None,
                           lambda: run_averaged_iter(op, x0, config, tol))

    # circumcentered iterations
    if spec.operator_set == "custom":
        ops = [operator_from_literal(lit, tol) for lit in spec.operators]
        operator_set = OperatorSet.build(ops, tol)
        return _MethodPlan(label, spec.method, None, None, {}, "plain", None,
                           lambda: run_cim(operator_set, x0, config, tol))

    family = list(subspaces)
    if spec.symmetrized:
        family = family + family[-2::-1]
    family_reflectors = [make_reflector(s) for s in family]

    if spec.operator_set == "psi":
        operator_set = build_psi(family_reflectors, tol)
        if spec.prefix == "sym_map_product":
            op = symmetric_map_operator(subspaces)
            consts = accel_constants(op, tol)
            prefixed_config = MethodConfig(method=spec.method, max_iters=max_iters,
                                           stop_tol=base.stop_tol, prefix=op)
            ingredients = {"c1": consts.c1, "c2": consts.c2, "eta": consts.eta,
                           "cT": consts.cT}
            return _MethodPlan(label, spec.method, "accelerated_prefixed_rate",
                               consts.eta, ingredients, "prefixed", consts.cT,
                               lambda: run_cim(operator_set, x0, prefixed_config, tol))
        if spec.symmetrized:
            half = tuple_angle_cos(subspaces, tol)
            rate = half * half
            return _MethodPlan(label, spec.method, "symmetric_tuple_rate", rate,
                               {"tuple_angle_cos_half": half}, "plain", None,
                               lambda: run_cim(operator_set, x0, config, tol))
        gamma = tuple_angle_cos(subspaces, tol)
        return _MethodPlan(label, spec.method, "tuple_rate", gamma,
                           {"tuple_angle_cos": gamma}, "plain", None,
                           lambda: run_cim(operator_set, x0, config, tol))

    if spec.operator_set == "identity_plus_reflectors":
        ops = [identity(subspaces[0].ambient_dim)] + family_reflectors
        operator_set = OperatorSet.build(ops, tol)
        avg = build_sum_averaged(AveragedSpec.uniform(len(family_reflectors)),
                                 family_reflectors, tol)
        rate = operator_rate(avg, operator_set.common_fixed, tol)
        return _MethodPlan(label, spec.method, "sum_averaged_rate", rate,
                           {"operator_rate": rate}, "plain", None,
                           lambda: run_cim(operator_set, x0, config, tol))

    # identity_plus_prefix_products
    n = subspaces[0].ambient_dim
    ops = [identity(n)]
    prefix_product = identity(n)
    for reflector in family_reflectors:
        prefix_product = compose(reflector, prefix_product)
        ops.append(prefix_product)
    operator_set = OperatorSet.build(ops, tol)
    avg = build_product_averaged(AveragedSpec.uniform(len(family_reflectors)),
                                 family_reflectors, tol)
    rate = operator_rate(avg, operator_set.common_fixed, tol)
    return _MethodPlan(label, spec.method, "product_averaged_rate", rate,
                       {"operator_rate": rate}, "plain", None,
                       lambda: run_cim(operator_set, x0, config, tol))


@dataclass(frozen=True)
class MethodOutcome:
    label: str
    method: str
    trace: IterationTrace
    report: Optional[RateReport]

    def summary_obj(self) -> dict:
        errors = self.trace.errors
        to_target = None
        for k in range(errors.shape[0]):
            if errors[k] <= 1e-10:
                to_target = k
                break
        out = {
            "label": self.label,
            "method": self.method,
            "final_error": float(errors[-1]),
            "error_origin": self.trace.error_origin,
            "iterations": int(self.trace.stopped_at),
            "iters_to_1e-10": to_target,
            "rate": None if self.report is None else self.report.to_json_obj(),
        }
        return out


@dataclass(frozen=True)
class InstanceOutcome:
    label: str
    ambient_dim: int
    subspace_dims: tuple
    intersection_dim: int
    x0: np.ndarray
    methods: tuple
    extra_checks: tuple

    @property
    def all_ok(self) -> bool:
        audits = all(m.report is None or m.report.all_satisfied for m in self.methods)
        checks = all(passed for _, passed, _ in self.extra_checks)
        return audits and checks


@dataclass(frozen=True)
class ExperimentReport:
    name: str
    environment: dict
    instances: tuple

    @property
    def all_ok(self) -> bool:
        return all(instance.all_ok for instance in self.instances)

    def to_json_obj(self, include_traces: bool = False) -> dict:
        return {
            "name": self.name,
            "environment": self.environment,
            "all_ok": self.all_ok,
            "instances": [
                {
                    "label": instance.label,
                    "ambient_dim": instance.ambient_dim,
                    "subspace_dims": list(instance.subspace_dims),
                    "intersection_dim": instance.intersection_dim,
                    "x0": [float(v) for v in instance.x0],
                    "extra_checks": [
                        {"name": name, "passed": passed, "detail": detail}
                        for name, passed, detail in instance.extra_checks
                    ],
                    "methods": [
                        (
                            {**m.summary_obj(), "trace": m.trace.to_json_obj()}
                            if include_traces
                            else m.summary_obj()
                        )
                        for m in instance.methods
                    ],
                }
                for instance in self.instances
            ],
        }

    def to_json(self, include_traces: bool = False) -> str:
        return json.dumps(self.to_json_obj(include_traces=include_traces),
                          sort_keys=True, indent=1)


def _environment_stamp(config: ExperimentConfig) -> dict:
    return {
        "package": "circumproj",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": sys.platform,
        "seed": config.seed,
    }


def _resolve_x0(spec: X0Spec, ambient_dim: int, instance_index: int) -> np.ndarray:
    if spec.kind == "explicit":
        x0 = as_vector(list(spec.point))
        if x0.shape[0] != ambient_dim:
            raise ConfigError(
                f"x0 has dimension {x0.shape[0]}, instances live in R^{ambient_dim}"
            )
        return x0
    rng = np.random.default_rng((spec.seed, instance_index))
    raw = rng.standard_normal(ambient_dim)
    return raw / float(np.linalg.norm(raw))


def _resolve_instances(config: ExperimentConfig, tol: Tolerance):
    resolved = []
    if config.explicit_items is not None:
        for i, item in enumerate(config.explicit_items):
            subspaces = []
            for j, literal in enumerate(item.subspace_literals):
                try:
                    s = subspace_from_literal(literal, tol)
                except ValueError as err:
                    raise ConfigError(
                        f"instances.items[{i}].subspaces[{j}]: {err}"
                    ) from None
                if s.ambient_dim != config.ambient_dim:
                    raise ConfigError(
                        f"instances.items[{i}].subspaces[{j}]: dimension "
                        f"{s.ambient_dim} does not match ambient_dim {config.ambient_dim}"
                    )
                subspaces.append(s)
            x0 = _resolve_x0(item.x0 or config.x0, config.ambient_dim, i)
            resolved.append((item.label, subspaces, x0, item.product_fixed_line))
    else:
        spec = config.random_instances
        for i in range(spec.count):
            rng = np.random.default_rng((spec.seed, i))
            subspaces, x0 = generate_instance(config.ambient_dim, spec.num_subspaces,
                                              spec.dim_range, rng, tol=tol)
            resolved.append((f"random_{i:03d}", subspaces, x0, None))
    return resolved


def _product_fixed_line_check(subspaces: Sequence[AffineSubspace], direction,
                              tol: Tolerance):
    product = identity(subspaces[0].ambient_dim)
    for s in subspaces:
        product = compose(make_reflector(s), product)
    fixed = fixed_point_set(product, tol)
    if fixed is None:
        return ("product_fixed_line", False, "product has no fixed points")
    wanted = as_vector(list(direction))
    unit = wanted / float(np.linalg.norm(wanted))
    if fixed.dim != 1:
        return ("product_fixed_line", False, f"fixed set has dimension {fixed.dim}")
    basis_vec = fixed.basis[0]
    residual = float(np.linalg.norm(basis_vec - (basis_vec @ unit) * unit))
    through_origin = fixed.contains(np.zeros(fixed.ambient_dim), tol)
    passed = residual <= 1e-10 and through_origin
    return ("product_fixed_line", passed,
            f"dimension {fixed.dim}, direction residual {residual:.3e}")


def run_experiment(config: ExperimentConfig, out_dir=None, fmt: str = "csv",
                   tol: Tolerance = DEFAULT_TOL,
                   write: bool = True) -> ExperimentReport:
    """Run every method on every instance, audit the bounds, write artifacts.

    With fmt 'csv' each instance/method pair gets a trace CSV and, when a
    bound was audited, a rate CSV next to report.json; with fmt 'json' the
    rows are embedded in report.json instead. All writes go through a
    temp-file-and-rename so partially written artifacts never appear.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    outcomes = []
    for index, (label, subspaces, x0, fixed_line) in enumerate(_resolve_instances(config, tol)):
        method_outcomes = []
        for m_index, spec in enumerate(config.methods):
            plan = _plan_method(spec, m_index, subspaces, x0, config, tol)
            trace = plan.runner()
            report = None
            if plan.constant_name is not None:
                report = audit_bound(trace, plan.rate, scale_mode=plan.scale_mode,
                                     prefactor=plan.prefactor,
                                     constant_name=plan.constant_name,
                                     ingredients=plan.ingredients)
            method_outcomes.append(MethodOutcome(plan.label, spec.method, trace, report))
        checks = []
        if fixed_line is not None:
            checks.append(_product_fixed_line_check(subspaces, fixed_line, tol))
        inter = intersect(subspaces, tol)
        outcomes.append(InstanceOutcome(
            label=label,
            ambient_dim=config.ambient_dim,
            subspace_dims=tuple(int(s.dim) for s in subspaces),
            intersection_dim=-1 if inter.is_empty else int(inter.subspace.dim),
            x0=x0,
            methods=tuple(method_outcomes),
            extra_checks=tuple(checks),
        ))
    report = ExperimentReport(name=config.name,
                              environment=_environment_stamp(config),
                              instances=tuple(outcomes))
    if write:
        target = Path(out_dir) if out_dir is not None else Path(config.out_dir or f"{config.name}_out")
        _write_report(report, target, fmt)
    return report


def _write_atomic(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data)
    os.replace(tmp, path)


def _write_report(report: ExperimentReport, out_dir: Path, fmt: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        for instance in report.instances:
            for outcome in instance.methods:
                stem = f"{instance.label}__{outcome.label}"
                _write_atomic(out_dir / f"{stem}.trace.csv", outcome.trace.to_csv())
                if outcome.report is not None:
                    _write_atomic(out_dir / f"{stem}.rate.csv", outcome.report.to_csv())
    _write_atomic(out_dir / "report.json",
                  report.to_json(include_traces=(fmt == "json")) + "\n")


def compute_rates(config: ExperimentConfig, tol: Tolerance = DEFAULT_TOL) -> list:
    """Theoretical constants for every instance/method pair, without tracing."""
    rows = []
    for index, (label, subspaces, x0, _) in enumerate(_resolve_instances(config, tol)):
        for m_index, spec in enumerate(config.methods):
            plan = _plan_method(spec, m_index, subspaces, x0, config, tol)
            rows.append({
                "instance": label,
                "method": plan.label,
                "constant_name": plan.constant_name,
                "value": plan.rate,
                "ingredients": {k: float(v) for k, v in sorted(plan.ingredients.items())},
                "scale_mode": plan.scale_mode,
                "prefactor": plan.prefactor,
            })
    return rows


def demo_config() -> dict:
    """The canonical demo: a 45 degree pair of lines and three lines in the
    plane whose reflector product fixes the diagonal."""
    return {
        "name": "demo",
        "ambient_dim": 2,
        "seed": 20240601,
        "max_iters": 12,
        "stop_tol": 0.0,
        "x0": {"kind": "random_unit", "seed": 11},
        "instances": {
            "kind": "explicit",
            "items": [
                {
                    "label": "lines_45deg",
                    "subspaces": [
                        {"anchor": [0.0, 0.0], "span": [[1.0, 0.0]]},
                        {"anchor": [0.0, 0.0], "span": [[1.0, 1.0]]},
                    ],
                },
                {
                    "label": "three_lines_plane",
                    "subspaces": [
                        {"anchor": [0.0, 0.0], "span": [[1.0, 0.0]]},
                        {"anchor": [0.0, 0.0], "span": [[1.0, 1.0]]},
                        {"anchor": [0.0, 0.0], "span": [[0.0, 1.0]]},
                    ],
                    "product_fixed_line": [1.0, 1.0],
                },
            ],
        },
        "methods": [
            {"method": "map"},
            {"method": "cim", "operator_set": "psi"},
            {"method": "sym_map"},
            {"method": "accel_map"},
            {"method": "dr"},
            {"method": "cim", "operator_set": "psi", "symmetrized": True,
             "prefix": "sym_map_product"},
            {"method": "averaged_iter", "builder": "sum"},
        ],
    }
