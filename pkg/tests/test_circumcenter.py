import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circumproj import (
    AffineSubspace,
    NumericalPropernessError,
    OperatorSet,
    build_psi,
    circumcenter,
    circumcenter_map,
    compose,
    identity,
    intersect,
    make_orthogonal,
    make_reflector,
    make_translation,
    shift_operator_set,
)
from helpers import random_family, reflectors_of, unit_vector
from oracles import oracle_circumcenter

LINE_X = AffineSubspace.linear([[1.0, 0.0]])
LINE_DIAG = AffineSubspace.linear([[1.0, 1.0]])


def test_circumcenter_frozen_right_triangle():
    result = circumcenter(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    assert result.center is not None
    assert np.allclose(result.center, [0.5, 0.5], atol=1e-12), (
        f"hypotenuse midpoint expected, got {result.center}"
    )
    assert result.equidistance_spread < 1e-12
    assert result.hull_residual < 1e-12


def test_circumcenter_frozen_collinear_points_have_none():
    result = circumcenter(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    assert result.center is None
    assert result.equidistance_spread > 1e-3


def test_circumcenter_of_singleton_and_duplicates():
    single = circumcenter(np.array([[2.0, 3.0]]))
    assert np.allclose(single.center, [2.0, 3.0])
    doubled = circumcenter(np.array([[2.0, 3.0], [2.0, 3.0]]))
    assert np.allclose(doubled.center, [2.0, 3.0])


def test_circumcenter_of_two_points_is_midpoint():
    result = circumcenter(np.array([[0.0, 0.0, 0.0], [2.0, 4.0, 0.0]]))
    assert np.allclose(result.center, [1.0, 2.0, 0.0], atol=1e-12)


@given(st.integers(0, 10**6))
def test_circumcenter_agrees_with_independent_oracle(seed):
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, 6))
    points = rng.standard_normal((count, 5))
    ours = circumcenter(points)
    reference = oracle_circumcenter(points)
    if reference is None:
        assert ours.center is None
        return
    assert ours.center is not None, "oracle found a center but we did not"
    assert np.allclose(ours.center, reference, atol=1e-8), (
        f"centers differ: {ours.center} vs {reference}"
    )


@given(st.integers(0, 10**6))
def test_circumcenter_is_equidistant_and_in_the_hull(seed):
    rng = np.random.default_rng(seed)
    count = int(rng.integers(2, 6))
    points = rng.standard_normal((count, 5))
    result = circumcenter(points)
    if result.center is None:
        return
    dists = np.linalg.norm(points - result.center, axis=1)
    assert float(dists.max() - dists.min()) < 1e-8 * (1.0 + dists.max())
    # membership in the affine hull: projecting onto it changes nothing
    offsets = points[1:] - points[0]
    gram_proj, *_ = np.linalg.lstsq(offsets.T, result.center - points[0], rcond=None)
    assert np.linalg.norm(offsets.T @ gram_proj - (result.center - points[0])) < 1e-8


@given(st.integers(0, 10**6))
def test_circumcenter_scaling_and_translation_equivariance(seed):
    rng = np.random.default_rng(seed)
    count = int(rng.integers(2, 6))
    points = rng.standard_normal((count, 4))
    base = circumcenter(points)
    if base.center is None:
        return
    scale = float(rng.uniform(0.5, 3.0)) * (-1.0 if rng.integers(2) else 1.0)
    shift = rng.standard_normal(4)
    moved = circumcenter(scale * points + shift)
    assert moved.center is not None
    assert np.allclose(moved.center, scale * base.center + shift, atol=1e-8)


def test_circumcenter_map_frozen_pair_gives_projection():
    """C over {Id, R_U} is the midpoint of x and its reflection, i.e. P_U x."""
    family = OperatorSet.build([identity(2), make_reflector(LINE_X)])
    assert family.contains_identity
    center = circumcenter_map(family, np.array([3.0, 4.0]))
    assert np.allclose(center, [3.0, 0.0], atol=1e-12)


def test_operator_set_rejects_fixed_point_free_and_disjoint_families():
    with pytest.raises(ValueError):
        OperatorSet.build([make_translation([1.0, 0.0])])
    shifted_up = make_reflector(AffineSubspace.from_span([0.0, 1.0], [[1.0, 0.0]]))
    shifted_down = make_reflector(AffineSubspace.from_span([0.0, -1.0], [[1.0, 0.0]]))
    with pytest.raises(ValueError):
        OperatorSet.build([shifted_up, shifted_down])
    with pytest.raises(ValueError):
        OperatorSet.build([])


def test_operator_set_deduplicates_solver_entries():
    reflector = make_reflector(LINE_X)
    family = OperatorSet.build([identity(2), reflector, make_reflector(LINE_X)])
    assert len(family.ops) == 3
    assert family.solve_indices == (0, 1), (
        f"duplicate reflector should collapse for the solver, got {family.solve_indices}"
    )
    # the duplicate does not change the circumcenter
    plain = OperatorSet.build([identity(2), reflector])
    x = np.array([1.0, 2.0])
    assert np.allclose(circumcenter_map(family, x), circumcenter_map(plain, x))


def test_build_psi_frozen_order_and_size():
    reflectors = reflectors_of([LINE_X, LINE_DIAG])
    family = build_psi(reflectors)
    assert len(family) == 4
    assert family.contains_identity
    assert np.allclose(family.ops[0].Q, np.eye(2), atol=1e-12)
    assert np.allclose(family.ops[1].Q, reflectors[0].Q, atol=1e-12)
    assert np.allclose(family.ops[2].Q, reflectors[1].Q, atol=1e-12)
    assert np.allclose(family.ops[3].Q, reflectors[1].Q @ reflectors[0].Q, atol=1e-12), (
        "the pair product must apply the lower index first"
    )


def test_build_psi_rejects_bad_inputs():
    rotation = make_orthogonal([[0.0, -1.0], [1.0, 0.0]])
    with pytest.raises(ValueError):
        build_psi([rotation])  # not symmetric
    anchored = make_reflector(AffineSubspace.from_span([0.0, 1.0], [[1.0, 0.0]]))
    with pytest.raises(ValueError):
        build_psi([anchored])  # not linear
    many = reflectors_of([LINE_X] * 17)
    with pytest.raises(ValueError):
        build_psi(many)


def test_numerical_properness_error_carries_diagnostics():
    """Collinear unequal images have no circumcenter; the mapping must say so.

    A family of translations never passes OperatorSet.build, so the guard is
    exercised by constructing the set directly, the way a corrupted cache
    would look.
    """
    ops = (identity(1), make_translation([1.0]), make_translation([3.0]))
    rigged = OperatorSet(ops=ops, contains_identity=True,
                         common_fixed=AffineSubspace.point([0.0]),
                         solve_indices=(0, 1, 2))
    with pytest.raises(NumericalPropernessError) as excinfo:
        circumcenter_map(rigged, np.array([0.0]))
    assert excinfo.value.spread > 0.1


@given(st.integers(0, 10**6))
def test_circumcenter_map_is_proper_for_reflector_families(seed):
    """Families of subspace reflectors always produce a circumcenter."""
    rng = np.random.default_rng(seed)
    family = random_family(rng, 4, int(rng.integers(1, 4)), 1, 3)
    operator_set = build_psi(reflectors_of(family))
    x = 2.0 * rng.standard_normal(4)
    center = circumcenter_map(operator_set, x)
    images = np.array([op(x) for op in operator_set.ops])
    dists = np.linalg.norm(images - center, axis=1)
    assert float(dists.max() - dists.min()) < 1e-8 * (1.0 + float(dists.max()))


@given(st.integers(0, 10**6))
def test_circumcenter_map_translation_identity(seed):
    """C(x) = z + C_shifted(x - z) for any common fixed point z."""
    rng = np.random.default_rng(seed)
    linear_family = random_family(rng, 4, 2, 1, 3)
    z = rng.standard_normal(4)
    anchored = [AffineSubspace.from_span(z + s.anchor, s.basis) for s in linear_family]
    operator_set = OperatorSet.build([make_reflector(s) for s in anchored])
    assert operator_set.common_fixed.contains(z)
    shifted = shift_operator_set(operator_set, z)
    x = rng.standard_normal(4) * 2.0
    direct = circumcenter_map(operator_set, x)
    via_shift = z + circumcenter_map(shifted, x - z)
    assert np.allclose(direct, via_shift, atol=1e-8 * (1.0 + np.linalg.norm(x)))


def test_shift_operator_set_rejects_non_fixed_point():
    operator_set = build_psi(reflectors_of([LINE_X, LINE_DIAG]))
    with pytest.raises(ValueError):
        shift_operator_set(operator_set, np.array([1.0, 0.0]))


@given(st.integers(0, 10**6))
def test_pythagoras_identity_at_the_circumcenter(seed):
    """||x - z||^2 splits into ||Cx - z||^2 + ||x - Cx||^2 for fixed z."""
    rng = np.random.default_rng(seed)
    family = random_family(rng, 5, 2, 2, 4)
    operator_set = build_psi(reflectors_of(family))
    common = operator_set.common_fixed
    z = common.project(3.0 * rng.standard_normal(5))
    x = 2.0 * rng.standard_normal(5)
    center = circumcenter_map(operator_set, x)
    lhs = np.linalg.norm(center - z) ** 2 + np.linalg.norm(center - x) ** 2
    rhs = np.linalg.norm(x - z) ** 2
    assert abs(lhs - rhs) < 1e-8 * (1.0 + rhs), f"split {lhs} vs direct {rhs}"
