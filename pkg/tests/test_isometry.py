import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circumproj import (
    AffineIsometry,
    AffineMap,
    AveragedSpec,
    AffineSubspace,
    accelerated_apply,
    build_product_averaged,
    build_sum_averaged,
    compose,
    fixed_point_set,
    identity,
    intersect,
    is_nonexpansive,
    is_normal,
    is_self_adjoint,
    linearize_about,
    make_orthogonal,
    make_reflector,
    make_translation,
    operator_from_literal,
    symmetric_map_operator,
)
from helpers import random_family, random_linear_subspace, reflectors_of

LINE_X = AffineSubspace.linear([[1.0, 0.0]])
LINE_DIAG = AffineSubspace.linear([[1.0, 1.0]])
LINE_Y = AffineSubspace.linear([[0.0, 1.0]])


def test_make_reflector_frozen_horizontal_line():
    """Reflecting about the line y = 1 is x -> (x1, 2 - x2)."""
    line = AffineSubspace.from_span([0.0, 1.0], [[1.0, 0.0]])
    reflector = make_reflector(line)
    assert np.allclose(reflector.Q, np.diag([1.0, -1.0]), atol=1e-12)
    assert np.allclose(reflector.b, [0.0, 2.0], atol=1e-12)
    assert np.allclose(reflector([3.0, 5.0]), [3.0, -3.0], atol=1e-12)


def test_compose_frozen_two_axis_reflectors_give_point_reflection():
    product = compose(make_reflector(LINE_Y), make_reflector(LINE_X))
    assert np.allclose(product.Q, -np.eye(2), atol=1e-12)
    assert np.allclose(product.b, 0.0, atol=1e-12)


def test_compose_applies_first_argument_last():
    shift = make_translation([1.0, 0.0])
    flip = make_reflector(LINE_Y)
    # flip after shift: (0,0) -> (1,0) -> (-1,0)
    assert np.allclose(compose(flip, shift)([0.0, 0.0]), [-1.0, 0.0])
    # shift after flip: (0,0) -> (0,0) -> (1,0)
    assert np.allclose(compose(shift, flip)([0.0, 0.0]), [1.0, 0.0])


def test_affine_isometry_rejects_non_orthogonal_linear_part():
    with pytest.raises(ValueError):
        AffineIsometry(Q=np.array([[1.0, 0.5], [0.0, 1.0]]), b=np.zeros(2))


def test_fixed_point_set_frozen_cases():
    rotation = make_orthogonal([[0.0, -1.0], [1.0, 0.0]])
    fixed = fixed_point_set(rotation)
    assert fixed is not None and fixed.dim == 0
    assert np.allclose(fixed.anchor, [0.0, 0.0], atol=1e-10)

    assert fixed_point_set(make_translation([1.0, 0.0])) is None

    everything = fixed_point_set(identity(3))
    assert everything.dim == 3


def test_fixed_point_set_of_reflector_is_the_subspace():
    rng = np.random.default_rng(7)
    sub = AffineSubspace.from_span(rng.standard_normal(4), rng.standard_normal((2, 4)))
    fixed = fixed_point_set(make_reflector(sub))
    assert fixed.dim == sub.dim
    assert np.allclose(fixed.projector_matrix(), sub.projector_matrix(), atol=1e-9)
    assert sub.contains(fixed.anchor)


@given(st.integers(0, 10**6))
def test_projector_is_half_identity_plus_reflector(seed):
    """P_U x = (x + R_U x) / 2 for every linear subspace."""
    rng = np.random.default_rng(seed)
    ambient = int(rng.integers(2, 6))
    sub = random_linear_subspace(rng, ambient, int(rng.integers(1, ambient)))
    reflector = make_reflector(sub)
    x = rng.standard_normal(ambient) * 2.0
    assert np.allclose(0.5 * (x + reflector(x)), sub.project(x), atol=1e-10)


@given(st.integers(0, 10**6))
def test_fixed_space_of_reflector_product_decomposes(seed):
    """Fix(R2 R1) is the orthogonal sum of U1 cap U2 and U1perp cap U2perp."""
    rng = np.random.default_rng(seed)
    ambient = int(rng.integers(2, 6))
    u1 = random_linear_subspace(rng, ambient, int(rng.integers(1, ambient)))
    u2 = random_linear_subspace(rng, ambient, int(rng.integers(1, ambient)))
    product = compose(make_reflector(u2), make_reflector(u1))
    fixed = fixed_point_set(product)
    assert fixed is not None

    inner = intersect([u1, u2]).subspace
    outer = intersect([u1.orthogonal_complement(), u2.orthogonal_complement()]).subspace
    combined = inner.projector_matrix() + outer.projector_matrix()
    assert np.allclose(fixed.projector_matrix(), combined, atol=1e-8), (
        "fixed space of the reflector product should split into the"
        " intersection plus the intersection of complements"
    )


def test_linearize_about_matches_original_action():
    line = AffineSubspace.from_span([0.0, 1.0], [[1.0, 0.0]])
    reflector = make_reflector(line)
    z = np.array([5.0, 1.0])  # a point of the line, hence fixed
    linear = linearize_about(reflector, z)
    assert np.allclose(linear.b, 0.0, atol=1e-12)
    x = np.array([2.0, 3.0])
    assert np.allclose(linear(x - z) + z, reflector(x), atol=1e-10)


def test_linearize_about_rejects_moving_point():
    reflector = make_reflector(AffineSubspace.from_span([0.0, 1.0], [[1.0, 0.0]]))
    with pytest.raises(ValueError):
        linearize_about(reflector, np.array([0.0, 0.0]))


def test_averaged_spec_validation():
    with pytest.raises(ValueError):
        AveragedSpec(weights=(0.5, 0.6), alphas=(0.5, 0.5))
    with pytest.raises(ValueError):
        AveragedSpec(weights=(1.0,), alphas=(1.5,))
    spec = AveragedSpec.uniform(4)
    assert len(spec.weights) == 4
    assert abs(sum(spec.weights) - 1.0) < 1e-12


def test_build_sum_averaged_frozen_45_degrees():
    ops = reflectors_of([LINE_X, LINE_DIAG])
    avg = build_sum_averaged(AveragedSpec.uniform(2), ops)
    assert np.allclose(avg.A, [[0.75, 0.25], [0.25, 0.25]], atol=1e-12)
    assert abs(avg.averagedness - 0.5) < 1e-12
    fixed = fixed_point_set(avg)
    assert fixed.dim == 0 and np.allclose(fixed.anchor, 0.0, atol=1e-10)


def test_build_product_averaged_frozen_45_degrees():
    # By the documented recipe with uniform weights: the first piece is
    # (I + R_x) / 2 = P_x, the second is I/2 + ((I + R_diag)/2 @ R_x) / 2,
    # which is [[0.75, -0.25], [0.25, 0.25]], and their mean is the matrix
    # below.
    ops = reflectors_of([LINE_X, LINE_DIAG])
    avg = build_product_averaged(AveragedSpec.uniform(2), ops)
    assert np.allclose(avg.A, [[0.875, -0.125], [0.125, 0.125]], atol=1e-12)
    fixed = fixed_point_set(avg)
    assert fixed.dim == 0


@given(st.integers(0, 10**6))
def test_averaged_builders_fix_exactly_the_common_fixed_space(seed):
    rng = np.random.default_rng(seed)
    family = random_family(rng, 5, int(rng.integers(1, 4)), 1, 4)
    ops = reflectors_of(family)
    common = intersect(family).subspace
    for builder in (build_sum_averaged, build_product_averaged):
        avg = builder(AveragedSpec.uniform(len(ops)), ops)
        fixed = fixed_point_set(avg)
        assert fixed is not None
        assert np.allclose(fixed.projector_matrix(), common.projector_matrix(),
                           atol=1e-8), f"{builder.__name__} fixed space mismatch"
        assert is_nonexpansive(avg)


def test_accelerated_apply_exact_after_one_product_step():
    """From a point of a single eigenline the accelerated step lands exactly."""
    op = symmetric_map_operator([LINE_X, LINE_DIAG])
    x0 = np.array([0.3, 0.9])
    y = op.A @ x0
    landed = accelerated_apply(op, y)
    assert np.linalg.norm(landed) < 1e-14, f"expected the origin, got {landed}"


def test_accelerated_apply_requires_linear_nonexpansive():
    with pytest.raises(ValueError):
        accelerated_apply(AffineMap(A=np.eye(2), b=np.array([1.0, 0.0])), np.zeros(2))
    with pytest.raises(ValueError):
        accelerated_apply(AffineMap(A=2.0 * np.eye(2), b=np.zeros(2)), np.ones(2))


def test_accelerated_apply_returns_fixed_points_unchanged():
    op = symmetric_map_operator([LINE_X, LINE_DIAG])
    assert np.allclose(accelerated_apply(op, np.zeros(2)), np.zeros(2))


def test_predicates():
    reflector = make_reflector(LINE_DIAG)
    assert is_self_adjoint(reflector)
    assert is_nonexpansive(reflector)
    assert is_normal(reflector)
    rotation = make_orthogonal([[0.0, -1.0], [1.0, 0.0]])
    assert not is_self_adjoint(rotation)
    assert is_normal(rotation)
    assert not is_nonexpansive(AffineMap(A=2.0 * np.eye(2), b=np.zeros(2)))


def test_operator_from_literal_kinds():
    reflector = operator_from_literal(
        {"kind": "reflector", "subspace": {"anchor": [0.0, 1.0], "span": [[1.0, 0.0]]}}
    )
    assert np.allclose(reflector.Q, np.diag([1.0, -1.0]), atol=1e-12)
    assert np.allclose(reflector.b, [0.0, 2.0], atol=1e-12)

    shift = operator_from_literal({"kind": "translation", "offset": [1.0, 2.0]})
    assert np.allclose(shift([0.0, 0.0]), [1.0, 2.0])

    rot = operator_from_literal({"kind": "orthogonal", "matrix": [[0.0, -1.0], [1.0, 0.0]]})
    assert np.allclose(rot([1.0, 0.0]), [0.0, 1.0])

    # first factor acts first
    composed = operator_from_literal({
        "kind": "compose",
        "factors": [
            {"kind": "translation", "offset": [1.0, 0.0]},
            {"kind": "orthogonal", "matrix": [[-1.0, 0.0], [0.0, 1.0]]},
        ],
    })
    assert np.allclose(composed([0.0, 0.0]), [-1.0, 0.0])

    with pytest.raises(ValueError):
        operator_from_literal({"kind": "mystery"})
    with pytest.raises(ValueError):
        operator_from_literal({"kind": "compose", "factors": []})


@given(st.integers(0, 10**6))
def test_isometries_preserve_distances(seed):
    rng = np.random.default_rng(seed)
    ambient = int(rng.integers(2, 6))
    sub = random_linear_subspace(rng, ambient, int(rng.integers(1, ambient)))
    iso = compose(make_reflector(sub), make_translation(rng.standard_normal(ambient)))
    x = rng.standard_normal(ambient)
    y = rng.standard_normal(ambient)
    assert abs(np.linalg.norm(iso(x) - iso(y)) - np.linalg.norm(x - y)) < 1e-10
