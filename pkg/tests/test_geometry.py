import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hausdorff_entropy.exceptions import ContractViolation, SizeLimitError
from hausdorff_entropy.geometry import (
    CIRCLE,
    INTERVAL,
    SpaceSpec,
    distance,
    grid,
    pairwise_distance,
)

I1 = SpaceSpec.of(INTERVAL)
C1 = SpaceSpec.of(CIRCLE)
IC = SpaceSpec.of(INTERVAL, CIRCLE)

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_interval_endpoints():
    assert distance(I1, [0.0], [1.0]) == 1.0


def test_circle_wraps():
    assert distance(C1, [0.1], [0.9]) == pytest.approx(0.2, abs=1e-15)


def test_product_is_max_metric():
    assert distance(IC, [0.0, 0.1], [0.3, 0.9]) == pytest.approx(0.3, abs=1e-15)


def test_dimension_mismatch_rejected():
    with pytest.raises(ContractViolation):
        distance(IC, [0.0], [0.3, 0.9])


def test_empty_space_rejected():
    with pytest.raises(ContractViolation):
        SpaceSpec(())
    with pytest.raises(ContractViolation):
        SpaceSpec.of("torus")


def test_grid_examples():
    np.testing.assert_array_equal(grid(I1, 0.5)[:, 0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(grid(C1, 0.25)[:, 0], [0.0, 0.25, 0.5, 0.75])
    assert len(grid(SpaceSpec.of(INTERVAL, INTERVAL), 0.5)) == 9


def test_grid_is_lexicographic():
    g = grid(IC, (0.25, 0.5))
    order = np.lexsort(g.T[::-1])
    np.testing.assert_array_equal(order, np.arange(len(g)))


def test_grid_cap():
    with pytest.raises(SizeLimitError):
        grid(SpaceSpec.of(INTERVAL, INTERVAL), 1e-4, max_points=10_000)


def test_grid_bad_resolution():
    with pytest.raises(ContractViolation):
        grid(I1, 0.0)


def test_canonical_circle_storage():
    pts = C1.canonicalize([[-1e-20], [1.25], [-0.25]])
    assert np.all((pts >= 0) & (pts < 1))
    np.testing.assert_allclose(pts[:, 0], [0.0, 0.25, 0.75])


def test_interval_out_of_range_rejected():
    with pytest.raises(ContractViolation):
        I1.canonicalize([[1.5]])


def test_diameter():
    assert I1.diameter == 1.0 and C1.diameter == 0.5 and IC.diameter == 1.0


@given(st.tuples(unit, unit, unit, unit, unit, unit))
def test_metric_axioms(v):
    a, b, c = np.array(v[0:2]), np.array(v[2:4]), np.array(v[4:6])
    a, b, c = (IC.canonicalize(p) for p in (a, b, c))
    ab, ba = distance(IC, a, b), distance(IC, b, a)
    assert ab == ba
    assert (ab == 0) == bool(np.all(a == b))
    assert distance(IC, a, c) <= ab + distance(IC, b, c) + 1e-12
    assert distance(C1, a[1:], b[1:]) <= 0.5


@given(st.floats(0.01, 1.0), st.lists(unit, min_size=1, max_size=20))
def test_random_points_near_grid(res, xs):
    for space in (I1, C1):
        g = grid(space, res)
        pts = space.canonicalize(np.array(xs)[:, None])
        nearest = pairwise_distance(space, pts, g).min(axis=1)
        assert np.all(nearest <= res / 2 + 1e-12)
