"""Geometry primitives on the three model spaces."""

import math

import numpy as np
import pytest

from geowalk import (
    AmbiguousCutLocusError,
    ManifoldPoint,
    ModelSpace,
    TangentVector,
    distance,
    exp_map,
    log_map,
    metric_inner,
    orthonormal_frame,
    parallel_transport,
    sample_unit_direction,
)
from geowalk.spaces import minkowski_inner

EUCLID2 = ModelSpace.euclidean(2)
EUCLID3 = ModelSpace.euclidean(3)
HYP2 = ModelSpace.hyperbolic(2, curvature_scale=1.0)
HYP3 = ModelSpace.hyperbolic(3, curvature_scale=0.7)
TORUS2 = ModelSpace.flat_torus((2.0 * math.pi, 2.0 * math.pi))
TORUS3 = ModelSpace.flat_torus((5.0, 3.0, 7.0))

ALL_SPACES = [EUCLID2, EUCLID3, HYP2, HYP3, TORUS2, TORUS3]


def random_point(space, rng, spread=1.0):
    if space.kind == "euclidean":
        return ManifoldPoint(space, spread * rng.standard_normal(space.dim))
    if space.kind == "flat_torus":
        return ManifoldPoint(space, rng.uniform(0, 1, space.dim) * np.asarray(space.periods))
    x = space.origin()
    v = sample_unit_direction(space, x, rng)
    return exp_map(space, x, v, spread * rng.uniform(0.1, 1.0))


def random_unit(space, x, rng):
    return sample_unit_direction(space, x, rng)


# ---------------------------------------------------------------------------
# constructors and validation

def test_constructor_validation():
    with pytest.raises(ValueError):
        ModelSpace("spherical", 2)
    with pytest.raises(ValueError):
        ModelSpace.euclidean(1)
    with pytest.raises(ValueError):
        ModelSpace.hyperbolic(2, curvature_scale=0.0)
    with pytest.raises(ValueError):
        ModelSpace.hyperbolic(2, curvature_scale=-1.0)
    with pytest.raises(ValueError):
        ModelSpace.flat_torus(())
    with pytest.raises(ValueError):
        ModelSpace.flat_torus((1.0, -2.0))


def test_ambient_dim_and_origin():
    assert EUCLID3.ambient_dim == 3
    assert TORUS3.ambient_dim == 3
    assert HYP2.ambient_dim == 3
    o = HYP3.origin()
    assert o.coords[0] == pytest.approx(1.0 / 0.7)
    assert np.all(o.coords[1:] == 0.0)
    q = minkowski_inner(o.coords, o.coords)
    assert q == pytest.approx(-1.0 / 0.7**2, rel=1e-14)


def test_point_and_vector_shape_validation():
    with pytest.raises(ValueError):
        ManifoldPoint(EUCLID2, np.zeros(3))
    x = EUCLID2.origin()
    with pytest.raises(ValueError):
        TangentVector(x, np.zeros(5))


def test_describe_roundtrip_fields():
    assert EUCLID2.describe() == {"kind": "euclidean", "dim": 2}
    assert HYP2.describe()["curvature_scale"] == 1.0
    assert TORUS3.describe()["periods"] == [5.0, 3.0, 7.0]


# ---------------------------------------------------------------------------
# exponential map

def test_exp_euclidean_unit_step():
    x = ManifoldPoint(EUCLID2, np.zeros(2))
    v = TangentVector(x, np.array([1.0, 0.0]))
    y = exp_map(EUCLID2, x, v, 1.0)
    assert np.allclose(y.coords, [1.0, 0.0])


def test_exp_rejects_negative_time_and_non_unit():
    x = EUCLID2.origin()
    v = TangentVector(x, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        exp_map(EUCLID2, x, v, -0.5)
    w = TangentVector(x, np.array([2.0, 0.0]))
    with pytest.raises(ValueError):
        exp_map(EUCLID2, x, w, 1.0)


def test_exp_rejects_foreign_base_point():
    x = EUCLID2.origin()
    z = ManifoldPoint(EUCLID2, np.array([1.0, 1.0]))
    v = TangentVector(z, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        exp_map(EUCLID2, x, v, 1.0)


def test_exp_torus_wraps_into_fundamental_domain():
    x = ManifoldPoint(TORUS3, np.array([4.5, 2.5, 6.5]))
    v = TangentVector(x, np.array([1.0, 0.0, 0.0]))
    y = exp_map(TORUS3, x, v, 1.0)
    assert np.allclose(y.coords, [0.5, 2.5, 6.5])


def test_exp_hyperbolic_closed_form():
    x = HYP2.origin()
    v = TangentVector(x, np.array([0.0, 1.0, 0.0]))
    y = exp_map(HYP2, x, v, 2.0)
    assert np.allclose(y.coords, [math.cosh(2.0), math.sinh(2.0), 0.0], atol=1e-14)


@pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: f"{s.kind}{s.dim}")
def test_distance_along_geodesic_equals_time(space):
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = random_point(space, rng)
        v = random_unit(space, x, rng)
        t = rng.uniform(0.05, 1.2)  # below torus injectivity radius
        y = exp_map(space, x, v, t)
        assert distance(space, x, y) == pytest.approx(t, abs=1e-12)


# ---------------------------------------------------------------------------
# logarithm

def test_log_euclidean_example():
    x = ManifoldPoint(EUCLID2, np.zeros(2))
    y = ManifoldPoint(EUCLID2, np.array([3.0, 4.0]))
    v = log_map(EUCLID2, x, y)
    assert np.allclose(v.components, [3.0, 4.0])
    assert np.linalg.norm(v.components) == pytest.approx(5.0)


@pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: f"{s.kind}{s.dim}")
def test_log_inverts_exp(space):
    rng = np.random.default_rng(7)
    for _ in range(25):
        x = random_point(space, rng)
        v = random_unit(space, x, rng)
        t = rng.uniform(0.05, 1.2)
        y = exp_map(space, x, v, t)
        back = log_map(space, x, y)
        assert np.allclose(back.components, t * v.components, atol=1e-10)


def test_log_torus_minimal_displacement():
    x = ManifoldPoint(TORUS3, np.array([0.5, 0.5, 0.5]))
    y = ManifoldPoint(TORUS3, np.array([4.6, 2.6, 6.6]))
    v = log_map(TORUS3, x, y)
    # periods (5, 3, 7): going backwards is shorter in every coordinate
    assert np.allclose(v.components, [-0.9, -0.9, -0.9], atol=1e-12)


def test_log_torus_cut_locus_tie_raises():
    x = ManifoldPoint(TORUS2, np.zeros(2))
    y = ManifoldPoint(TORUS2, np.array([math.pi, 0.1]))  # exactly half a period
    with pytest.raises(AmbiguousCutLocusError):
        log_map(TORUS2, x, y)


# ---------------------------------------------------------------------------
# distance

def test_distance_euclidean_example():
    x = ManifoldPoint(EUCLID2, np.zeros(2))
    y = ManifoldPoint(EUCLID2, np.array([1.0, 1.0]))
    assert distance(EUCLID2, x, y) == pytest.approx(math.sqrt(2.0))


@pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: f"{s.kind}{s.dim}")
def test_distance_metric_axioms(space):
    rng = np.random.default_rng(3)
    for _ in range(15):
        x = random_point(space, rng)
        y = random_point(space, rng)
        dxy = distance(space, x, y)
        assert dxy >= 0.0
        assert distance(space, y, x) == pytest.approx(dxy, abs=1e-12)
        assert distance(space, x, x) == pytest.approx(0.0, abs=1e-12)


def test_distance_hyperbolic_matches_acosh_form():
    rng = np.random.default_rng(5)
    a = HYP3.curvature_scale
    for _ in range(20):
        x = random_point(HYP3, rng, spread=2.0)
        y = random_point(HYP3, rng, spread=2.0)
        naive = math.acosh(max(1.0, -a * a * minkowski_inner(x.coords, y.coords))) / a
        assert distance(HYP3, x, y) == pytest.approx(naive, abs=1e-9)


def test_distance_hyperbolic_accurate_for_close_points():
    # the acosh form loses half the digits here; the asinh form must not
    x = HYP2.origin()
    v = TangentVector(x, np.array([0.0, 1.0, 0.0]))
    t = 1e-8
    y = exp_map(HYP2, x, v, t)
    assert distance(HYP2, x, y) == pytest.approx(t, rel=1e-9)


# ---------------------------------------------------------------------------
# parallel transport

@pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: f"{s.kind}{s.dim}")
def test_transport_preserves_inner_products(space):
    rng = np.random.default_rng(13)
    for _ in range(15):
        x = random_point(space, rng)
        direction = random_unit(space, x, rng)
        u = random_unit(space, x, rng)
        w = random_unit(space, x, rng)
        t = rng.uniform(0.1, 2.0)
        before = metric_inner(space, x, u, w)
        ut = parallel_transport(space, x, direction, t, u)
        wt = parallel_transport(space, x, direction, t, w)
        y = exp_map(space, x, direction, t)
        after = metric_inner(space, y, ut, wt)
        assert after == pytest.approx(before, abs=1e-10)


def test_transport_carries_direction_to_end_velocity():
    rng = np.random.default_rng(17)
    for space in (HYP2, HYP3):
        a = space.curvature_scale
        for _ in range(10):
            x = random_point(space, rng)
            v = random_unit(space, x, rng)
            t = rng.uniform(0.1, 2.0)
            vt = parallel_transport(space, x, v, t, v)
            # geodesic velocity at time t: a sinh(at) x + cosh(at) v
            expected = (a * math.sinh(a * t)) * x.coords \
                + math.cosh(a * t) * v.components
            assert np.allclose(vt.components, expected, atol=1e-10)


def test_transport_fixes_orthogonal_complement():
    rng = np.random.default_rng(19)
    x = random_point(HYP3, rng)
    v = random_unit(HYP3, x, rng)
    u = random_unit(HYP3, x, rng)
    # remove the component along v: the rest must come back unchanged in the
    # complement sense (same components, since span{x, v} is untouched)
    c = metric_inner(HYP3, x, u, v)
    perp = TangentVector(x, u.components - c * v.components)
    moved = parallel_transport(HYP3, x, v, 1.3, perp)
    assert np.allclose(moved.components, perp.components, atol=1e-12)


def test_transport_flat_spaces_identity():
    rng = np.random.default_rng(23)
    for space in (EUCLID3, TORUS3):
        x = random_point(space, rng)
        v = random_unit(space, x, rng)
        u = random_unit(space, x, rng)
        moved = parallel_transport(space, x, v, 5.0, u)
        assert np.array_equal(moved.components, u.components)


# ---------------------------------------------------------------------------
# metric, frames, sampling

def test_metric_euclidean_orthogonality():
    x = EUCLID2.origin()
    u = TangentVector(x, np.array([1.0, 0.0]))
    w = TangentVector(x, np.array([0.0, 1.0]))
    assert metric_inner(EUCLID2, x, u, w) == 0.0


def test_orthonormal_frame_euclidean_is_canonical():
    x = ManifoldPoint(EUCLID3, np.array([2.0, -1.0, 0.5]))
    frame = orthonormal_frame(EUCLID3, x)
    assert np.array_equal(np.array([f.components for f in frame]), np.eye(3))


@pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: f"{s.kind}{s.dim}")
def test_orthonormal_frame_is_orthonormal(space):
    rng = np.random.default_rng(29)
    x = random_point(space, rng)
    frame = orthonormal_frame(space, x)
    assert len(frame) == space.dim
    for i, u in enumerate(frame):
        for j, w in enumerate(frame):
            want = 1.0 if i == j else 0.0
            assert metric_inner(space, x, u, w) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("space", ALL_SPACES, ids=lambda s: f"{s.kind}{s.dim}")
def test_sample_unit_direction_is_unit_and_tangent(space):
    rng = np.random.default_rng(31)
    x = random_point(space, rng)
    for _ in range(50):
        v = sample_unit_direction(space, x, rng)
        assert metric_inner(space, x, v, v) == pytest.approx(1.0, abs=1e-12)
        if space.kind == "hyperbolic":
            assert minkowski_inner(v.components, x.coords) == pytest.approx(0.0, abs=1e-12)


def test_sample_unit_direction_is_centered():
    rng = np.random.default_rng(37)
    x = EUCLID2.origin()
    comps = np.array([sample_unit_direction(EUCLID2, x, rng).components
                      for _ in range(4000)])
    assert np.all(np.abs(comps.mean(axis=0)) < 0.05)


# ---------------------------------------------------------------------------
# long-run constraint stability

def test_hyperboloid_constraint_drift_over_chained_operations():
    rng = np.random.default_rng(41)
    space, a = HYP2, HYP2.curvature_scale
    x = space.origin()
    u = sample_unit_direction(space, x, rng)
    for _ in range(1000):
        v = sample_unit_direction(space, x, rng)
        t = rng.uniform(0.05, 0.5)
        u = parallel_transport(space, x, v, t, u)
        x = exp_map(space, x, v, t)
    q = minkowski_inner(x.coords, x.coords)
    assert abs(q + 1.0 / a**2) < 1e-9
    assert abs(minkowski_inner(u.components, x.coords)) < 1e-9
    assert metric_inner(space, x, u, u) == pytest.approx(1.0, abs=1e-9)
