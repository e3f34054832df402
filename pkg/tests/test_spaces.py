import numpy as np
import pytest

from curvesurgery import EuclideanSpace, TaxicabPlane, geodesic


def test_euclidean_distance_examples(e2):
    assert e2.distance((0, 0), (3, 4)) == 5.0
    assert e2.distance((1, 2), (1, 2)) == 0.0


def test_taxicab_distance_examples(taxi):
    assert taxi.distance((0, 0), (1, 2)) == 3.0
    assert taxi.distance((0.5, 0.5), (0.5, 0.5)) == 0.0


def test_dimension_mismatch_raises(e2):
    with pytest.raises(ValueError):
        e2.distance((0, 0, 0), (1, 1))
    with pytest.raises(ValueError):
        geodesic(EuclideanSpace(3), (0, 0), (1, 1))


def test_euclidean_geodesic_is_straight(e2):
    g = geodesic(e2, (0, 0), (1, 1))
    assert g.length == pytest.approx(np.sqrt(2), abs=1e-15)
    assert g.point_at(g.length / 2) == pytest.approx((0.5, 0.5))


def test_taxicab_canonical_l_path(taxi):
    # x moves first from the lexicographically smaller endpoint
    g = geodesic(taxi, (0, 0), (1, 2))
    assert g.length == 3.0
    assert g.point_at(1.0) == (1.0, 0.0)  # the corner
    assert g.point_at(2.0) == (1.0, 1.0)


def test_reversal_traverses_same_points(taxi, e2):
    for space, p, q in [(taxi, (0.0, 0.0), (1.0, 2.0)),
                        (taxi, (2.0, -1.0), (0.5, 3.0)),
                        (e2, (0.0, 0.0), (3.0, 4.0))]:
        g = geodesic(space, p, q)
        gr = geodesic(space, q, p)
        for t in np.linspace(0, g.length, 17):
            a = g.point_at(t)
            b = gr.point_at(g.length - t)
            assert space.distance(a, b) <= 1e-12 * max(g.length, 1.0)


@pytest.mark.parametrize("make_space", [lambda: EuclideanSpace(2),
                                        lambda: EuclideanSpace(4),
                                        TaxicabPlane])
def test_triangle_inequality_random_triples(make_space):
    space = make_space()
    rng = np.random.default_rng(42)
    pts = rng.normal(size=(100_000 + 2, space.dim)) * 3.0
    a, b, c = pts[:-2], pts[1:-1], pts[2:]
    if isinstance(space, TaxicabPlane):
        d = lambda u, v: np.abs(u - v).sum(axis=1)
    else:
        d = lambda u, v: np.linalg.norm(u - v, axis=1)
    lhs = d(a, c)
    rhs = d(a, b) + d(b, c)
    assert np.all(lhs <= rhs * (1 + 4 * np.finfo(float).eps))


@pytest.mark.parametrize("space_pts", [
    (EuclideanSpace(2), (0.0, 0.0), (3.0, 4.0)),
    (EuclideanSpace(3), (1.0, 0.0, 2.0), (-1.0, 2.0, 0.5)),
    (TaxicabPlane(), (0.0, 0.0), (1.0, 2.0)),
    (TaxicabPlane(), (2.0, 5.0), (-1.0, 5.0)),
])
def test_geodesic_isometry_on_sampled_pairs(space_pts):
    space, p, q = space_pts
    g = geodesic(space, p, q)
    rng = np.random.default_rng(7)
    for s, t in rng.random((200, 2)) * g.length:
        d = space.distance(g.point_at(s), g.point_at(t))
        assert abs(d - abs(s - t)) <= 1e-12 * max(g.length, 1.0)


def test_geodesic_endpoints(taxi):
    g = geodesic(taxi, (3.0, 1.0), (0.0, 0.0))
    assert g.point_at(0.0) == (3.0, 1.0)
    assert g.point_at(g.length) == (0.0, 0.0)


def test_zero_length_geodesic(e2):
    g = geodesic(e2, (1.0, 1.0), (1.0, 1.0))
    assert g.length == 0.0
    assert g.point_at(0.0) == (1.0, 1.0)


def test_space_descriptors_roundtrip(e2, taxi):
    from curvesurgery import space_from_descriptor
    assert space_from_descriptor(e2.descriptor()) == e2
    assert space_from_descriptor(taxi.descriptor()) == taxi
    with pytest.raises(ValueError):
        space_from_descriptor({"type": "hyperbolic"})
