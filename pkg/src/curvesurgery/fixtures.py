"""Seeded fixture generators for tests and demos.

Everything here is deterministic in the seed and stamped with
FIXTURE_VERSION; property tests freeze seeds so regenerated fixtures stay
bit-identical.
"""

from __future__ import annotations

import numpy as np

from .curves import PiecewiseGeodesicCurve, from_vertices
from .flows import EdgeFlow
from .spaces import EuclideanSpace, GeodesicSpace

FIXTURE_VERSION = 1


def _dedupe(pts: np.ndarray) -> np.ndarray:
    keep = [pts[0]]
    for p in pts[1:]:
        if not np.array_equal(p, keep[-1]):
            keep.append(p)
    return np.asarray(keep)


def random_polygon(seed: int, n: int, space: GeodesicSpace | None = None,
                   closed: bool = True) -> PiecewiseGeodesicCurve:
    """n i.i.d. uniform vertices in [0,1]^dim (generally self-intersecting)."""
    space = space or EuclideanSpace(2)
    rng = np.random.default_rng(seed)
    pts = _dedupe(rng.random((n, space.dim)))
    return from_vertices(space, pts, closed)


def random_walk_loop(seed: int, n: int, step: float = 0.05,
                     space: GeodesicSpace | None = None) -> PiecewiseGeodesicCurve:
    """Closed Gaussian random walk; heavy self-intersection at all scales."""
    space = space or EuclideanSpace(2)
    rng = np.random.default_rng(seed)
    pts = np.cumsum(rng.normal(size=(n, space.dim)) * step, axis=0)
    pts -= pts.mean(axis=0)
    return from_vertices(space, _dedupe(pts), True)


def smooth_loop(seed: int, n: int, harmonics: int = 5,
                wobble: float = 0.25) -> PiecewiseGeodesicCurve:
    """Random trigonometric loop: a star-shaped polygon with mild noise."""
    rng = np.random.default_rng(seed)
    theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    r = np.ones_like(theta)
    for k in range(1, harmonics + 1):
        amp = wobble * rng.standard_normal() / k
        phase = 2 * np.pi * rng.random()
        r += amp * np.cos(k * theta + phase)
    r = np.maximum(r, 0.1)
    pts = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    return from_vertices(EuclideanSpace(2), _dedupe(pts), True)


def zigzag_fixture(n_small: int = 5, small: float = 0.1,
                   amplitude: float = 0.08) -> PiecewiseGeodesicCurve:
    """Closed curve with n_small consecutive short edges inside one window."""
    pts = [(0.0, 0.0), (1.0, 0.0)]
    x = 1.0
    for i in range(n_small):
        x += small
        pts.append((x, amplitude if i % 2 == 0 else 0.0))
    pts += [(x + 1.0, amplitude if pts[-1][1] == 0.0 else 0.0),
            (x + 1.0, 1.0), (0.0, 1.0)]
    return from_vertices(EuclideanSpace(2), pts, True)


def slit_rectangle(width: float = 10.0, height: float = 0.01) -> PiecewiseGeodesicCurve:
    return from_vertices(EuclideanSpace(2),
                         [(0.0, 0.0), (width, 0.0), (width, height), (0.0, height)],
                         True)


def doubled_segment(length: float = 1.0) -> PiecewiseGeodesicCurve:
    return from_vertices(EuclideanSpace(2), [(0.0, 0.0), (length, 0.0)], True)


def unit_square(space: GeodesicSpace | None = None) -> PiecewiseGeodesicCurve:
    return from_vertices(space or EuclideanSpace(2),
                         [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)], True)


def random_flow(seed: int, n_nodes: int = 40, n_cycles: int = 6,
                space: GeodesicSpace | None = None) -> EdgeFlow:
    """Union of weighted random simple cycles on shared random nodes."""
    space = space or EuclideanSpace(2)
    rng = np.random.default_rng(seed)
    nodes = rng.random((n_nodes, space.dim))
    flows: dict[tuple[int, int], float] = {}
    for _ in range(n_cycles):
        k = int(rng.integers(3, min(9, n_nodes)))
        cyc = rng.choice(n_nodes, size=k, replace=False)
        w = float(rng.uniform(0.2, 2.0))
        for u, v in zip(cyc, np.roll(cyc, -1)):
            flows[(int(u), int(v))] = flows.get((int(u), int(v)), 0.0) + w
    # drop nodes that ended up unused and reindex
    used = sorted({i for e in flows for i in e})
    remap = {old: new for new, old in enumerate(used)}
    edges = tuple((remap[i], remap[j], f)
                  for (i, j), f in sorted(flows.items()) if f != 0.0)
    return EdgeFlow(space, tuple(tuple(p) for p in nodes[used]), edges)
