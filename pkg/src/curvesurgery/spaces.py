"""Geodesic metric spaces with canonical geodesic selection.

Two concrete instances are provided: Euclidean R^n and the taxicab plane
(R^2 with the l1 metric).  Every space knows how to measure distances,
produce a canonical geodesic between two points, and decompose geodesic
edges into "primitive" straight pieces that the numeric kernels
(ball masses, segment distances) can vectorize over.

Points are plain tuples of floats.  A geodesic edge is straight in the
Euclidean case; in the taxicab plane it is the canonical L-path that moves
along the x-axis first, starting from the lexicographically smaller
endpoint.  That convention makes the geodesic map deterministic and
reversal-consistent: the edge from q to p traverses the same point set as
the edge from p to q, backwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

Point = tuple[float, ...]


def as_point(coords) -> Point:
    p = tuple(float(c) for c in coords)
    if not all(np.isfinite(c) for c in p):
        raise ValueError(f"non-finite coordinates: {p}")
    return p


class GeodesicSpace:
    """Base class; subclasses implement the metric and canonical geodesics.

    Primitive segments: each geodesic edge decomposes into at most
    ``max_prims_per_edge`` pieces on which arc length is an isometry onto a
    straight segment (in the space's own metric).  Primitives are stored as
    rows ``[start..., end...]`` of width ``2*dim``.
    """

    dim: int
    max_prims_per_edge: int = 1

    def distance(self, p: Point, q: Point) -> float:
        raise NotImplementedError

    def geodesic_point(self, p: Point, q: Point, t: float, length: float) -> Point:
        """Point at arc length t along the canonical geodesic from p to q."""
        raise NotImplementedError

    def edge_prims(self, p: Point, q: Point) -> list[tuple[Point, Point]]:
        """Decompose the canonical geodesic from p to q into primitives."""
        raise NotImplementedError

    # -- vectorized kernels over primitive arrays -------------------------
    # prims: (P, 2*dim) array; centers: (dim,) or (C, dim); radii arrays.

    def prim_chord_measures(self, prims: np.ndarray, center: np.ndarray,
                            radii: np.ndarray) -> np.ndarray:
        """(P, R) arc-length measure of {t : d(center, prim(t)) <= r}."""
        raise NotImplementedError

    def chord_measures_many(self, prims: np.ndarray, centers: np.ndarray,
                            radii: np.ndarray) -> np.ndarray:
        """(C, P) chord measures for paired centers (C, dim) and radii (C,)."""
        raise NotImplementedError

    def point_prim_dist(self, centers: np.ndarray, prims: np.ndarray) -> np.ndarray:
        """(C, P) min distance from each center to each primitive."""
        raise NotImplementedError

    def prim_pair_dist(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Elementwise min distance between paired primitives (rows)."""
        raise NotImplementedError

    def rect_dist(self, alo, ahi, blo, bhi) -> np.ndarray:
        """Min distance between axis-aligned boxes (rowwise)."""
        raise NotImplementedError

    def rect_halfwidth(self, lo, hi) -> np.ndarray:
        """Max distance from box center to any point of the box (rowwise)."""
        raise NotImplementedError

    def check_point(self, p: Point) -> Point:
        if len(p) != self.dim:
            raise ValueError(f"point {p} has dimension {len(p)}, space expects {self.dim}")
        return p

    def descriptor(self) -> dict:
        raise NotImplementedError


def _seg_points(prims: np.ndarray, dim: int):
    return prims[..., :dim], prims[..., dim:]


@dataclass(frozen=True)
class EuclideanSpace(GeodesicSpace):
    dim: int = 2

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    def distance(self, p: Point, q: Point) -> float:
        if len(p) != self.dim or len(q) != self.dim:
            self.check_point(p), self.check_point(q)
        return sum((b - a) * (b - a) for a, b in zip(p, q)) ** 0.5

    def geodesic_point(self, p: Point, q: Point, t: float, length: float) -> Point:
        if length == 0.0:
            return p
        u = min(max(t / length, 0.0), 1.0)
        return tuple(a + u * (b - a) for a, b in zip(p, q))

    def edge_prims(self, p: Point, q: Point):
        return [(p, q)]

    def prim_chord_measures(self, prims, center, radii):
        a, b = _seg_points(prims, self.dim)
        d = b - a                                   # (P, dim)
        ell = np.linalg.norm(d, axis=-1)            # (P,)
        safe = np.where(ell > 0, ell, 1.0)
        u = d / safe[:, None]
        w = a - np.asarray(center)[None, :]
        beta = np.einsum("pd,pd->p", u, w)          # projection offset
        # squared line distance via the perpendicular component; the naive
        # |w|^2 - beta^2 cancels catastrophically for centers near the line
        perp = w - beta[:, None] * u
        h2 = np.einsum("pd,pd->p", perp, perp)
        r = np.asarray(radii, dtype=float)
        disc = r[None, :] ** 2 - h2[:, None]
        root = np.sqrt(np.maximum(disc, 0.0))
        s_lo = np.maximum(-beta[:, None] - root, 0.0)
        s_hi = np.minimum(-beta[:, None] + root, ell[:, None])
        meas = np.where(disc >= 0.0, np.maximum(s_hi - s_lo, 0.0), 0.0)
        return np.where(ell[:, None] > 0, meas, 0.0)

    def chord_measures_many(self, prims, centers, radii):
        a, b = _seg_points(prims, self.dim)
        d = b - a
        ell = np.linalg.norm(d, axis=-1)
        safe = np.where(ell > 0, ell, 1.0)
        u = d / safe[:, None]
        w = a[None, :, :] - np.asarray(centers)[:, None, :]      # (C, P, dim)
        beta = np.einsum("cpd,pd->cp", w, u)
        perp = w - beta[..., None] * u[None, :, :]
        h2 = np.einsum("cpd,cpd->cp", perp, perp)
        disc = np.asarray(radii)[:, None] ** 2 - h2
        root = np.sqrt(np.maximum(disc, 0.0))
        s_lo = np.maximum(-beta - root, 0.0)
        s_hi = np.minimum(-beta + root, ell[None, :])
        meas = np.where(disc >= 0.0, np.maximum(s_hi - s_lo, 0.0), 0.0)
        return np.where(ell[None, :] > 0, meas, 0.0)

    def point_prim_dist(self, centers, prims):
        a, b = _seg_points(prims, self.dim)
        d = b - a
        ell2 = np.einsum("pd,pd->p", d, d)
        safe = np.where(ell2 > 0, ell2, 1.0)
        w = np.asarray(centers)[:, None, :] - a[None, :, :]      # (C, P, dim)
        t = np.clip(np.einsum("cpd,pd->cp", w, d) / safe, 0.0, 1.0)
        proj = a[None, :, :] + t[..., None] * d[None, :, :]
        return np.linalg.norm(np.asarray(centers)[:, None, :] - proj, axis=-1)

    def prim_pair_dist(self, a, b):
        p1, q1 = _seg_points(np.asarray(a, dtype=float), self.dim)
        p2, q2 = _seg_points(np.asarray(b, dtype=float), self.dim)
        return _seg_seg_dist(p1, q1, p2, q2)

    def rect_dist(self, alo, ahi, blo, bhi):
        gap = np.maximum(np.maximum(blo - ahi, alo - bhi), 0.0)
        return np.linalg.norm(gap, axis=-1)

    def rect_halfwidth(self, lo, hi):
        return 0.5 * np.linalg.norm(np.asarray(hi) - np.asarray(lo), axis=-1)

    def descriptor(self):
        return {"type": "euclidean", "dim": self.dim}


def _seg_seg_dist(p1, q1, p2, q2):
    """Rowwise Euclidean distance between segments [p1,q1] and [p2,q2].

    Standard clamped closed form; degenerate (zero-length) segments are
    handled by the clamping.
    """
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = np.einsum("...d,...d->...", d1, d1)
    e = np.einsum("...d,...d->...", d2, d2)
    f = np.einsum("...d,...d->...", d2, r)
    c = np.einsum("...d,...d->...", d1, r)
    b = np.einsum("...d,...d->...", d1, d2)
    denom = a * e - b * b
    zero = np.zeros_like(a)
    one = np.ones_like(a)
    s = np.where(denom > 0,
                 np.minimum(np.maximum((b * f - c * e) / np.where(denom > 0, denom, 1.0), zero), one),
                 zero)
    # refine s where segments are degenerate
    a_safe = np.where(a > 0, a, 1.0)
    e_safe = np.where(e > 0, e, 1.0)
    t = np.minimum(np.maximum((b * s + f) / e_safe, zero), one)
    t = np.where(e > 0, t, zero)
    s = np.minimum(np.maximum((b * t - c) / a_safe, zero), one)
    s = np.where(a > 0, s, zero)
    diff = (p1 + s[..., None] * d1) - (p2 + t[..., None] * d2)
    return np.sqrt(np.einsum("...d,...d->...", diff, diff))


@dataclass(frozen=True)
class TaxicabPlane(GeodesicSpace):
    """R^2 with the l1 metric and the x-first canonical L-path geodesic."""

    dim: int = 2
    max_prims_per_edge: int = 2

    def distance(self, p: Point, q: Point) -> float:
        self.check_point(p), self.check_point(q)
        return abs(q[0] - p[0]) + abs(q[1] - p[1])

    def _corner(self, p: Point, q: Point) -> Point:
        # corner of the L-path through which the canonical geodesic passes;
        # x moves first from the lexicographically smaller endpoint
        a, b = (p, q) if p <= q else (q, p)
        return (b[0], a[1])

    def geodesic_point(self, p: Point, q: Point, t: float, length: float) -> Point:
        if length == 0.0:
            return p
        c = self._corner(p, q)
        leg1 = self.distance(p, c)
        t = min(max(t, 0.0), length)
        if t <= leg1:
            return _lerp_l1(p, c, t, leg1)
        return _lerp_l1(c, q, t - leg1, length - leg1)

    def edge_prims(self, p: Point, q: Point):
        c = self._corner(p, q)
        prims = []
        if c != p:
            prims.append((p, c))
        if q != c:
            prims.append((c, q))
        return prims or [(p, q)]

    def prim_chord_measures(self, prims, center, radii):
        # primitives are axis-aligned; |x(t)-cx| + |gap| <= r solves linearly
        a, b = _seg_points(prims, self.dim)
        cx, cy = float(center[0]), float(center[1])
        horiz = np.abs(b[:, 1] - a[:, 1]) <= 0.0
        lo = np.where(horiz, np.minimum(a[:, 0], b[:, 0]), np.minimum(a[:, 1], b[:, 1]))
        hi = np.where(horiz, np.maximum(a[:, 0], b[:, 0]), np.maximum(a[:, 1], b[:, 1]))
        cc = np.where(horiz, cx, cy)
        gap = np.where(horiz, np.abs(a[:, 1] - cy), np.abs(a[:, 0] - cx))
        r = np.asarray(radii, dtype=float)
        reach = r[None, :] - gap[:, None]
        left = np.maximum(lo[:, None], cc[:, None] - reach)
        right = np.minimum(hi[:, None], cc[:, None] + reach)
        return np.where(reach >= 0.0, np.maximum(right - left, 0.0), 0.0)

    def chord_measures_many(self, prims, centers, radii):
        a, b = _seg_points(prims, self.dim)
        centers = np.asarray(centers, dtype=float)
        horiz = np.abs(b[:, 1] - a[:, 1]) <= 0.0
        lo = np.where(horiz, np.minimum(a[:, 0], b[:, 0]), np.minimum(a[:, 1], b[:, 1]))
        hi = np.where(horiz, np.maximum(a[:, 0], b[:, 0]), np.maximum(a[:, 1], b[:, 1]))
        fixed = np.where(horiz, a[:, 1], a[:, 0])
        cvar = np.where(horiz[None, :], centers[:, [0]], centers[:, [1]])
        cfix = np.where(horiz[None, :], centers[:, [1]], centers[:, [0]])
        reach = np.asarray(radii)[:, None] - np.abs(cfix - fixed[None, :])
        left = np.maximum(lo[None, :], cvar - reach)
        right = np.minimum(hi[None, :], cvar + reach)
        return np.where(reach >= 0.0, np.maximum(right - left, 0.0), 0.0)

    def point_prim_dist(self, centers, prims):
        a, b = _seg_points(prims, self.dim)
        centers = np.asarray(centers, dtype=float)
        horiz = np.abs(b[:, 1] - a[:, 1]) <= 0.0
        lo = np.where(horiz, np.minimum(a[:, 0], b[:, 0]), np.minimum(a[:, 1], b[:, 1]))
        hi = np.where(horiz, np.maximum(a[:, 0], b[:, 0]), np.maximum(a[:, 1], b[:, 1]))
        fixed = np.where(horiz, a[:, 1], a[:, 0])
        cvar = np.where(horiz[None, :], centers[:, [0]], centers[:, [1]])
        cfix = np.where(horiz[None, :], centers[:, [1]], centers[:, [0]])
        along = np.maximum(np.maximum(lo[None, :] - cvar, cvar - hi[None, :]), 0.0)
        return along + np.abs(cfix - fixed[None, :])

    def prim_pair_dist(self, a, b):
        # both primitives axis-aligned: the l1 distance separates by axis
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ax_lo = np.minimum(a[..., 0], a[..., 2]); ax_hi = np.maximum(a[..., 0], a[..., 2])
        ay_lo = np.minimum(a[..., 1], a[..., 3]); ay_hi = np.maximum(a[..., 1], a[..., 3])
        bx_lo = np.minimum(b[..., 0], b[..., 2]); bx_hi = np.maximum(b[..., 0], b[..., 2])
        by_lo = np.minimum(b[..., 1], b[..., 3]); by_hi = np.maximum(b[..., 1], b[..., 3])
        gx = np.maximum(np.maximum(bx_lo - ax_hi, ax_lo - bx_hi), 0.0)
        gy = np.maximum(np.maximum(by_lo - ay_hi, ay_lo - by_hi), 0.0)
        return gx + gy

    def rect_dist(self, alo, ahi, blo, bhi):
        gap = np.maximum(np.maximum(blo - ahi, alo - bhi), 0.0)
        return np.sum(gap, axis=-1)

    def rect_halfwidth(self, lo, hi):
        return 0.5 * np.sum(np.asarray(hi) - np.asarray(lo), axis=-1)

    def descriptor(self):
        return {"type": "taxicab"}


def _lerp_l1(p: Point, q: Point, t: float, length: float) -> Point:
    if length == 0.0:
        return p
    u = t / length
    return (p[0] + u * (q[0] - p[0]), p[1] + u * (q[1] - p[1]))


@dataclass(frozen=True)
class GeodesicEdge:
    """Canonical geodesic between two points; arc-length parametrized."""

    space: GeodesicSpace
    start: Point
    end: Point

    @cached_property
    def length(self) -> float:
        return self.space.distance(self.start, self.end)

    def point_at(self, t: float) -> Point:
        return self.space.geodesic_point(self.start, self.end, t, self.length)

    def reversed(self) -> "GeodesicEdge":
        return GeodesicEdge(self.space, self.end, self.start)


def geodesic(space: GeodesicSpace, p: Point, q: Point) -> GeodesicEdge:
    p = space.check_point(as_point(p))
    q = space.check_point(as_point(q))
    return GeodesicEdge(space, p, q)


def space_from_descriptor(desc: dict) -> GeodesicSpace:
    kind = desc.get("type")
    if kind == "euclidean":
        return EuclideanSpace(int(desc["dim"]))
    if kind == "taxicab":
        return TaxicabPlane()
    raise ValueError(f"unknown space descriptor: {desc!r}")
