"""Arc-length parametrized piecewise-geodesic curves and their algebra.

A curve is an immutable sequence of geodesic edges with matching endpoints,
parametrized by arc length on [0, length].  Closed curves identify the
parameters 0 and length; restriction supports circular wraparound and all
parameters on closed curves are canonicalized to [0, length).
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .spaces import GeodesicEdge, GeodesicSpace, Point, as_point

# relative tolerance for endpoint matching and geodesity checks; drift
# accumulates across repeated cuts, so this is looser than float eps
MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class PiecewiseGeodesicCurve:
    space: GeodesicSpace
    edges: tuple[GeodesicEdge, ...]
    closed: bool
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- basic geometry ----------------------------------------------------

    @property
    def offsets(self) -> np.ndarray:
        off = self._cache.get("offsets")
        if off is None:
            off = np.concatenate([[0.0], np.cumsum([e.length for e in self.edges])])
            self._cache["offsets"] = off
        return off

    @property
    def length(self) -> float:
        return float(self.offsets[-1])

    @property
    def start(self) -> Point:
        return self.edges[0].start

    @property
    def end(self) -> Point:
        return self.edges[-1].end

    def canonical_param(self, t: float) -> float:
        if self.closed:
            t = t % self.length if self.length > 0 else 0.0
        if t < -1e-9 * max(self.length, 1.0) or t > self.length * (1 + 1e-12) + 1e-300:
            raise ValueError(f"parameter {t} outside [0, {self.length}]")
        return min(max(t, 0.0), self.length)

    def point_at(self, t: float) -> Point:
        t = self.canonical_param(t)
        off = self.offsets
        i = bisect.bisect_right(off, t) - 1
        i = min(max(i, 0), len(self.edges) - 1)
        return self.edges[i].point_at(t - off[i])

    def reverse(self) -> "PiecewiseGeodesicCurve":
        rev = tuple(e.reversed() for e in reversed(self.edges))
        return PiecewiseGeodesicCurve(self.space, rev, self.closed)

    # -- vectorized views ---------------------------------------------------

    def prims(self):
        """Primitive straight pieces: (P, 2*dim) rows plus param ranges."""
        cached = self._cache.get("prims")
        if cached is None:
            dim = self.space.dim
            single = self.space.max_prims_per_edge == 1
            rows, lo, hi = [], [], []
            off = self.offsets
            for i, e in enumerate(self.edges):
                elen = off[i + 1] - off[i]
                if elen == 0.0:
                    continue
                if single:
                    rows.append(e.start + e.end)
                    lo.append(off[i])
                    hi.append(off[i + 1])
                    continue
                t0 = off[i]
                for p, q in self.space.edge_prims(e.start, e.end):
                    seg = self.space.distance(p, q)
                    if seg == 0.0:
                        continue
                    rows.append(p + q)
                    lo.append(t0)
                    hi.append(t0 + seg)
                    t0 += seg
            if rows:
                cached = (np.asarray(rows, dtype=float),
                          np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
            else:
                cached = (np.zeros((0, 2 * dim)), np.zeros(0), np.zeros(0))
            self._cache["prims"] = cached
        return cached

    def vertices(self) -> list[Point]:
        pts = [e.start for e in self.edges]
        if not self.closed:
            pts.append(self.edges[-1].end)
        return pts

    def bounding_box(self):
        prims, _, _ = self.prims()
        dim = self.space.dim
        if len(prims) == 0:
            p = np.asarray(self.start)
            return p.copy(), p.copy()
        pts = np.concatenate([prims[:, :dim], prims[:, dim:]])
        return pts.min(axis=0), pts.max(axis=0)

    # -- resolutions ---------------------------------------------------------

    def coarsest_resolution(self) -> np.ndarray:
        """Breakpoints of the maximal greedy merging of consecutive edges.

        A run of edges merges when its total length equals the distance of
        its endpoints (then the whole run is a geodesic).  Merging only at
        edge boundaries; the basepoint of a closed curve is always a
        breakpoint.
        """
        res = self._cache.get("coarsest")
        if res is not None:
            return res
        off = self.offsets
        n = len(self.edges)
        # adjacent-pair mergeability, vectorized; a run can only extend
        # across edge j when the pair (j, j+1) itself merges
        if n > 1:
            starts = np.asarray([e.start for e in self.edges])
            ends = np.asarray([e.end for e in self.edges])
            pair_len = off[2:] - off[:-2]
            if type(self.space).__name__ == "TaxicabPlane":
                pair_d = np.abs(ends[1:] - starts[:-1]).sum(axis=1)
            else:
                diff = ends[1:] - starts[:-1]
                pair_d = np.sqrt(np.einsum("ed,ed->e", diff, diff))
            pair_ok = np.abs(pair_len - pair_d) <= MATCH_RTOL * np.maximum(pair_len, 1e-300)
        else:
            pair_ok = np.zeros(0, dtype=bool)
        if not pair_ok.any():
            res = off.copy()
        else:
            s_pts = [e.start for e in self.edges]
            e_pts = [e.end for e in self.edges]
            breaks = [0.0]
            i = 0
            while i < n:
                j = i
                while j + 1 < n and pair_ok[j]:
                    run_len = off[j + 2] - off[i]
                    if run_len > 0:
                        d = self.space.distance(s_pts[i], e_pts[j + 1])
                        if abs(run_len - d) > MATCH_RTOL * run_len:
                            break
                    j += 1
                breaks.append(float(off[j + 1]))
                i = j + 1
            res = np.asarray(breaks)
        self._cache["coarsest"] = res
        return res

    def edge_count(self) -> int:
        """Number of edges in the coarsest resolution (zero edges pruned)."""
        res = self.coarsest_resolution()
        return int(np.sum(np.diff(res) > 0.0))


# -- constructors -------------------------------------------------------------


def from_vertices(space: GeodesicSpace, vertices, closed: bool) -> PiecewiseGeodesicCurve:
    pts = [space.check_point(as_point(v)) for v in vertices]
    if len(pts) < 2:
        raise ValueError("need at least 2 vertices")
    if closed:
        pts = pts + [pts[0]]
    edges = []
    for p, q in zip(pts[:-1], pts[1:]):
        if space.distance(p, q) == 0.0:
            raise ValueError(f"consecutive duplicate vertex {p}")
        edges.append(GeodesicEdge(space, p, q))
    return PiecewiseGeodesicCurve(space, tuple(edges), closed)


def point_curve(space: GeodesicSpace, p) -> PiecewiseGeodesicCurve:
    """Zero-length closed curve at a single point (padding atom support)."""
    p = space.check_point(as_point(p))
    return PiecewiseGeodesicCurve(space, (GeodesicEdge(space, p, p),), True)


def _sub_edges(curve: PiecewiseGeodesicCurve, a: float, b: float) -> list[GeodesicEdge]:
    """Edges of curve restricted to parameters [a, b], 0 <= a < b <= length."""
    off = curve.offsets
    out = []
    i = max(bisect.bisect_right(off, a) - 1, 0)
    space = curve.space
    while i < len(curve.edges) and off[i] < b:
        e = curve.edges[i]
        lo = max(a, off[i])
        hi = min(b, off[i + 1])
        if hi > lo:
            p = e.start if lo == off[i] else e.point_at(lo - off[i])
            q = e.end if hi == off[i + 1] else e.point_at(hi - off[i])
            if space.distance(p, q) > 0.0:
                out.append(GeodesicEdge(space, p, q))
        i += 1
    return out


def restrict(curve: PiecewiseGeodesicCurve, t: float, t_prime: float) -> PiecewiseGeodesicCurve:
    """Restriction gamma|[t, t'], wrapping around the basepoint when t' < t."""
    if curve.closed:
        t = curve.canonical_param(t)
        t_prime = curve.canonical_param(t_prime)
    if t == t_prime:
        raise ValueError("restrict requires t != t'")
    if t_prime > t:
        edges = _sub_edges(curve, t, t_prime)
    else:
        if not curve.closed:
            raise ValueError("wraparound restriction on an open curve")
        edges = _sub_edges(curve, t, curve.length) + _sub_edges(curve, 0.0, t_prime)
    if not edges:
        raise ValueError("empty restriction")
    return PiecewiseGeodesicCurve(curve.space, tuple(edges), False)


def concatenate(curves) -> PiecewiseGeodesicCurve:
    curves = list(curves)
    if not curves:
        raise ValueError("nothing to concatenate")
    space = curves[0].space
    total = sum(c.length for c in curves)
    tol = MATCH_RTOL * max(total, 1e-300)
    edges: list[GeodesicEdge] = []
    for c in curves:
        if c.space is not space and c.space != space:
            raise ValueError("curves live in different spaces")
        cur = list(c.edges)
        if edges:
            gap = space.distance(edges[-1].end, cur[0].start)
            if gap > tol:
                raise ValueError(f"endpoint mismatch {gap} exceeds tolerance {tol}")
            if gap != 0.0:
                cur[0] = GeodesicEdge(space, edges[-1].end, cur[0].end)
        edges.extend(cur)
    closed = space.distance(edges[-1].end, edges[0].start) <= tol
    if closed and edges[-1].end != edges[0].start:
        edges[-1] = GeodesicEdge(space, edges[-1].start, edges[0].start)
    # drop zero-length edges unless that would empty the curve
    kept = tuple(e for e in edges if e.length > 0.0) or tuple(edges[:1])
    return PiecewiseGeodesicCurve(space, kept, closed)


def circle_distance(curve: PiecewiseGeodesicCurve, t: float, t_prime: float) -> float:
    """Distance between parameters along the curve (circle metric if closed)."""
    if curve.closed:
        t = curve.canonical_param(t)
        t_prime = curve.canonical_param(t_prime)
        fwd = (t_prime - t) % curve.length
        return min(fwd, curve.length - fwd)
    return abs(t_prime - t)


def small_edge_count(curve: PiecewiseGeodesicCurve, delta: float) -> int:
    """m(gamma, delta): edges of the coarsest resolution shorter than delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    lens = np.diff(curve.coarsest_resolution())
    lens = lens[lens > 0.0]
    return int(np.sum(lens < delta))


def geodesic_sampling(curve: PiecewiseGeodesicCurve, delta: float) -> PiecewiseGeodesicCurve:
    """Piecewise-geodesic sampling at scale delta: connect curve points at
    parameters 0, delta, 2*delta, ... by canonical geodesics."""
    L = curve.length
    if not 0 < delta < L:
        raise ValueError("need 0 < delta < length")
    k = ceil(L / delta)
    samples = [curve.point_at(min(j * delta, L)) for j in range(k + 1)]
    pts = [samples[0]]
    for p in samples[1:]:
        if curve.space.distance(pts[-1], p) > 0.0:
            pts.append(p)
    if curve.closed and len(pts) > 1 and curve.space.distance(pts[-1], pts[0]) == 0.0:
        pts = pts[:-1]
    if len(pts) < 2:
        return point_curve(curve.space, samples[0])
    return from_vertices(curve.space, pts, closed=curve.closed)


def close_with_geodesic(curve: PiecewiseGeodesicCurve) -> PiecewiseGeodesicCurve:
    """Close an open curve by appending the geodesic from its end to its start."""
    if curve.closed:
        return curve
    if curve.space.distance(curve.end, curve.start) == 0.0:
        return PiecewiseGeodesicCurve(curve.space, curve.edges, True)
    back = GeodesicEdge(curve.space, curve.end, curve.start)
    return PiecewiseGeodesicCurve(curve.space, curve.edges + (back,), True)
