"""Occupation-measure ball masses and certified Morrey norm estimation.

The Morrey norm of a curve is sup over centers x and radii r > 0 of
mu(B_r(x))/r, where mu is the pushforward of arc length.  Ball masses are
exact per primitive segment (closed-form chords), and the norm estimator is
a branch-and-bound over (center, radius) boxes returning a certified
two-sided interval:

* every exact evaluation is a valid lower bound (the best one is kept with
  its witness ball);
* a box [r1, r2] x B(xc, rho) is bounded above by
  sum_p min(measure_p(xc, r2 + rho), 2 r2, len_p) / r1, using the Lipschitz
  monotonicity mu(B_r(x)) <= mu(B_{r+d(x,y)}(y)) and the fact that a ball
  of radius r meets a geodesic in a parameter set of diameter at most 2r;
* radii above length/2 give ratios below 2 and are excluded analytically
  (the norm of a nonzero curve is at least 2);
* radii below an adaptive floor are covered by 2*omega, where omega is the
  maximum clique size of the proximity graph on coarsest-resolution runs at
  threshold 2*r_floor (runs meeting one ball of radius r < r_floor are
  pairwise within 2*r_floor of each other).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PiecewiseGeodesicCurve
from .spaces import Point


@dataclass(frozen=True)
class MorreyEstimate:
    lo: float
    hi: float
    witness_center: Point
    witness_radius: float
    tolerance_requested: float
    converged: bool
    boxes_used: int = 0

    @property
    def width(self) -> float:
        return self.hi - self.lo


def ball_mass(curve: PiecewiseGeodesicCurve, x, r: float) -> float:
    """Arc-length measure of {t : d(x, gamma(t)) <= r}, exact per edge."""
    if r <= 0:
        raise ValueError("radius must be positive")
    prims, _, _ = curve.prims()
    if len(prims) == 0:
        return 0.0
    x = np.asarray(curve.space.check_point(tuple(float(c) for c in x)))
    return float(curve.space.prim_chord_measures(prims, x, np.asarray([r])).sum())


def morrey_upper_bound_edges(curve: PiecewiseGeodesicCurve) -> float:
    """2k bound from the coarsest resolution into k geodesic edges."""
    return 2.0 * curve.edge_count()


def _run_pair_distances(curve):
    """Pairwise distances between coarsest-resolution runs (k, k)."""
    prims, plo, _ = curve.prims()
    breaks = curve.coarsest_resolution()
    run_idx = np.clip(np.searchsorted(breaks, plo, side="right") - 1, 0, len(breaks) - 2)
    k = len(breaks) - 1
    if len(prims) == 0:
        return np.zeros((0, 0))
    d_prim = curve.space.prim_pair_dist(prims[:, None, :], prims[None, :, :])
    dist = np.full((k, k), np.inf)
    groups = [np.nonzero(run_idx == a)[0] for a in range(k)]
    for a in range(k):
        if len(groups[a]) == 0:
            continue
        for b in range(a, k):
            if len(groups[b]) == 0:
                continue
            d = d_prim[np.ix_(groups[a], groups[b])].min()
            dist[a, b] = dist[b, a] = d
    return dist


def _bron_kerbosch(adj: np.ndarray) -> int:
    n = len(adj)
    if n == 0:
        return 0
    masks = []
    for i in range(n):
        m = 0
        for j in np.nonzero(adj[i])[0]:
            m |= 1 << int(j)
        masks.append(m)
    best = 0

    def expand(r_size: int, p: int):
        nonlocal best
        if p == 0:
            best = max(best, r_size)
            return
        if r_size + bin(p).count("1") <= best:
            return
        pivot = p.bit_length() - 1
        cand = p & ~masks[pivot]
        if cand == 0:
            cand = p & (-p)
        while cand:
            v = cand & (-cand)
            vi = v.bit_length() - 1
            expand(r_size + 1, p & masks[vi])
            p &= ~v
            cand &= ~v

    expand(0, (1 << n) - 1)
    return best


def _max_clique(adj: np.ndarray) -> int:
    """Max clique, computed per connected component.

    Components beyond the size cap fall back to min(size, max degree + 1),
    still a valid upper bound; proximity graphs at the tiny small-radius
    threshold are sparse (touching edges only), so the exact search stays
    cheap for realistic curves.
    """
    n = len(adj)
    if n == 0:
        return 0
    seen = np.zeros(n, dtype=bool)
    best = 1
    for s in range(n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        stack = [s]
        while stack:
            u = stack.pop()
            for v in np.nonzero(adj[u])[0]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(int(v))
                    stack.append(int(v))
        idx = np.asarray(comp)
        sub = adj[np.ix_(idx, idx)]
        if len(comp) > 220:
            best = max(best, min(len(comp), int(sub.sum(axis=1).max()) + 1))
        else:
            best = max(best, _bron_kerbosch(sub))
    return best


def _small_radius_cap(curve, r_floor: float) -> float:
    dist = _run_pair_distances(curve)
    if dist.size == 0:
        return 0.0
    adj = dist <= 2.0 * r_floor
    np.fill_diagonal(adj, False)
    return 2.0 * _max_clique(adj)


def _crossing_points(space, prims):
    """Pairwise intersection points of 2D primitives (lower-bound seeds)."""
    if space.dim != 2 or len(prims) > 256:
        return np.zeros((0, 2))
    a, b = prims[:, :2], prims[:, 2:]
    i, j = np.triu_indices(len(prims), k=1)
    p, r = a[i], b[i] - a[i]
    q, s = a[j], b[j] - a[j]
    denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    pq = q - p
    ok = np.abs(denom) > 1e-15
    denom_safe = np.where(ok, denom, 1.0)
    t = (pq[:, 0] * s[:, 1] - pq[:, 1] * s[:, 0]) / denom_safe
    u = (pq[:, 0] * r[:, 1] - pq[:, 1] * r[:, 0]) / denom_safe
    ok &= (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    pts = p[ok] + t[ok, None] * r[ok]
    if len(pts) > 120:
        pts = pts[np.linspace(0, len(pts) - 1, 120).astype(int)]
    return pts


class _Frontier:
    """Boxes (center box x radius band) stored as flat arrays."""

    def __init__(self, clo, chi, r1, r2):
        self.clo, self.chi = clo, chi
        self.r1, self.r2 = r1, r2

    def __len__(self):
        return len(self.r1)

    @staticmethod
    def empty(dim):
        return _Frontier(np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0), np.zeros(0))

    @staticmethod
    def concat(parts):
        parts = [p for p in parts if len(p)]
        if not parts:
            return None
        return _Frontier(np.concatenate([p.clo for p in parts]),
                         np.concatenate([p.chi for p in parts]),
                         np.concatenate([p.r1 for p in parts]),
                         np.concatenate([p.r2 for p in parts]))

    def select(self, mask):
        return _Frontier(self.clo[mask], self.chi[mask], self.r1[mask], self.r2[mask])

    def split(self):
        """Two children per box: halve the radius band or the widest axis."""
        widths = self.chi - self.clo
        d = np.argmax(widths, axis=1)
        rows = np.arange(len(self))
        wmax = widths[rows, d]
        split_r = 2.0 * (self.r2 - self.r1) > wmax
        rm = np.where(self.r2 > 4.0 * self.r1, np.sqrt(self.r1 * self.r2),
                      0.5 * (self.r1 + self.r2))
        c1 = _Frontier(self.clo.copy(), self.chi.copy(), self.r1.copy(), self.r2.copy())
        c2 = _Frontier(self.clo.copy(), self.chi.copy(), self.r1.copy(), self.r2.copy())
        c1.r2 = np.where(split_r, rm, c1.r2)
        c2.r1 = np.where(split_r, rm, c2.r1)
        mid = 0.5 * (self.clo[rows, d] + self.chi[rows, d])
        dims = ~split_r
        c1.chi[rows[dims], d[dims]] = mid[dims]
        c2.clo[rows[dims], d[dims]] = mid[dims]
        return _Frontier.concat([c1, c2])


def morrey_norm(curve: PiecewiseGeodesicCurve, tol: float | None = None, *,
                stop_below: float | None = None,
                max_boxes: int = 600_000) -> MorreyEstimate:
    """Certified interval bracketing the Morrey norm.

    tol: absolute target width of the interval; when omitted the target is
    1e-6 times the best lower bound so far.  stop_below: optional early-out,
    the search stops once the certified upper bound is at or below it (for
    cheap "Morrey <= threshold" verification).  The result is deterministic
    for fixed inputs; a nonconvergent search (budget hit) returns the best
    certified interval with converged=False.
    """
    space = curve.space
    L = curve.length
    if L == 0.0:
        return MorreyEstimate(0.0, 0.0, curve.start, 1.0, tol or 0.0, True)
    if stop_below is not None:
        cap = morrey_upper_bound_edges(curve)
        if cap <= stop_below:
            # the coarsest-resolution edge count already certifies the bound
            return MorreyEstimate(0.0, cap, curve.start, 0.5 * L,
                                  tol if tol is not None else cap, True, 0)
    prims, plo_p, phi_p = curve.prims()
    plen = phi_p - plo_p
    dim = space.dim
    pa, pb = prims[:, :dim], prims[:, dim:]

    global_cap = morrey_upper_bound_edges(curve)
    stop_at = stop_below if stop_below is not None else -np.inf
    r_cap = 0.5 * L
    r_floor = 1e-6 * L
    small_cap = min(_small_radius_cap(curve, r_floor), global_cap)

    lo, wit_c, wit_r = 0.0, curve.start, r_cap

    def evaluate(center, radii):
        nonlocal lo, wit_c, wit_r
        radii = np.asarray(radii, dtype=float)
        radii = np.unique(radii[(radii > 0) & (radii <= r_cap * (1 + 1e-12))])
        if len(radii) == 0:
            return
        meas = space.prim_chord_measures(prims, center, radii).sum(axis=0)
        ratios = meas / radii
        i = int(np.argmax(ratios))
        if ratios[i] > lo:
            lo = float(ratios[i])
            wit_c, wit_r = tuple(float(c) for c in center), float(radii[i])

    def evaluate_many(centers, radii):
        nonlocal lo, wit_c, wit_r
        ok = (radii > 0) & (radii <= r_cap * (1 + 1e-12))
        if not ok.any():
            return
        centers, radii = centers[ok], radii[ok]
        ratios = space.chord_measures_many(prims, centers, radii).sum(axis=1) / radii
        i = int(np.argmax(ratios))
        if ratios[i] > lo:
            lo = float(ratios[i])
            wit_c, wit_r = tuple(float(c) for c in centers[i]), float(radii[i])

    def target_tol():
        return tol if tol is not None else 1e-6 * max(lo, 2.0)

    # -- seed evaluations --------------------------------------------------
    verts = np.unique(np.concatenate([pa, pb]), axis=0)
    if len(verts) > 48:
        verts = verts[np.linspace(0, len(verts) - 1, 48).astype(int)]
    mids = 0.5 * (pa + pb)
    if len(mids) > 48:
        mids = mids[np.linspace(0, len(mids) - 1, 48).astype(int)]
    blo, bhi = curve.bounding_box()
    seed_centers = [verts, mids, [(blo + bhi) / 2.0, verts.mean(axis=0)],
                    _crossing_points(space, prims)]
    centers = np.concatenate([np.asarray(c) for c in seed_centers if len(c)])
    ladder = np.geomspace(max(r_floor, 1e-12 * L), r_cap, 24)
    for c in centers:
        crit = space.point_prim_dist(c[None, :], prims)[0]
        vd = np.array([space.distance(tuple(c), tuple(v)) for v in verts])
        evaluate(c, np.concatenate([crit, crit * np.sqrt(2.0), vd, ladder, [r_cap]]))
    j = int(np.argmax(plen))
    evaluate(0.5 * (pa[j] + pb[j]), [plen[j] / 2.0])  # exact ratio-2 witness

    # -- branch and bound over (center box, radius band) --------------------
    def bound(fr: _Frontier, chunk: int = 512):
        """Certified upper bounds per box; also feeds lower-bound evals.

        Two complementary bounds are combined: the inflated chord-measure
        sum (tight once the box is small against the radius band), and the
        local edge-count bound 2 * #{prims within reach of the box} (tight
        while the box is still wide, since a ball meets each geodesic in a
        parameter set of measure at most 2r).
        """
        out = np.empty(len(fr))
        for s in range(0, len(fr), chunk):
            sl = slice(s, min(s + chunk, len(fr)))
            xc = 0.5 * (fr.clo[sl] + fr.chi[sl])
            rho = space.rect_halfwidth(fr.clo[sl], fr.chi[sl])
            r1, r2 = fr.r1[sl], fr.r2[sl]
            meas = space.chord_measures_many(prims, xc, r2 + rho)
            capped = np.minimum(np.minimum(meas, 2.0 * r2[:, None]), plen[None, :])
            close = (space.point_prim_dist(xc, prims) - rho[:, None]) <= r2[:, None]
            count_bound = 2.0 * close.sum(axis=1)
            out[sl] = np.minimum(np.minimum(capped.sum(axis=1) / r1, count_bound),
                                 global_cap)
            evaluate_many(xc, r2)
        return out

    def bands(r_from, down_to):
        r2s, r1s = [], []
        r2 = r_from
        while r2 > down_to * (1 + 1e-12):
            r1 = max(r2 / 2.0, down_to)
            r2s.append(r2)
            r1s.append(r1)
            r2 = r1
        r2s = np.asarray(r2s)
        r1s = np.asarray(r1s)
        return _Frontier(np.repeat([blo], len(r2s), axis=0) - r2s[:, None],
                         np.repeat([bhi], len(r2s), axis=0) + r2s[:, None], r1s, r2s)

    frontier = bands(r_cap, r_floor)
    hib = bound(frontier)
    used = len(frontier)
    resolved_cap = 0.0
    floor_shrinks = 0
    max_front = 20_000

    while True:
        live_hi = float(hib.max()) if len(hib) else 0.0
        ghi = max(live_hi, small_cap, resolved_cap, lo)
        tcur = target_tol()
        if ghi - lo <= tcur or ghi <= stop_at:
            break
        keep_level = max(lo + 0.25 * tcur, stop_at)
        live = hib > keep_level
        if (~live).any():
            # a resolved box's bound is final; its region never beats this
            resolved_cap = max(resolved_cap, float(hib[~live].max()))
        if not live.any():
            if small_cap > lo + tcur and floor_shrinks < 3:
                old_floor = r_floor
                r_floor *= 1e-3
                small_cap = min(_small_radius_cap(curve, r_floor), global_cap)
                extra = bands(min(old_floor, r_cap), r_floor)
                hib_extra = bound(extra)
                used += len(extra)
                frontier = _Frontier.concat([frontier.select(live), extra])
                hib = hib_extra
                floor_shrinks += 1
                continue
            break
        if used >= max_boxes:
            break
        if live.sum() > max_front:
            # best-first batching: split only the worst boxes, hold the rest
            order = np.argsort(-hib)
            cut = hib[order[max_front]]
            hold = live & (hib <= cut)
            split_mask = live & (hib > cut)
        else:
            hold = np.zeros(len(hib), dtype=bool)
            split_mask = live
        if not split_mask.any():
            break
        children = frontier.select(split_mask).split()
        hib_children = bound(children)
        used += len(children)
        kept = frontier.select(hold)
        frontier = _Frontier.concat([kept, children])
        hib = np.concatenate([hib[hold], hib_children])

    live_hi = float(hib.max()) if len(hib) else 0.0
    hi = min(max(live_hi, small_cap, resolved_cap, lo), global_cap)
    lo = min(lo, hi)  # exact evaluations can overshoot certified caps by ~1 ulp
    tol_req = target_tol()
    converged = (hi - lo <= tol_req) or (stop_below is not None and hi <= stop_below)
    return MorreyEstimate(lo, hi, wit_c, wit_r, tol_req, converged, used)
