"""Certified regularity predicates for piecewise-geodesic curves.

Three operations:

* ``is_lsi``: decides (delta, eps)-large-scale-invertibility, i.e. whether
  d(gamma(s), gamma(t)) > eps * d_gamma(s, t) whenever the along-curve
  distance d_gamma is at least delta.  The decision is certified by a
  branch-and-bound over parameter-pair cells: cell lower bounds on
  f(s, t) = d(gamma(s), gamma(t)) - eps * d_gamma(s, t) come from exact
  segment-pair distances (leaf cells) or bounding-box separation (coarse
  cells), and midpoint evaluations produce exact violation witnesses.

* ``is_den_curve``: exact sliding-window count of short edges in the
  coarsest resolution; windows run between resolution breakpoints, of
  length at most ``2 * delta / eps``.

* ``minimal_violating_interval``: the violating interval of (near-)minimal
  arc length, found by the same cell machinery ordered by arc length.  The
  certificate records ``floor``: no violating pair anywhere on the curve
  has arc length below it, so every strictly smaller subinterval shorter
  than ``floor`` is certified non-violating, and the gap beta - floor is
  the tolerance slack consumed by the search.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PiecewiseGeodesicCurve, circle_distance

DEFAULT_TAU_REL = 1e-9


@dataclass(frozen=True)
class LsiVerdict:
    holds: bool
    decided: bool
    witness: tuple[float, float] | None
    certified_margin: float
    cells_used: int = 0


@dataclass(frozen=True)
class ViolatingInterval:
    t: float
    t_prime: float
    beta: float
    minimal: bool
    floor: float
    endpoint_distance: float
    cells_used: int = 0

    @property
    def slack(self) -> float:
        return self.beta - self.floor


@dataclass(frozen=True)
class DenVerdict:
    holds: bool
    window: tuple[float, float] | None  # breakpoint params with n+1 short edges
    small_count: int = 0


def points_at_params(curve: PiecewiseGeodesicCurve, ts: np.ndarray) -> np.ndarray:
    """Vectorized curve evaluation; params must lie in [0, length]."""
    prims, plo, phi = curve.prims()
    dim = curve.space.dim
    if len(prims) == 0:
        return np.repeat([np.asarray(curve.start)], len(ts), axis=0)
    idx = np.minimum(np.maximum(np.searchsorted(plo, ts, side="right") - 1, 0),
                     len(prims) - 1)
    width = phi[idx] - plo[idx]
    f = (ts - plo[idx]) / np.where(width > 0, width, 1.0)
    f = np.minimum(np.maximum(f, 0.0), 1.0)
    a, b = prims[idx, :dim], prims[idx, dim:]
    return a + f[:, None] * (b - a)


def _dist_many(space, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = A - B
    if type(space).__name__ == "TaxicabPlane":
        return np.abs(d).sum(axis=-1)
    return np.sqrt(np.einsum("...d,...d->...", d, d))


def _arc_forward(L: float, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    return (t - s) % L


class _PairCells:
    """Parameter-pair cells with certified bounds for f = d - eps*d_gamma."""

    def __init__(self, curve: PiecewiseGeodesicCurve, eps: float, delta: float):
        self.curve = curve
        self.space = curve.space
        self.eps = eps
        self.delta = delta
        self.L = curve.length
        self.closed = curve.closed
        prims, plo, phi = curve.prims()
        self.prims, self.plo, self.phi = prims, plo, phi
        self.P = len(prims)
        dim = self.space.dim
        a, b = prims[:, :dim], prims[:, dim:]
        self.box_lo = np.minimum(a, b)
        self.box_hi = np.maximum(a, b)
        self._build_rmq()

    def _build_rmq(self):
        lo_tab = [self.box_lo]
        hi_tab = [self.box_hi]
        k = 1
        while (1 << k) <= self.P:
            h = 1 << (k - 1)
            lo_tab.append(np.minimum(lo_tab[-1][:-h], lo_tab[-1][h:]))
            hi_tab.append(np.maximum(hi_tab[-1][:-h], hi_tab[-1][h:]))
            k += 1
        self.lo_tab, self.hi_tab = lo_tab, hi_tab

    def range_bbox(self, i: np.ndarray, j: np.ndarray):
        """Bounding boxes of prim ranges [i, j), vectorized."""
        span = j - i
        k = np.zeros(len(i), dtype=int)
        nz = span > 0
        k[nz] = np.floor(np.log2(span[nz])).astype(int)
        lo = np.empty((len(i), self.box_lo.shape[1]))
        hi = np.empty_like(lo)
        for kk in np.unique(k):
            m = k == kk
            h = 1 << int(kk)
            a = i[m]
            b = j[m] - h
            lo[m] = np.minimum(self.lo_tab[kk][a], self.lo_tab[kk][b])
            hi[m] = np.maximum(self.hi_tab[kk][a], self.hi_tab[kk][b])
        return lo, hi

    def sub_prims(self, idx: np.ndarray, pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
        """Sub-segments of prims idx between params pa..pb (rows)."""
        dim = self.space.dim
        a = self.prims[idx, :dim]
        b = self.prims[idx, dim:]
        width = self.phi[idx] - self.plo[idx]
        w = np.where(width > 0, width, 1.0)
        plo = self.plo[idx]
        fa = np.minimum(np.maximum((pa - plo) / w, 0.0), 1.0)[:, None]
        fb = np.minimum(np.maximum((pb - plo) / w, 0.0), 1.0)[:, None]
        d = b - a
        return np.concatenate([a + fa * d, a + fb * d], axis=1)

    # cells: dict of arrays ia, ja, ib, jb (prim ranges), sa, sb, ta, tb

    def root(self):
        return dict(ia=np.array([0]), ja=np.array([self.P]),
                    ib=np.array([0]), jb=np.array([self.P]),
                    sa=np.array([0.0]), sb=np.array([self.L]),
                    ta=np.array([0.0]), tb=np.array([self.L]))

    @staticmethod
    def count(cells) -> int:
        return len(cells["ia"])

    @staticmethod
    def select(cells, mask):
        return {k: v[mask] for k, v in cells.items()}

    @staticmethod
    def concat(parts):
        parts = [p for p in parts if len(p["ia"])]
        if not parts:
            return None
        return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}

    def arc_bounds(self, cells):
        """(dg_min, dg_max, arc_min, arc_max) over each cell."""
        sa, sb, ta, tb = cells["sa"], cells["sb"], cells["ta"], cells["tb"]
        if not self.closed:
            gap = np.maximum(np.maximum(sa - tb, ta - sb), 0.0)
            dmax = np.maximum(tb - sa, sb - ta)
            return gap, dmax, gap, dmax
        L = self.L
        A = (ta - sb) % L
        W = (tb - ta) + (sb - sa)
        full = W >= L
        B = A + W
        # forward arc range
        wraps = B >= L
        arc_min = np.where(full | wraps, 0.0, A)
        arc_max = np.where(full | wraps, L, B)
        # circle distance range
        gA = np.minimum(A % L, L - A % L)
        gB = np.minimum(B % L, L - B % L)
        has_half = ((L / 2 - A) % L) <= W
        has_zero = ((-A) % L) <= W
        dg_max = np.where(full | has_half, L / 2, np.maximum(gA, gB))
        dg_min = np.where(full | has_zero, 0.0, np.minimum(gA, gB))
        return dg_min, dg_max, arc_min, arc_max

    def dist_lb(self, cells) -> np.ndarray:
        """Certified lower bound of d(gamma(s), gamma(t)) over each cell."""
        ia, ja, ib, jb = cells["ia"], cells["ja"], cells["ib"], cells["jb"]
        leaf = (ja - ia == 1) & (jb - ib == 1)
        out = np.empty(len(ia))
        if leaf.any():
            sub_s = self.sub_prims(ia[leaf], cells["sa"][leaf], cells["sb"][leaf])
            sub_t = self.sub_prims(ib[leaf], cells["ta"][leaf], cells["tb"][leaf])
            out[leaf] = self.space.prim_pair_dist(sub_s, sub_t)
        coarse = ~leaf
        if coarse.any():
            slo, shi = self.range_bbox(ia[coarse], ja[coarse])
            tlo, thi = self.range_bbox(ib[coarse], jb[coarse])
            out[coarse] = self.space.rect_dist(slo, shi, tlo, thi)
        return out

    def split(self, cells):
        """Split each cell in two along its widest parameter side."""
        ia, ja, ib, jb = cells["ia"], cells["ja"], cells["ib"], cells["jb"]
        sa, sb, ta, tb = cells["sa"], cells["sb"], cells["ta"], cells["tb"]
        split_s = (sb - sa) >= (tb - ta)
        c1 = {k: v.copy() for k, v in cells.items()}
        c2 = {k: v.copy() for k, v in cells.items()}
        # s-side splits
        m = split_s
        multi = m & (ja - ia > 1)
        imid = (ia + ja) // 2
        pmid = np.where(multi, self.plo[np.minimum(imid, self.P - 1)], 0.5 * (sa + sb))
        pmid = np.clip(pmid, sa, sb)
        c1["sb"][m] = pmid[m]
        c2["sa"][m] = pmid[m]
        c1["ja"][multi] = imid[multi]
        c2["ia"][multi] = imid[multi]
        # t-side splits
        m = ~split_s
        multi = m & (jb - ib > 1)
        imid = (ib + jb) // 2
        pmid = np.where(multi, self.plo[np.minimum(imid, self.P - 1)], 0.5 * (ta + tb))
        pmid = np.clip(pmid, ta, tb)
        c1["tb"][m] = pmid[m]
        c2["ta"][m] = pmid[m]
        c1["jb"][multi] = imid[multi]
        c2["ib"][multi] = imid[multi]
        return self.concat([c1, c2])

    def midpoint_eval(self, cells):
        """Exact f and feasibility at cell midpoints."""
        sm = 0.5 * (cells["sa"] + cells["sb"])
        tm = 0.5 * (cells["ta"] + cells["tb"])
        A = points_at_params(self.curve, sm)
        B = points_at_params(self.curve, tm)
        d = _dist_many(self.space, A, B)
        if self.closed:
            fwd = _arc_forward(self.L, sm, tm)
            dg = np.minimum(fwd, self.L - fwd)
        else:
            dg = np.abs(tm - sm)
        return sm, tm, d - self.eps * dg, dg


def is_lsi(curve: PiecewiseGeodesicCurve, delta: float, eps: float, *,
           tau: float | None = None, max_cells: int = 2_000_000) -> LsiVerdict:
    """Certified (delta, eps)-large-scale-invertibility decision."""
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if delta <= 0:
        raise ValueError("delta must be positive")
    L = curve.length
    if L == 0.0:
        return LsiVerdict(True, True, None, np.inf)
    tau = DEFAULT_TAU_REL * L if tau is None else tau
    sup_dg = L / 2 if curve.closed else L
    if sup_dg < delta:
        return LsiVerdict(True, True, None, np.inf)  # constraint region empty

    pc = _PairCells(curve, eps, delta)
    cells = pc.root()
    used = 1
    margin = np.inf
    while cells is not None and used < max_cells:
        dg_min, dg_max, _, _ = pc.arc_bounds(cells)
        feasible = dg_max >= delta
        cells = pc.select(cells, feasible)
        if pc.count(cells) == 0:
            break
        dg_min, dg_max = dg_min[feasible], dg_max[feasible]
        d_lb = pc.dist_lb(cells)
        f_lb = d_lb - eps * dg_max
        sm, tm, f_mid, dg_mid = pc.midpoint_eval(cells)
        bad = (f_mid <= 0.0) & (dg_mid >= delta)
        if bad.any():
            i = int(np.argmax(bad))
            return LsiVerdict(False, True, (float(sm[i]), float(tm[i])),
                              float(f_mid[i]), used)
        resolved = f_lb > -tau
        if resolved.any():
            margin = min(margin, float(f_lb[resolved].min()))
        cells = pc.select(cells, ~resolved)
        if pc.count(cells) == 0:
            return LsiVerdict(True, True, None, float(min(margin, np.inf)), used)
        cells = pc.split(pc.split(cells))
        used += pc.count(cells)
    if cells is None or pc.count(cells) == 0:
        return LsiVerdict(True, True, None, float(min(margin, np.inf)), used)
    return LsiVerdict(False, False, None, float(min(margin, 0.0)), used)


def minimal_violating_interval(curve: PiecewiseGeodesicCurve, delta: float, eps: float, *,
                               witness: tuple[float, float] | None = None,
                               tau_len: float | None = None,
                               max_cells: int = 4_000_000) -> ViolatingInterval:
    """Violating interval of near-minimal arc length.

    Searches ordered parameter pairs (s, t) for the minimum forward arc
    length among pairs with d_gamma >= delta and
    d(gamma(s), gamma(t)) <= eps * d_gamma(s, t); the returned interval's
    strictly smaller subintervals of arc length below ``floor`` are
    certified non-violating.
    """
    L = curve.length
    tau_len = max(1e-9 * L, 64 * np.finfo(float).eps * L) if tau_len is None else tau_len
    if witness is None:
        verdict = is_lsi(curve, delta, eps)
        if verdict.holds or verdict.witness is None:
            raise ValueError("curve is large-scale invertible; nothing to cut")
        witness = verdict.witness

    pc = _PairCells(curve, eps, delta)

    def exact_pair(s, t):
        A = points_at_params(curve, np.asarray([s]))
        B = points_at_params(curve, np.asarray([t]))
        d = float(_dist_many(curve.space, A, B)[0])
        dg = circle_distance(curve, s, t)
        return d, dg

    def orient(s, t):
        if not curve.closed:
            return (s, t) if s <= t else (t, s)
        fwd = _arc_forward(L, np.asarray([s]), np.asarray([t]))[0]
        return (s, t) if fwd <= L - fwd else (t, s)

    s0, t0 = orient(*witness)
    d0, dg0 = exact_pair(s0, t0)
    if not (dg0 >= delta and d0 <= eps * dg0):
        raise ValueError("witness fails its defining inequalities")
    best = (s0, t0)
    beta = _arc_forward(L, np.asarray([s0]), np.asarray([t0]))[0] if curve.closed else t0 - s0
    best_d = d0

    cells = pc.root()
    used = 1
    floor = 0.0
    while cells is not None and used < max_cells:
        dg_min, dg_max, arc_min, arc_max = pc.arc_bounds(cells)
        d_lb = pc.dist_lb(cells)
        # keep only cells that may contain a violating pair shorter than beta
        maybe = (dg_max >= delta) & (d_lb - eps * dg_max <= 0.0) & (arc_min < beta)
        cells = pc.select(cells, maybe)
        if pc.count(cells) == 0:
            floor = beta  # no violating pair anywhere below the incumbent
            break
        arc_min = arc_min[maybe]
        # any violating pair has arc length >= d_gamma >= delta
        floor = max(float(arc_min.min()), delta)
        if beta - floor <= tau_len:
            break
        sm, tm, f_mid, dg_mid = pc.midpoint_eval(cells)
        if curve.closed:
            fwd = _arc_forward(L, sm, tm)
        else:
            fwd = np.abs(tm - sm)
        good = (f_mid <= 0.0) & (dg_mid >= delta) & (fwd < beta)
        if good.any():
            i = int(np.argmin(np.where(good, fwd, np.inf)))
            si, ti = float(sm[i]), float(tm[i])
            best = (si, ti) if curve.closed or si <= ti else (ti, si)
            beta = float(fwd[i])
            best_d = float(f_mid[i] + eps * dg_mid[i])
        # refine the shortest-arc cells first, in vectorized batches
        order = np.argsort(arc_min, kind="stable")
        top = order[:20_000]
        rest = order[20_000:]
        children = pc.split(pc.split(pc.select(cells, top)))
        used += pc.count(children)
        cells = pc.concat([pc.select(cells, rest), children])

    t, t_prime = best
    return ViolatingInterval(t, t_prime, float(beta), beta - floor <= tau_len,
                             float(min(floor, beta)), best_d, used)


def greedy_shrink_violating(curve: PiecewiseGeodesicCurve, delta: float,
                            eps: float, witness: tuple[float, float],
                            rounds: int = 80) -> tuple[float, float, float]:
    """Shrink a violating pair toward local arc-length minimality.

    Batch-samples nested sub-pairs of the current interval and moves to the
    shortest one that still violates with d_gamma >= delta.  Returns
    (t, t_prime, beta); the result is violating but carries no global
    minimality certificate (callers re-verify what they need downstream).
    """
    L = curve.length
    closed = curve.closed

    def fwd(s, t):
        return (t - s) % L if closed else abs(t - s)

    s, t = witness
    if fwd(s, t) > fwd(t, s):
        s, t = t, s
    beta = fwd(s, t)
    fracs = np.concatenate([np.geomspace(1.0 / 256, 0.5, 10), [0.0]])
    for _ in range(rounds):
        arc = beta
        ds = arc * fracs
        # candidate sub-pairs: advance the start, retract the end, or both
        ss = np.concatenate([(s + ds), np.full_like(ds, s), s + ds])
        tt = np.concatenate([np.full_like(ds, t), (t - ds), t - ds])
        if closed:
            ss %= L
            tt %= L
        else:
            ss = np.minimum(np.maximum(ss, 0.0), L)
            tt = np.minimum(np.maximum(tt, 0.0), L)
        A = points_at_params(curve, ss)
        B = points_at_params(curve, tt)
        d = _dist_many(curve.space, A, B)
        arcs = (tt - ss) % L if closed else np.abs(tt - ss)
        dg = np.minimum(arcs, L - arcs) if closed else arcs
        ok = (dg >= delta) & (d <= eps * dg) & (arcs < beta)
        if not ok.any():
            break
        i = int(np.argmin(np.where(ok, arcs, np.inf)))
        s, t, beta = float(ss[i]), float(tt[i]), float(arcs[i])
    return s, t, beta


def is_den_curve(curve: PiecewiseGeodesicCurve, delta: float, eps: float, n: int) -> DenVerdict:
    """Exact (delta, eps, n)-curve check on the coarsest resolution.

    Windows run between resolution breakpoints and have length at most
    2*delta/eps; the verdict is False when some window fully contains more
    than n edges shorter than delta, and the returned witness window is
    shrunk to contain exactly n+1 of them.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if delta <= 0 or n < 0:
        raise ValueError("need delta > 0 and n >= 0")
    breaks = curve.coarsest_resolution()
    lens = np.diff(breaks)
    keep = lens > 0.0
    starts = breaks[:-1][keep]
    lens = lens[keep]
    K = len(lens)
    L = curve.length
    W = 2.0 * delta / eps
    if K == 0:
        return DenVerdict(True, None)
    small = lens < delta
    if curve.closed:
        ext_lens = np.concatenate([lens, lens])
        ext_small = np.concatenate([small, small])
    else:
        ext_lens = lens
        ext_small = small
    csum = np.concatenate([[0.0], np.cumsum(ext_lens)])
    csml = np.concatenate([[0], np.cumsum(ext_small.astype(int))])
    # widest window starting at each breakpoint, all at once
    a_idx = np.arange(K)
    b_idx = np.searchsorted(csum, csum[:K] + W + 1e-12 * max(L, 1.0),
                            side="right") - 1
    b_idx = np.minimum(b_idx, np.minimum(a_idx + K, len(ext_lens)))
    counts = csml[np.maximum(b_idx, a_idx)] - csml[a_idx]
    over = counts > n
    if not over.any():
        return DenVerdict(True, None)
    a = int(np.argmax(over))
    b = int(b_idx[a])
    # shrink to exactly n+1 short edges; a full-circle window comes back
    # with coinciding endpoints (t == t'), for the caller to special-case
    idxs = np.nonzero(ext_small[a:b])[0] + a
    first, last = int(idxs[0]), int(idxs[n])
    if curve.closed:
        t = float(starts[first % K])
        t_end = float(starts[(last + 1) % K])
    else:
        t = float(starts[first])
        t_end = float(starts[last] + lens[last])
    return DenVerdict(False, (t, t_end), n + 1)
