"""The surgery loop: decompose a closed piecewise-geodesic curve into
closed pieces with uniform certified Morrey bounds and near-minimal total
length.

The loop alternates two moves on the current remainder: while some window
of length at most 2*delta/eps packs more than n edges shorter than delta,
excise such a window (type II); otherwise, if the curve fails
(delta, eps)-large-scale-invertibility, excise a minimal violating interval
(type I); when it passes, the remainder itself is the final piece.  With
delta at most the shortest edge of the input, type II cuts strictly reduce
the short-edge count and type I cuts strictly reduce length, so the loop
terminates with

* total output length at most (1 + 2 eps/(1-eps) + 12/(eps n (1-eps)))
  times the input length,
* every piece's Morrey norm at most 4/eps + 2n + 10, and
* the input current equal to the sum of the piece currents.

Nothing is trusted from the theory: every inequality is recomputed from
the raw output curves into a certificate that an independent verifier can
replay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .currents import WeightedCurrent, evaluate_battery, standard_battery
from .curves import PiecewiseGeodesicCurve
from .cuts import MORREY_SLACK, type1_cut, type2_cut
from .morrey import morrey_norm, morrey_upper_bound_edges
from .regularity import is_den_curve, is_lsi

# Largest c = 1/k making the surgery length factor at most 1 + eta for all
# eta in (0,1) with eps = c*eta, n = ceil(eps^-2); the Morrey threshold is
# then below CPRIME/eta^2.  Validated by validate_eta_constants().
ETA_COEFF = 1.0 / 15.0
ETA_CPRIME = 524.0
THEOREM_CONSTANT = 4.0 * ETA_CPRIME


def lemma_length_factor(eps: float, n: int) -> float:
    return 1.0 + 2.0 * eps / (1.0 - eps) + 12.0 / (eps * n * (1.0 - eps))


def lemma_morrey_threshold(eps: float, n: int) -> float:
    return 4.0 / eps + 2.0 * n + 10.0


def eta_params(eta: float) -> tuple[float, int]:
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must be in (0, 1)")
    eps = ETA_COEFF * eta
    return eps, ceil(1.0 / eps**2)


def validate_eta_constants(grid: int = 10_000) -> dict:
    """Sweep eta over a grid and check both Corollary-style bounds."""
    etas = np.linspace(1e-6, 1.0 - 1e-9, grid)
    worst_len, worst_mor = -np.inf, -np.inf
    for eta in etas:
        eps, n = eta_params(float(eta))
        worst_len = max(worst_len, lemma_length_factor(eps, n) - (1.0 + eta))
        worst_mor = max(worst_mor, lemma_morrey_threshold(eps, n) - ETA_CPRIME / eta**2)
    return {"length_margin": -worst_len, "morrey_margin": -worst_mor,
            "ok": worst_len <= 0.0 and worst_mor <= 0.0,
            "c": ETA_COEFF, "c_prime": ETA_CPRIME}


@dataclass(frozen=True)
class SurgeryParams:
    epsilon: float
    n: int
    delta: float | None = None
    eta: float | None = None
    tau_len_rel: float = 1e-6
    battery_size: int = 50
    battery_seed: int = 0
    identity_m: int = 64
    check_identity: bool = True
    morrey_max_boxes: int = 200_000

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must be in (0, 1)")
        if self.n < 1:
            raise ValueError("n must be at least 1")


@dataclass(frozen=True)
class SurgeryCertificate:
    epsilon: float
    n: int
    delta: float
    eta: float | None
    input_length: float
    steps: tuple[dict, ...]
    T_I: int
    T_II: int
    N: int
    output_lengths: tuple[float, ...]
    morrey: tuple[dict, ...]
    bound_checks: dict

    @property
    def betas(self) -> list[float]:
        return [s["beta"] for s in self.steps if s["type"] == "I"]

    def all_ok(self) -> bool:
        bc = self.bound_checks
        keys = ["length_ok", "morrey_ok", "counters_ok", "monotone_ok", "step_count_ok"]
        if "identity_ok" in bc:
            keys.append("identity_ok")
        return all(bc[k] for k in keys)


@dataclass(frozen=True)
class SurgeryResult:
    pieces: tuple[PiecewiseGeodesicCurve, ...]
    certificate: SurgeryCertificate


def _piece_morrey(piece, method, stop_below, max_boxes):
    if method == "edges":
        hi = morrey_upper_bound_edges(piece)
        return {"method": "edges", "lo": 0.0, "hi": hi,
                "stop_below": stop_below, "max_boxes": 0}
    est = morrey_norm(piece, stop_below=stop_below, max_boxes=max_boxes)
    return {"method": "bnb", "lo": est.lo, "hi": est.hi,
            "stop_below": stop_below, "max_boxes": max_boxes}


def surgery(curve: PiecewiseGeodesicCurve, params: SurgeryParams) -> SurgeryResult:
    """Run the cut loop and assemble a re-verifiable certificate."""
    if not curve.closed:
        raise ValueError("surgery applies to closed curves")
    L = curve.length
    if L == 0.0:
        raise ValueError("surgery rejects zero-length curves")
    eps, n = params.epsilon, params.n
    run_lens = np.diff(curve.coarsest_resolution())
    delta_max = float(run_lens[run_lens > 0].min())
    delta = params.delta if params.delta is not None else delta_max
    if delta <= 0 or delta > delta_max * (1 + 1e-12):
        raise ValueError(f"delta must lie in (0, {delta_max}]")
    threshold = lemma_morrey_threshold(eps, n)

    t1_cap = ceil(L / ((1.0 - eps) * delta))
    budget = 2 * (t1_cap + ceil(3.0 * t1_cap / n) + 1)

    cur = curve
    pieces: list[PiecewiseGeodesicCurve] = []
    steps: list[dict] = []
    morrey_entries: list[dict] = []
    T1 = T2 = 0
    final_flag = "lsi"
    while True:
        assert len(steps) <= budget, "cut count exceeded the proof budget; algorithm bug"
        den = is_den_curve(cur, delta, eps, n)
        if not den.holds:
            if den.window[0] == den.window[1]:
                # the crowded window is the whole curve: it already carries
                # the type II Morrey bound, emit it as the final piece
                final_flag = "full-window"
                break
            out = type2_cut(cur, delta, eps, n, den=den,
                            morrey_boxes=params.morrey_max_boxes)
            T2 += 1
        else:
            verdict = is_lsi(cur, delta, eps)
            if verdict.holds or verdict.witness is None:
                final_flag = "lsi" if verdict.holds else "lsi-undecided"
                break
            out = type1_cut(cur, delta, eps, n, lsi=verdict,
                            tau_len=params.tau_len_rel * cur.length,
                            morrey_boxes=params.morrey_max_boxes)
            T1 += 1
        step = {"index": len(steps) + 1, "type": out.cut_type,
                "t": out.t, "t_prime": out.t_prime,
                "beta": out.beta, **out.checks}
        steps.append(step)
        pieces.append(out.excised)
        morrey_entries.append({"method": out.checks["morrey_method"],
                               "lo": out.checks["morrey_lo"],
                               "hi": out.checks["morrey_hi"],
                               "stop_below": out.checks["morrey_stop"],
                               "max_boxes": out.checks["morrey_max_boxes"]})
        cur = out.remainder
    pieces.append(cur)
    morrey_entries.append(_piece_morrey(cur, "bnb", threshold + MORREY_SLACK,
                                        params.morrey_max_boxes))
    N = len(pieces)

    # -- certificate: re-derive every bound from the raw pieces -------------
    output_lengths = tuple(p.length for p in pieces)
    factor = lemma_length_factor(eps, n)
    total_out = float(np.sum(output_lengths))
    fp = 1e-9 * max(L, 1.0)

    morrey_ok = all(m["hi"] <= threshold + MORREY_SLACK for m in morrey_entries)

    rem_lengths = [s["remainder_length"] for s in steps]
    monotone_ok = all(b <= a + fp for a, b in
                      zip([L] + rem_lengths[:-1], rem_lengths))

    t1_bound = L / ((1.0 - eps) * delta)
    t2_bound = 3.0 * T1 / n
    bound_checks = {
        "length_factor": factor,
        "length_bound": factor * L,
        "total_output_length": total_out,
        "length_ok": total_out <= factor * L + fp,
        "morrey_threshold": threshold,
        "morrey_slack": MORREY_SLACK,
        "morrey_ok": bool(morrey_ok),
        "t1_bound": t1_bound,
        "t2_bound": t2_bound,
        "counters_ok": (T1 <= t1_bound + 1e-9) and (T2 <= t2_bound + 1e-9),
        "monotone_ok": bool(monotone_ok),
        "step_count_ok": N == T1 + T2 + 1,
        "final_flag": final_flag,
        "morrey_max_boxes": params.morrey_max_boxes,
    }

    if params.check_identity:
        anchors = np.asarray(curve.vertices())
        battery = standard_battery(curve.space, anchors, params.battery_size,
                                   params.battery_seed)
        vin, ein = evaluate_battery(curve, battery, params.identity_m)
        vout, eout = evaluate_battery(
            WeightedCurrent.of(*[(1.0, p) for p in pieces]), battery,
            params.identity_m)
        resid = np.abs(vin - vout)
        allow = ein + eout
        bound_checks.update({
            "identity_max_residual": float(resid.max()),
            "identity_allowance": float(allow.max()),
            "identity_ok": bool(np.all(resid <= allow + 1e-12)),
            "battery_size": params.battery_size,
            "battery_seed": params.battery_seed,
            "identity_m": params.identity_m,
        })

    cert = SurgeryCertificate(eps, n, delta, params.eta, L, tuple(steps),
                              T1, T2, N, output_lengths,
                              tuple(morrey_entries), bound_checks)
    return SurgeryResult(tuple(pieces), cert)


def surgery_eta(curve: PiecewiseGeodesicCurve, eta: float,
                **overrides) -> SurgeryResult:
    """Surgery with eps = c*eta and n = ceil(eps^-2): total length within
    (1 + eta) of the input and Morrey norms within C'/eta^2."""
    eps, n = eta_params(eta)
    params = SurgeryParams(epsilon=eps, n=n, eta=eta, **overrides)
    result = surgery(curve, params)
    cert = result.certificate
    L = cert.input_length
    fp = 1e-9 * max(L, 1.0)
    extra = {
        "eta_length_bound": (1.0 + eta) * L,
        "eta_length_ok": cert.bound_checks["total_output_length"] <= (1.0 + eta) * L + fp,
        "eta_morrey_bound": ETA_CPRIME / eta**2,
        "eta_morrey_ok": all(m["hi"] <= ETA_CPRIME / eta**2 + MORREY_SLACK
                             for m in cert.morrey),
    }
    bc = dict(cert.bound_checks)
    bc.update(extra)
    new_cert = SurgeryCertificate(cert.epsilon, cert.n, cert.delta, eta,
                                  cert.input_length, cert.steps, cert.T_I,
                                  cert.T_II, cert.N, cert.output_lengths,
                                  cert.morrey, bc)
    return SurgeryResult(result.pieces, new_cert)
