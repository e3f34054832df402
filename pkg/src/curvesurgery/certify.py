"""Independent re-verification of stored certificates.

Nothing in a stored artifact is trusted: the verifier replays every cut
from its (t, t') parameters on the input curve, recomputes every derived
quantity (lengths, small-edge counts, Morrey intervals, thresholds,
counters, battery residuals) and compares against the stored values at
1e-12 relative tolerance, then re-checks every inequality.  Any mutated
numeric field therefore fails a named check: either the replay no longer
matches, or a recomputed derived value disagrees, or a bound breaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .currents import WeightedCurrent, boundary_residual, evaluate_battery, standard_battery
from .curves import PiecewiseGeodesicCurve, small_edge_count
from .cuts import basic_cut
from .flows import cycles_reproduce_flow
from .morrey import morrey_norm, morrey_upper_bound_edges
from .serialize import (canonical_vertices, curve_from_json, flow_from_json,
                        result_from_json)
from .surgery import lemma_length_factor, lemma_morrey_threshold

RTOL = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


class _FailFast(Exception):
    pass


class _Recorder:
    def __init__(self, fail_fast: bool = False):
        self.checks: list[Check] = []
        self.fail_fast = fail_fast

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append(Check(name, bool(ok), detail))
        if self.fail_fast and not ok:
            raise _FailFast()

    def close_to(self, name: str, stored, recomputed, rtol=RTOL):
        if stored is None or recomputed is None:
            self.add(name, stored is None and recomputed is None,
                     f"stored={stored} recomputed={recomputed}")
            return
        err = abs(float(stored) - float(recomputed))
        tol = rtol * max(abs(float(recomputed)), 1.0)
        self.add(name, err <= tol,
                 f"stored={stored} recomputed={recomputed} err={err:.3e}")

    def integral(self, name: str, stored, expected=None):
        ok = isinstance(stored, int) and not isinstance(stored, bool)
        if ok and expected is not None:
            ok = stored == expected
        self.add(name, ok, f"stored={stored!r} expected={expected!r}")

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]


def _same_vertices(a: PiecewiseGeodesicCurve, b: PiecewiseGeodesicCurve) -> bool:
    va, vb = canonical_vertices(a), canonical_vertices(b)
    if len(va) != len(vb) or a.closed != b.closed:
        return False
    arr_a, arr_b = np.asarray(va), np.asarray(vb)
    scale = max(1.0, float(np.abs(arr_a).max()))
    return bool(np.all(np.abs(arr_a - arr_b) <= RTOL * scale))


def _verify_morrey_entry(rec: _Recorder, label: str, piece, entry: dict):
    if entry["method"] == "edges":
        rec.close_to(f"{label}.hi", entry["hi"], morrey_upper_bound_edges(piece))
        rec.close_to(f"{label}.lo", entry["lo"], 0.0)
    else:
        est = morrey_norm(piece, stop_below=entry["stop_below"],
                          max_boxes=int(entry["max_boxes"]))
        rec.close_to(f"{label}.hi", entry["hi"], est.hi)
        rec.close_to(f"{label}.lo", entry["lo"], est.lo)


def verify_surgery(doc: dict, fail_fast: bool = False) -> list[Check]:
    """Replay a stored surgery result; returns the full check list."""
    rec = _Recorder(fail_fast)
    try:
        _verify_surgery(rec, doc)
    except _FailFast:
        pass
    except Exception as err:  # malformed documents fail, never crash
        rec.fail_fast = False
        rec.add("document_wellformed", False, f"{type(err).__name__}: {err}")
    return rec.checks


def _verify_surgery(rec: _Recorder, doc: dict):
    input_curve, result = result_from_json(doc)
    _verify_surgery_core(rec, input_curve, result, "")


def _verify_surgery_core(rec: _Recorder, input_curve, result, px: str):
    cert = result.certificate
    eps, n, delta = cert.epsilon, cert.n, cert.delta
    rec.integral(f"{px}n_integral", cert.n)
    rec.integral(f"{px}T_I_integral", cert.T_I)
    rec.integral(f"{px}T_II_integral", cert.T_II)
    rec.integral(f"{px}N_integral", cert.N)
    L = input_curve.length
    rec.close_to(f"{px}input_length", cert.input_length, L)
    run_lens = np.diff(input_curve.coarsest_resolution())
    delta_max = float(run_lens[run_lens > 0].min()) if len(run_lens) else 0.0
    rec.add(f"{px}delta_admissible", 0 < delta <= delta_max * (1 + 1e-9),
            f"delta={delta} min_edge={delta_max}")

    pieces = result.pieces
    rec.add(f"{px}piece_count", cert.N == len(pieces) == len(cert.morrey),
            f"N={cert.N} pieces={len(pieces)}")
    bc_boxes = cert.bound_checks.get("morrey_max_boxes", 200_000)
    rec.integral(f"{px}morrey_max_boxes_integral", bc_boxes)

    # replay the cut sequence
    cur = input_curve
    t1 = t2 = 0
    prev_len = L
    for k, step in enumerate(cert.steps):
        label = f"{px}step[{k + 1}]"
        rec.integral(f"{label}.index", step["index"], k + 1)
        if step["type"] == "I":
            t1 += 1
        elif step["type"] == "II":
            t2 += 1
        else:
            rec.add(f"{label}.type", False, f"unknown cut type {step['type']}")
            break
        out = basic_cut(cur, step["t"], step["t_prime"])
        if k < len(pieces):
            rec.add(f"{label}.piece_match", _same_vertices(out.excised, pieces[k]),
                    "excised piece differs from stored piece")
        rec.close_to(f"{label}.inserted_length", step["inserted_length"],
                     out.inserted_length)
        rec.close_to(f"{label}.remainder_length", step["remainder_length"],
                     out.remainder.length)
        rec.close_to(f"{label}.excised_length", step["excised_length"],
                     out.excised.length)
        m_b = small_edge_count(cur, delta)
        m_a = small_edge_count(out.remainder, delta)
        rec.add(f"{label}.m_before", m_b == step["m_before"],
                f"stored={step['m_before']} recomputed={m_b}")
        rec.add(f"{label}.m_after", m_a == step["m_after"],
                f"stored={step['m_after']} recomputed={m_a}")
        if step["type"] == "I":
            beta = (step["t_prime"] - step["t"]) % cur.length
            rec.close_to(f"{label}.beta", step["beta"], beta)
            rec.add(f"{label}.beta_range",
                    delta * (1 - 1e-9) <= beta <= cur.length / 2 * (1 + 1e-9),
                    f"beta={beta}")
            rec.add(f"{label}.feasible",
                    out.inserted_length <= eps * beta * (1 + 1e-9),
                    "cut pair does not violate the lsi inequality")
            rec.add(f"{label}.length_drop",
                    out.remainder.length <= cur.length - (1 - eps) * beta
                    + 1e-9 * max(L, 1.0), "type I length drop fails")
            rec.add(f"{label}.total_length",
                    out.remainder.length + out.excised.length
                    <= cur.length + 2 * eps * beta + 1e-9 * max(L, 1.0),
                    "type I combined length fails")
            rec.add(f"{label}.m_growth", m_a <= m_b + 3, f"{m_b} -> {m_a}")
        else:
            window = out.excised.length - out.inserted_length
            rec.close_to(f"{label}.window_length", step["window_length"], window)
            rec.add(f"{label}.window_cap",
                    window <= 2 * delta / eps + 1e-9 * max(L, 1.0),
                    f"window={window}")
            rec.add(f"{label}.length_monotone",
                    out.remainder.length <= cur.length + 1e-9 * max(L, 1.0),
                    "type II remainder grew")
            rec.add(f"{label}.total_length",
                    out.remainder.length + out.excised.length
                    <= cur.length + 4 * delta / eps + 1e-9 * max(L, 1.0),
                    "type II combined length fails")
            rec.add(f"{label}.m_drop", m_a <= m_b - n, f"{m_b} -> {m_a}")
        # step-level morrey bookkeeping must agree with the piece entry
        if k < len(cert.morrey):
            entry = cert.morrey[k]
            rec.close_to(f"{label}.morrey_lo", step["morrey_lo"], entry["lo"])
            rec.close_to(f"{label}.morrey_hi", step["morrey_hi"], entry["hi"])
            rec.close_to(f"{label}.morrey_stop", step["morrey_stop"],
                         entry["stop_below"])
            expected_thr = (lemma_morrey_threshold(eps, n) if step["type"] == "I"
                            else 2.0 * (n + 2.0 / eps + 2.0))
            rec.close_to(f"{label}.morrey_threshold", step["morrey_threshold"],
                         expected_thr)
            rec.close_to(f"{label}.morrey_stop_derived", step["morrey_stop"],
                         expected_thr + 1e-6)
            rec.integral(f"{label}.morrey_max_boxes", step["morrey_max_boxes"],
                         int(bc_boxes))
        if step["type"] == "I":
            floor = step["minimality_floor"]
            rec.add(f"{label}.floor_range",
                    delta * (1 - 1e-9) <= floor <= step["beta"] * (1 + 1e-9),
                    f"floor={floor}")
            rec.close_to(f"{label}.minimality_slack", step["minimality_slack"],
                         step["beta"] - floor)
        rec.add(f"{label}.monotone", out.remainder.length <= prev_len
                + 1e-9 * max(L, 1.0), "remainder length increased")
        prev_len = out.remainder.length
        cur = out.remainder
    rec.add(f"{px}final_piece_match", _same_vertices(cur, pieces[-1]),
            "final piece differs from the replayed remainder")
    rec.add(f"{px}counters", t1 == cert.T_I and t2 == cert.T_II,
            f"stored T_I={cert.T_I} T_II={cert.T_II}, replayed {t1},{t2}")
    rec.add(f"{px}step_count", cert.N == t1 + t2 + 1, f"N={cert.N}")

    # lengths and global bounds
    out_lengths = [p.length for p in pieces]
    for k, (stored, got) in enumerate(zip(cert.output_lengths, out_lengths)):
        rec.close_to(f"{px}output_length[{k}]", stored, got)
    bc = cert.bound_checks
    factor = lemma_length_factor(eps, n)
    threshold = lemma_morrey_threshold(eps, n)
    rec.close_to(f"{px}length_factor", bc["length_factor"], factor)
    rec.close_to(f"{px}length_bound", bc["length_bound"], factor * L)
    total = float(np.sum(out_lengths))
    rec.close_to(f"{px}total_output_length", bc["total_output_length"], total)
    rec.add(f"{px}length_bound_holds", total <= factor * L + 1e-9 * max(L, 1.0),
            f"total={total} bound={factor * L}")
    rec.close_to(f"{px}morrey_threshold", bc["morrey_threshold"], threshold)
    rec.close_to(f"{px}t1_bound", bc["t1_bound"], L / ((1 - eps) * delta))
    rec.close_to(f"{px}t2_bound", bc["t2_bound"], 3.0 * cert.T_I / n)
    rec.add(f"{px}t1_bound_holds", cert.T_I <= L / ((1 - eps) * delta) + 1e-9, "")
    rec.add(f"{px}t2_bound_holds", cert.T_II <= 3.0 * cert.T_I / n + 1e-9, "")

    from .cuts import MORREY_SLACK
    rec.close_to(f"{px}morrey_slack", bc["morrey_slack"], MORREY_SLACK)
    final_entry = cert.morrey[-1]
    rec.close_to(f"{px}final_morrey_stop", final_entry["stop_below"],
                 threshold + MORREY_SLACK)
    for k, entry in enumerate(cert.morrey):
        rec.integral(f"{px}morrey[{k}].max_boxes", entry["max_boxes"],
                     int(bc_boxes) if entry["method"] == "bnb" else 0)
    for k, (piece, entry) in enumerate(zip(pieces, cert.morrey)):
        _verify_morrey_entry(rec, f"{px}morrey[{k}]", piece, entry)
        rec.add(f"{px}morrey[{k}].bound_holds",
                entry["hi"] <= threshold + bc["morrey_slack"] + RTOL,
                f"hi={entry['hi']} threshold={threshold}")

    if cert.eta is not None:
        eta = cert.eta
        rec.close_to(f"{px}eta_length_bound", bc["eta_length_bound"], (1 + eta) * L)
        rec.add(f"{px}eta_length_holds", total <= (1 + eta) * L + 1e-9 * max(L, 1.0), "")
        from .surgery import ETA_CPRIME
        rec.close_to(f"{px}eta_morrey_bound", bc["eta_morrey_bound"],
                     ETA_CPRIME / eta**2)
        rec.add(f"{px}eta_morrey_holds",
                all(m["hi"] <= ETA_CPRIME / eta**2 + bc["morrey_slack"] + RTOL
                    for m in cert.morrey), "")

    if "identity_max_residual" in bc:
        rec.integral(f"{px}battery_size_integral", bc["battery_size"])
        rec.integral(f"{px}battery_seed_integral", bc["battery_seed"])
        rec.integral(f"{px}identity_m_integral", bc["identity_m"])
        battery = standard_battery(input_curve.space,
                                   np.asarray(input_curve.vertices()),
                                   int(bc["battery_size"]),
                                   int(bc["battery_seed"]))
        m_q = int(bc["identity_m"])
        vin, ein = evaluate_battery(input_curve, battery, m_q)
        vout, eout = evaluate_battery(
            WeightedCurrent.of(*[(1.0, p) for p in pieces]), battery, m_q)
        resid = float(np.abs(vin - vout).max())
        allow = float((ein + eout).max())
        rec.close_to(f"{px}identity_max_residual", bc["identity_max_residual"],
                     resid, rtol=1e-9)
        rec.close_to(f"{px}identity_allowance", bc["identity_allowance"], allow,
                     rtol=1e-9)
        rec.add(f"{px}identity_holds",
                bool(np.all(np.abs(vin - vout) <= ein + eout + 1e-12)),
                f"residual={resid} allowance={allow}")


def verify_atoms(doc: dict, fail_fast: bool = False) -> list[Check]:
    """Re-verify an atomic decomposition document."""
    rec = _Recorder(fail_fast)
    try:
        _verify_atoms(rec, doc)
    except _FailFast:
        pass
    except Exception as err:  # malformed documents fail, never crash
        rec.fail_fast = False
        rec.add("document_wellformed", False, f"{type(err).__name__}: {err}")
    return rec.checks


def _verify_atoms(rec: _Recorder, doc: dict):
    from .serialize import certificate_from_json, space_from_json
    from .curves import from_vertices
    from .surgery import SurgeryResult
    eps = float(doc["epsilon"])
    atoms = [(float(a["lambda"]), curve_from_json(a["curve"]), a["morrey"])
             for a in doc["atoms"]]
    certs = [certificate_from_json(c) for c in doc["certificates"]]
    for k, a in enumerate(doc["atoms"]):
        rec.add(f"atom[{k}].space", a["curve"]["space"] == doc["space"],
                "atom curve space differs from the document space")

    flow = None
    cycles = []
    if "input_flow" in doc:
        flow = flow_from_json(doc["input_flow"])
        rec.add("flow_space", doc["input_flow"]["space"] == doc["space"],
                "flow space differs from the document space")
        rec.add("flow_edges_integral",
                all(isinstance(e["from"], int) and isinstance(e["to"], int)
                    for e in doc["input_flow"]["edges"]),
                "edge endpoints must be integer node indices")
        res = flow.divergence_residuals()
        rec.add("divergence_free", len(res) == 0 or res.max() <= 1e-9,
                f"worst node residual {res.max() if len(res) else 0:.3e}")
        cycles = [(float(c["weight"]), list(c["nodes"])) for c in doc["cycles"]]
        for ci, (_, nodes) in enumerate(cycles):
            rec.add(f"cycle[{ci}].nodes_integral",
                    all(isinstance(v, int) for v in nodes), "")
        rec.add("cycle_weights_positive", all(w > 0 for w, _ in cycles), "")
        rec.add("cycles_reproduce_flow",
                cycles_reproduce_flow(flow, cycles) <= 1e-9, "")
        rec.close_to("mass_bound", doc["mass_bound"], flow.mass_upper_bound())

    # atoms tie to per-cycle certificates: lambda = cycle weight * length;
    # each embedded certificate is replayed in full against its cycle curve
    lam_sum = 0.0
    idx = 0
    weights = [w for w, _ in cycles] or [None] * len(certs)
    rec.add("certificate_count", not cycles or len(certs) == len(cycles),
            f"{len(certs)} certificates vs {len(cycles)} cycles")
    for c_i, cert in enumerate(certs):
        w = weights[c_i] if c_i < len(weights) else None
        n_pieces = int(cert.N)
        piece_curves = []
        for k in range(n_pieces):
            if idx >= len(atoms):
                rec.add("atom_count", False, "fewer atoms than certificate pieces")
                return
            lam, curve, mor = atoms[idx]
            piece_curves.append(curve)
            rec.add(f"atom[{idx}].closed", curve.closed, "")
            rec.add(f"atom[{idx}].lambda_nonneg", lam >= 0, f"lambda={lam}")
            if w is not None:
                rec.close_to(f"atom[{idx}].lambda", lam, w * curve.length)
            entry = cert.morrey[k]
            rec.close_to(f"atom[{idx}].morrey_hi", mor["hi"], entry["hi"])
            rec.close_to(f"atom[{idx}].morrey_lo", mor["lo"], entry["lo"])
            lam_sum += lam
            idx += 1
        if flow is not None and c_i < len(cycles):
            cyc_curve = from_vertices(flow.space,
                                      [flow.nodes[v] for v in cycles[c_i][1]],
                                      True)
            _verify_surgery_core(rec, cyc_curve,
                                 SurgeryResult(tuple(piece_curves), cert),
                                 f"cycle[{c_i}].")
    rec.add("atom_count", idx == len(atoms),
            f"{len(atoms)} atoms vs {idx} certificate pieces")
    rec.close_to("lambda_sum", doc["lambda_sum"], lam_sum)
    checks = doc["checks"]
    rec.close_to("mass_bound_stored", checks["mass_bound"], doc["mass_bound"])
    rec.close_to("mass_limit", checks["mass_limit"],
                 (1 + eps) * doc["mass_bound"])
    rec.add("mass_bound_holds",
            lam_sum <= (1 + eps) * doc["mass_bound"]
            + 1e-9 * max(doc["mass_bound"], 1.0),
            f"sum={lam_sum} limit={(1 + eps) * doc['mass_bound']}")
    from .surgery import ETA_CPRIME
    rec.close_to("morrey_bound", checks["morrey_bound"], ETA_CPRIME / eps**2)
    rec.add("morrey_bound_holds",
            all(m["hi"] <= ETA_CPRIME / eps**2 + 1e-6 + RTOL
                for *_, m in atoms), "")

    if flow is not None and atoms:
        space = space_from_json(doc["space"])
        rec.integral("battery_size_integral", checks["battery_size"])
        rec.integral("battery_seed_integral", checks["battery_seed"])
        rec.integral("quadrature_m_integral", checks["quadrature_m"])
        battery = standard_battery(space, np.asarray(flow.nodes),
                                   int(checks["battery_size"]),
                                   int(checks["battery_seed"]))
        m_q = int(checks["quadrature_m"])
        atom_current = WeightedCurrent(tuple(
            (lam / c.length, c) for lam, c, _ in atoms if c.length > 0))
        vin, ein = evaluate_battery(flow.as_current(), battery, m_q)
        vout, eout = evaluate_battery(atom_current, battery, m_q)
        resid = float(np.abs(vin - vout).max())
        rec.close_to("battery_max_residual", checks["battery_max_residual"],
                     resid, rtol=1e-9)
        rec.close_to("battery_allowance", checks["battery_allowance"],
                     float((ein + eout).max()), rtol=1e-9)
        rec.add("battery_holds",
                bool(np.all(np.abs(vin - vout) <= ein + eout + 1e-12)),
                f"residual={resid}")
        bres = boundary_residual(atom_current, battery)
        rec.close_to("boundary_residual_stored", checks["boundary_residual"], bres)
        rec.add("boundary_zero", bres == 0.0, f"residual={bres}")


def verify_document(doc: dict, fail_fast: bool = False) -> list[Check]:
    schema = doc.get("schema", "")
    if schema == "curvesurgery/result":
        return verify_surgery(doc, fail_fast)
    if schema == "curvesurgery/atoms":
        return verify_atoms(doc, fail_fast)
    raise ValueError(f"unknown document schema {schema!r}")
