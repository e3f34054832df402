"""Acceptance suite: one test per criterion, each printing a pass/fail line
with its runtime.  Tolerances are fixed here, not tuned at runtime."""

import copy
import json
import time

import numpy as np
import pytest

from curvesurgery import (ETA_CPRIME, THEOREM_CONSTANT, EuclideanSpace,
                          SurgeryParams, TaxicabPlane, evaluate_battery,
                          from_vertices, geodesic_sampling,
                          lemma_length_factor, lemma_morrey_threshold,
                          morrey_norm, standard_battery, surgery, surgery_eta,
                          validate_eta_constants, verify_atoms, verify_surgery)
from curvesurgery import serialize
from curvesurgery.flows import atomic_decomposition, cycle_decompose, cycles_reproduce_flow
from curvesurgery.fixtures import (random_flow, random_polygon,
                                   random_walk_loop, smooth_loop, unit_square)
from oracles import morrey_grid_oracle


def report(num, ok, took, limit, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"\ncriterion {num}: {status} ({took:.1f}s / limit {limit:.0f}s) {detail}")
    assert ok, f"criterion {num}: {detail}"
    assert took <= limit, f"criterion {num} exceeded its runtime limit"


def test_criterion_1_geodesic_morrey_norm():
    t0 = time.time()
    rng = np.random.default_rng(101)
    spaces = [EuclideanSpace(2), EuclideanSpace(3), EuclideanSpace(4),
              TaxicabPlane()]
    ok = True
    for k in range(100):
        space = spaces[k % len(spaces)]
        p = rng.uniform(-5, 5, space.dim)
        q = p + rng.uniform(0.1, 4.0) * rng.normal(size=space.dim)
        seg = from_vertices(space, [tuple(p), tuple(q)], closed=False)
        est = morrey_norm(seg)
        ok &= est.converged and est.width <= 1e-6
        ok &= est.lo <= 2.0 + 1e-9 and est.hi >= 2.0 - 1e-9
    report(1, ok, time.time() - t0, 10.0, "100 segments, Morrey = 2 +- 1e-6")


def test_criterion_2_morrey_oracle_agreement():
    t0 = time.time()
    rng = np.random.default_rng(202)
    ok = True
    detail = []
    for k in range(30):
        n = int(rng.integers(4, 13))
        poly = random_polygon(3000 + k, n)
        est = morrey_norm(poly, tol=1e-3)
        oracle, _ = morrey_grid_oracle(poly, grid_n=40)
        below = oracle <= est.hi + 1e-9          # oracle never exceeds hi
        above = est.lo <= oracle + 1e-3          # oracle error bound 1e-3
        if not (below and above):
            detail.append(f"poly{k}: lo={est.lo} oracle={oracle} hi={est.hi}")
        ok &= below and above
    est = morrey_norm(unit_square(), tol=1e-4)
    target = 4 * np.sqrt(2)
    square_ok = abs(est.lo - target) <= 1e-3 and abs(est.hi - target) <= 1e-3
    ok &= square_ok
    report(2, ok, time.time() - t0, 120.0,
           f"30 polygons bracket the grid oracle; square = 4*sqrt(2) "
           f"{'ok' if square_ok else 'FAIL'} {'; '.join(detail)}")


def _criterion3_curves():
    sizes = np.round(np.geomspace(20, 500, 50)).astype(int)
    curves = []
    for i, size in enumerate(sizes):
        if i % 5 == 4:
            curves.append(random_walk_loop(1000 + i, min(int(size), 120),
                                           step=0.35 / np.sqrt(size)))
        else:
            curves.append(smooth_loop(2000 + i, int(size), harmonics=6,
                                      wobble=0.3))
    return curves


def test_criterion_3_surgery_lemma_bounds():
    t0 = time.time()
    ok = True
    bad = []
    for ci, curve in enumerate(_criterion3_curves()):
        L = curve.length
        for eps in (0.1, 0.25, 0.5):
            for n in (4, 16, 64):
                r = surgery(curve, SurgeryParams(epsilon=eps, n=n))
                cert = r.certificate
                bc = cert.bound_checks
                total = sum(p.length for p in r.pieces)
                a = total <= lemma_length_factor(eps, n) * L + 1e-9 * L
                thr = lemma_morrey_threshold(eps, n)
                b = all(m["hi"] <= thr + 1e-6 for m in cert.morrey)
                c = (cert.T_I <= L / ((1 - eps) * cert.delta) + 1e-9
                     and cert.T_II <= 3 * cert.T_I / n + 1e-9)
                d = bc["identity_ok"] and bc["battery_size"] == 50
                if not (a and b and c and d):
                    bad.append((ci, eps, n, a, b, c, d))
                ok &= a and b and c and d
    report(3, ok, time.time() - t0, 600.0,
           f"50 curves x 9 parameter pairs; failures: {bad[:4]}")


def test_criterion_4_corollary_constants():
    t0 = time.time()
    sweep = validate_eta_constants(grid=10_000)
    ok = bool(sweep["ok"])
    for seed, size in [(71, 30), (72, 80), (73, 150)]:
        curve = smooth_loop(seed, size)
        for eta in (0.25, 0.5, 0.75):
            r = surgery_eta(curve, eta)
            bc = r.certificate.bound_checks
            ok &= bc["total_output_length"] <= (1 + eta) * curve.length + 1e-9
            ok &= all(m["hi"] <= ETA_CPRIME / eta**2 + 1e-6
                      for m in r.certificate.morrey)
    report(4, ok, time.time() - t0, 300.0,
           f"c=1/15, C'=524 sweep margins: length {sweep['length_margin']:.2e}, "
           f"morrey {sweep['morrey_margin']:.2e}; eta runs bounded")


def test_criterion_5_atomic_decomposition():
    t0 = time.time()
    ok = True
    bad = []
    for k in range(20):
        flow = random_flow(500 + k, n_nodes=int(np.random.default_rng(k).integers(12, 200)),
                           n_cycles=int(np.random.default_rng(k + 1).integers(2, 11)))
        for eps in (0.1, 0.5):
            deco = atomic_decomposition(flow, eps)
            mass_ok = deco.lambda_sum <= (1 + eps) * deco.mass_bound \
                + 1e-9 * max(deco.mass_bound, 1.0)
            mor_ok = all(m["hi"] <= THEOREM_CONSTANT / eps**2 + 1e-6
                         for m in deco.morrey)
            mor_ok &= all(m["hi"] <= ETA_CPRIME / eps**2 + 1e-6
                          for m in deco.morrey)
            rep_ok = deco.checks["battery_ok"]
            bnd_ok = deco.checks["boundary_residual"] == 0.0
            if not (mass_ok and mor_ok and rep_ok and bnd_ok):
                bad.append((k, eps, mass_ok, mor_ok, rep_ok, bnd_ok))
            ok &= mass_ok and mor_ok and rep_ok and bnd_ok
    report(5, ok, time.time() - t0, 300.0,
           f"20 flows x eps in (0.1, 0.5); failures: {bad[:4]}")


def test_criterion_6_sampling_lemma():
    t0 = time.time()
    rng = np.random.default_rng(606)
    e2 = EuclideanSpace(2)
    ok = True
    bad = []
    for k in range(50):
        n = int(rng.integers(8, 40))
        pts = np.cumsum(rng.normal(size=(n, 2)) * 0.4, axis=0)
        curve = from_vertices(e2, pts, closed=False)
        L = curve.length
        for delta in (L / 3, L / 10, L / 100):
            s = geodesic_sampling(curve, delta)
            length_ok = s.length <= L * (1 + 1e-12)
            dev_ok = _sampling_deviation_ok(curve, s, delta)
            if not (length_ok and dev_ok):
                bad.append((k, delta, length_ok, dev_ok))
            ok &= length_ok and dev_ok
        # battery values converge monotonically along delta halvings
        battery = standard_battery(e2, pts, 8, seed=k)
        base, ebase = evaluate_battery(curve, battery, 2048)
        diffs = []
        allows = []
        for j in range(4):
            delta = L / 3 / 2**j
            vj, ej = evaluate_battery(geodesic_sampling(curve, delta),
                                      battery, 2048)
            diffs.append(np.abs(vj - base))
            allows.append(ej + ebase)
        for a, b, ea, eb in zip(diffs[:-1], diffs[1:], allows[:-1], allows[1:]):
            mono = np.all(b <= a + ea + eb + 1e-12)
            if not mono:
                bad.append((k, "monotone"))
            ok &= bool(mono)
    report(6, ok, time.time() - t0, 120.0,
           f"50 open curves; failures: {bad[:4]}")


def _sampling_deviation_ok(curve, sampled, delta):
    k = int(np.ceil(curve.length / delta))
    src = np.array([min(j * delta, curve.length) for j in range(k + 1)])
    dst = np.concatenate([[0], np.cumsum(
        [curve.space.distance(curve.point_at(a), curve.point_at(b))
         for a, b in zip(src[:-1], src[1:])])])
    for a, b, sa, sb in zip(src[:-1], src[1:], dst[:-1], dst[1:]):
        for u in np.linspace(0, 1, 5):
            p = curve.point_at(a + u * (b - a))
            q = sampled.point_at(min(sa + u * (sb - sa), sampled.length))
            if curve.space.distance(p, q) > 2 * delta * (1 + 1e-9):
                return False
    return True


def test_criterion_7_quadrature_error_bound():
    t0 = time.time()
    rng = np.random.default_rng(707)
    e2 = EuclideanSpace(2)
    ok = True
    m = 64
    pairs = 0
    while pairs < 100:
        n = int(rng.integers(3, 15))
        closed = bool(rng.integers(0, 2))
        pts = rng.uniform(-2, 2, size=(n, 2))
        try:
            curve = from_vertices(e2, pts, closed=closed)
        except ValueError:
            continue
        battery = standard_battery(e2, pts, 4, seed=pairs)
        v1, _ = evaluate_battery(curve, battery, m)
        v16, _ = evaluate_battery(curve, battery, 16 * m)
        for form, a, b in zip(battery, v1, v16):
            bound = form.f_lip * form.pi_lip * curve.length**2 / m
            ok &= abs(a - b) <= bound + 1e-12
            pairs += 1
            if pairs >= 100:
                break
    report(7, ok, time.time() - t0, 60.0, "100 (curve, form) pairs")


def _numeric_paths(node, prefix=()):
    if isinstance(node, dict):
        for k, v in node.items():
            yield from _numeric_paths(v, prefix + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _numeric_paths(v, prefix + (i,))
    elif isinstance(node, (int, float)) and not isinstance(node, bool):
        yield prefix


def _mutate(doc, path):
    out = copy.deepcopy(doc)
    node = out
    for k in path[:-1]:
        node = node[k]
    node[path[-1]] = node[path[-1]] * 1.001 + 1e-9
    return out


def test_criterion_8_tamper_resistance():
    t0 = time.time()
    sq = unit_square()
    r = surgery(sq, SurgeryParams(epsilon=0.6, n=4, battery_size=12,
                                  identity_m=32))
    doc = json.loads(serialize.dumps(serialize.result_to_json(sq, r)))
    assert all(c.ok for c in verify_surgery(doc))
    missed = []
    n_fields = 0
    for path in _numeric_paths(doc["certificate"], ("certificate",)):
        n_fields += 1
        bad = [c for c in verify_surgery(_mutate(doc, path), fail_fast=True)
               if not c.ok]
        if not bad:
            missed.append(path)

    flow = random_flow(808, n_nodes=12, n_cycles=3)
    deco = atomic_decomposition(flow, 0.5, battery_size=10, quadrature_m=32)
    adoc = json.loads(serialize.dumps(serialize.atoms_to_json(deco, flow=flow)))
    assert all(c.ok for c in verify_atoms(adoc))
    for path in _numeric_paths(adoc, ()):
        if path[0] == "version":
            continue
        n_fields += 1
        bad = [c for c in verify_atoms(_mutate(adoc, path), fail_fast=True)
               if not c.ok]
        if not bad:
            missed.append(path)
    ok = not missed
    report(8, ok, time.time() - t0, 30.0,
           f"{n_fields} fields mutated; undetected: {missed[:5]}")
