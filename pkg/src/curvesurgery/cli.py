"""Command line surface.

Subcommands: morrey, surgery, decompose, verify, sample, eval.  Exit codes:
0 success (all certificates pass), 1 usage or input errors, 2 certificate
verification failure.  The environment variable CURVE_SURGERY_THREADS caps
internal parallelism; the implementation is sequential, so any cap is
honored.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import serialize
from .certify import verify_document
from .cuts import CutVerificationError
from .currents import TestForm, cone_function, evaluate
from .curves import geodesic_sampling
from .flows import FlowError, atomic_decomposition
from .morrey import morrey_norm
from .render import render_atoms, render_surgery
from .surgery import SurgeryParams, surgery, surgery_eta


class UsageError(Exception):
    pass


def _threads_cap() -> int:
    raw = os.environ.get("CURVE_SURGERY_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"CURVE_SURGERY_THREADS={raw!r} is not an integer")


def _load(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"input file not found: {path}")
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}: invalid JSON ({err})")


def _load_curve(path: str):
    doc = _load(path)
    for field in ("space", "closed", "vertices"):
        if field not in doc:
            raise UsageError(f"{path}: curve document missing field {field!r}")
    try:
        return serialize.curve_from_json(doc)
    except (ValueError, KeyError) as err:
        raise UsageError(f"{path}: bad curve: {err}")


def _load_flow(path: str):
    doc = _load(path)
    for field in ("space", "nodes", "edges"):
        if field not in doc:
            raise UsageError(f"{path}: flow document missing field {field!r}")
    try:
        return serialize.flow_from_json(doc)
    except (ValueError, KeyError) as err:
        raise UsageError(f"{path}: bad flow: {err}")


def _write(path: str, doc: dict):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize.dumps(doc))
        fh.write("\n")


def cmd_morrey(args) -> int:
    curve = _load_curve(args.infile)
    est = morrey_norm(curve, tol=args.tol)
    print(json.dumps({"lo": est.lo, "hi": est.hi,
                      "witness_center": list(est.witness_center),
                      "witness_radius": est.witness_radius,
                      "converged": est.converged}, sort_keys=True))
    return 0


def cmd_surgery(args) -> int:
    curve = _load_curve(args.infile)
    if (args.eta is None) == (args.epsilon is None):
        raise UsageError("give exactly one of --eta or (--epsilon and --n)")
    try:
        if args.eta is not None:
            result = surgery_eta(curve, args.eta, delta=args.delta)
        else:
            if args.n is None:
                raise UsageError("--epsilon requires --n")
            result = surgery(curve, SurgeryParams(epsilon=args.epsilon,
                                                  n=args.n, delta=args.delta))
    except (ValueError, CutVerificationError, AssertionError) as err:
        raise UsageError(f"surgery failed: {err}")
    doc = serialize.result_to_json(curve, result)
    _write(args.out, doc)
    if args.svg:
        render_surgery(curve, result.pieces, args.svg, proj=tuple(args.proj))
    if not result.certificate.all_ok():
        print("certificate contains failed bounds", file=sys.stderr)
        return 2
    print(f"wrote {args.out}: N={result.certificate.N} pieces, "
          f"total length {result.certificate.bound_checks['total_output_length']:.6g}")
    return 0


def cmd_decompose(args) -> int:
    flow = _load_flow(args.infile)
    try:
        deco = atomic_decomposition(flow, args.epsilon)
    except FlowError as err:
        raise UsageError(f"decompose failed: {err}")
    doc = serialize.atoms_to_json(deco, flow=flow)
    _write(args.out, doc)
    if args.svg:
        render_atoms(deco, args.svg, proj=tuple(args.proj))
    if not deco.all_ok():
        print("decomposition checks failed", file=sys.stderr)
        return 2
    print(f"wrote {args.out}: {len(deco.atoms)} atoms, "
          f"lambda sum {deco.lambda_sum:.6g} <= {deco.checks['mass_limit']:.6g}")
    return 0


def cmd_verify(args) -> int:
    doc = _load(args.infile)
    try:
        checks = verify_document(doc)
    except (ValueError, KeyError) as err:
        raise UsageError(f"cannot verify {args.infile}: {err}")
    bad = [c for c in checks if not c.ok]
    if bad:
        for c in bad:
            print(f"FAIL {c.name}: {c.detail}", file=sys.stderr)
        print(f"{len(bad)} of {len(checks)} checks failed", file=sys.stderr)
        return 2
    print(f"all {len(checks)} checks passed")
    return 0


def cmd_sample(args) -> int:
    curve = _load_curve(args.infile)
    try:
        sampled = geodesic_sampling(curve, args.delta)
    except ValueError as err:
        raise UsageError(str(err))
    _write(args.out, serialize.curve_to_json(sampled))
    print(f"wrote {args.out}: length {sampled.length:.6g} "
          f"(input {curve.length:.6g})")
    return 0


def cmd_eval(args) -> int:
    doc = _load(args.infile)
    if doc.get("schema") == "curvesurgery/atoms":
        from .currents import WeightedCurrent
        curves = [(float(a["lambda"]), serialize.curve_from_json(a["curve"]))
                  for a in doc["atoms"]]
        current = WeightedCurrent(tuple(
            (lam / c.length, c) for lam, c in curves if c.length > 0))
        space = serialize.space_from_json(doc["space"])
    else:
        curve = _load_curve(args.infile)
        current = curve
        space = curve.space
    centers, levels, slope, M = serialize.battery_from_json(_load(args.battery))
    rows = []
    for k in range(1, len(centers) + 1):
        f = cone_function(space, np.asarray(centers[:k]), np.asarray(levels[:k]),
                          slope, M)
        form = TestForm(f, f, M, slope, slope, name=f"cone{k}")
        value, err = evaluate(current, form, args.m)
        rows.append({"name": form.name, "value": value, "error_bound": err})
    print(json.dumps(rows, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="curvesurgery",
        description="Certified surgery decompositions of closed "
                    "piecewise-geodesic curves and divergence-free flows.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("morrey", help="certified Morrey norm interval")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--tol", type=float, default=None)
    p.set_defaults(fn=cmd_morrey)

    p = sub.add_parser("surgery", help="decompose a closed curve")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--svg", default=None)
    p.add_argument("--proj", type=int, nargs=2, default=(0, 1))
    p.set_defaults(fn=cmd_surgery)

    p = sub.add_parser("decompose", help="atomic decomposition of a flow")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--svg", default=None)
    p.add_argument("--proj", type=int, nargs=2, default=(0, 1))
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("verify", help="re-verify a stored certificate")
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sample", help="piecewise-geodesic sampling at a scale")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("eval", help="evaluate a current against a battery")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--battery", required=True)
    p.add_argument("--m", type=int, default=1024)
    p.set_defaults(fn=cmd_eval)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage errors; this tool reserves 2
        # for certificate failures
        return 1 if exc.code not in (0, None) else 0
    try:
        _threads_cap()
        return args.fn(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
