"""JSON schemas for spaces, curves, flows, surgery results, and atoms.

All artifacts are plain JSON with floats in shortest round-trip decimal
(Python's default); documents are dumped with sorted keys so that
save -> load -> save is byte-identical.  Curves serialize as vertex lists
only; edges are reconstructed as canonical geodesics on load, which
reproduces the same geometry because every stored edge is itself the
canonical geodesic between its endpoints.
"""

from __future__ import annotations

import json

from .curves import PiecewiseGeodesicCurve, from_vertices, point_curve
from .flows import AtomicDecomposition, EdgeFlow
from .spaces import GeodesicSpace, space_from_descriptor
from .surgery import SurgeryCertificate, SurgeryResult

SCHEMA_VERSION = 1


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1)


def _plain(value):
    """Recursively convert numpy scalars/containers to JSON-safe types."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, bool):
        return value
    if hasattr(value, "item"):
        return value.item()
    return value


def space_to_json(space: GeodesicSpace) -> dict:
    return space.descriptor()


def space_from_json(doc: dict) -> GeodesicSpace:
    return space_from_descriptor(doc)


def canonical_vertices(curve: PiecewiseGeodesicCurve) -> list:
    """Vertex list with zero-length edges dropped (geometry unchanged)."""
    pts = []
    for e in curve.edges:
        if e.length > 0.0:
            pts.append(list(e.start))
    if not pts:
        return [list(curve.start)]
    if not curve.closed:
        pts.append(list(curve.end))
    return pts


def curve_to_json(curve: PiecewiseGeodesicCurve) -> dict:
    return {"space": space_to_json(curve.space), "closed": curve.closed,
            "vertices": canonical_vertices(curve)}


def curve_from_json(doc: dict) -> PiecewiseGeodesicCurve:
    space = space_from_json(doc["space"])
    verts = doc["vertices"]
    if len(verts) == 1:
        return point_curve(space, verts[0])
    return from_vertices(space, verts, bool(doc["closed"]))


def flow_to_json(flow: EdgeFlow) -> dict:
    return {"space": space_to_json(flow.space),
            "nodes": [list(p) for p in flow.nodes],
            "edges": [{"from": i, "to": j, "flow": f} for i, j, f in flow.edges]}


def flow_from_json(doc: dict) -> EdgeFlow:
    space = space_from_json(doc["space"])
    nodes = tuple(tuple(float(c) for c in p) for p in doc["nodes"])
    edges = tuple((int(e["from"]), int(e["to"]), float(e["flow"]))
                  for e in doc["edges"])
    return EdgeFlow(space, nodes, edges)


def certificate_to_json(cert: SurgeryCertificate) -> dict:
    return _plain({
        "epsilon": cert.epsilon, "n": cert.n, "delta": cert.delta,
        "eta": cert.eta, "input_length": cert.input_length,
        "steps": list(cert.steps), "T_I": cert.T_I, "T_II": cert.T_II,
        "N": cert.N, "output_lengths": list(cert.output_lengths),
        "morrey": list(cert.morrey), "bound_checks": cert.bound_checks,
    })


def certificate_from_json(doc: dict) -> SurgeryCertificate:
    return SurgeryCertificate(
        epsilon=doc["epsilon"], n=doc["n"], delta=doc["delta"],
        eta=doc["eta"], input_length=doc["input_length"],
        steps=tuple(doc["steps"]), T_I=doc["T_I"], T_II=doc["T_II"],
        N=doc["N"], output_lengths=tuple(doc["output_lengths"]),
        morrey=tuple(doc["morrey"]), bound_checks=doc["bound_checks"])


def result_to_json(input_curve: PiecewiseGeodesicCurve,
                   result: SurgeryResult) -> dict:
    return {"schema": "curvesurgery/result", "version": SCHEMA_VERSION,
            "input": curve_to_json(input_curve),
            "pieces": [curve_to_json(p) for p in result.pieces],
            "certificate": certificate_to_json(result.certificate)}


def result_from_json(doc: dict):
    if doc.get("schema") != "curvesurgery/result":
        raise ValueError("not a surgery result document")
    input_curve = curve_from_json(doc["input"])
    pieces = tuple(curve_from_json(p) for p in doc["pieces"])
    cert = certificate_from_json(doc["certificate"])
    return input_curve, SurgeryResult(pieces, cert)


def atoms_to_json(deco: AtomicDecomposition,
                  flow: EdgeFlow | None = None,
                  cycle_results: list[dict] | None = None) -> dict:
    doc = {
        "schema": "curvesurgery/atoms", "version": SCHEMA_VERSION,
        "space": space_to_json(deco.space),
        "epsilon": deco.epsilon,
        "atoms": [{"lambda": lam, "curve": curve_to_json(c),
                   "morrey": {"lo": m["lo"], "hi": m["hi"]}}
                  for (lam, c), m in zip(deco.atoms, deco.morrey)],
        "cycles": [{"weight": w, "nodes": list(nodes)}
                   for w, nodes in deco.cycles],
        "mass_bound": deco.mass_bound,
        "lambda_sum": deco.lambda_sum,
        "checks": _plain(deco.checks),
        "certificates": [certificate_to_json(c) for c in deco.certificates],
    }
    if flow is not None:
        doc["input_flow"] = flow_to_json(flow)
    if cycle_results is not None:
        doc["cycle_results"] = cycle_results
    return doc


def battery_to_json(centers, levels, slope: float, truncation: float) -> dict:
    return {"schema": "curvesurgery/battery", "version": SCHEMA_VERSION,
            "centers": [list(map(float, c)) for c in centers],
            "levels": [float(v) for v in levels],
            "C": float(slope), "M": float(truncation)}


def battery_from_json(doc: dict):
    if doc.get("schema") not in (None, "curvesurgery/battery"):
        raise ValueError("not a battery document")
    return doc["centers"], doc["levels"], float(doc["C"]), float(doc["M"])
