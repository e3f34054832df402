import json
import subprocess
import sys

import numpy as np
import pytest

from curvesurgery import (EuclideanSpace, SurgeryParams, TaxicabPlane,
                          from_vertices, surgery, verify_document)
from curvesurgery import serialize
from curvesurgery.fixtures import random_flow, unit_square
from curvesurgery.flows import atomic_decomposition


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "curvesurgery.cli", *args],
                          capture_output=True, text=True)


@pytest.fixture(scope="module")
def square_result():
    sq = unit_square()
    r = surgery(sq, SurgeryParams(epsilon=0.6, n=4, battery_size=12,
                                  identity_m=32))
    return sq, r


def test_curve_roundtrip_byte_identical(square):
    doc = serialize.curve_to_json(square)
    s1 = serialize.dumps(doc)
    s2 = serialize.dumps(json.loads(s1))
    assert s1 == s2
    again = serialize.curve_from_json(json.loads(s1))
    assert again.vertices() == square.vertices()
    assert again.closed and again.length == square.length


def test_curve_roundtrip_taxicab():
    c = from_vertices(TaxicabPlane(), [(0, 0), (1, 2), (3, 1)], closed=True)
    again = serialize.curve_from_json(serialize.curve_to_json(c))
    assert again.vertices() == c.vertices()
    assert again.length == c.length


def test_curve_roundtrip_awkward_floats(e2):
    rng = np.random.default_rng(99)
    pts = rng.standard_normal((9, 2)) * np.pi
    c = from_vertices(e2, pts, closed=True)
    doc = json.loads(serialize.dumps(serialize.curve_to_json(c)))
    again = serialize.curve_from_json(doc)
    assert again.vertices() == c.vertices()  # bit-exact float round trip


def test_flow_roundtrip():
    flow = random_flow(5, n_nodes=15, n_cycles=4)
    s1 = serialize.dumps(serialize.flow_to_json(flow))
    again = serialize.flow_from_json(json.loads(s1))
    assert again == flow
    assert serialize.dumps(serialize.flow_to_json(again)) == s1


def test_result_roundtrip_and_verify(square_result):
    sq, r = square_result
    doc = serialize.result_to_json(sq, r)
    s1 = serialize.dumps(doc)
    doc2 = json.loads(s1)
    assert serialize.dumps(doc2) == s1
    checks = verify_document(doc2)
    assert all(c.ok for c in checks)
    curve2, result2 = serialize.result_from_json(doc2)
    assert result2.certificate == r.certificate


def test_atoms_roundtrip_and_verify():
    flow = random_flow(8, n_nodes=14, n_cycles=3)
    deco = atomic_decomposition(flow, 0.5, battery_size=10, quadrature_m=32)
    doc = serialize.atoms_to_json(deco, flow=flow)
    s1 = serialize.dumps(doc)
    doc2 = json.loads(s1)
    assert serialize.dumps(doc2) == s1
    assert all(c.ok for c in verify_document(doc2))


def test_cli_surgery_verify_roundtrip(tmp_path, square):
    curve_path = tmp_path / "square.json"
    out_path = tmp_path / "result.json"
    svg_path = tmp_path / "result.svg"
    curve_path.write_text(serialize.dumps(serialize.curve_to_json(square)))
    r = run_cli("surgery", "--eta", "0.5", "--in", str(curve_path),
                "--out", str(out_path), "--svg", str(svg_path))
    assert r.returncode == 0, r.stderr
    assert out_path.exists() and svg_path.exists()
    assert svg_path.read_text().startswith("<svg")
    v = run_cli("verify", "--in", str(out_path))
    assert v.returncode == 0, v.stderr


def test_cli_verify_tamper_exits_2(tmp_path, square):
    curve_path = tmp_path / "square.json"
    out_path = tmp_path / "result.json"
    curve_path.write_text(serialize.dumps(serialize.curve_to_json(square)))
    r = run_cli("surgery", "--epsilon", "0.6", "--n", "4",
                "--in", str(curve_path), "--out", str(out_path))
    assert r.returncode == 0, r.stderr
    doc = json.loads(out_path.read_text())
    doc["certificate"]["output_lengths"][0] += 1e-3
    tampered = tmp_path / "tampered.json"
    tampered.write_text(serialize.dumps(doc))
    v = run_cli("verify", "--in", str(tampered))
    assert v.returncode == 2
    assert "output_length" in v.stderr  # names the violated bound


def test_cli_morrey_segment(tmp_path, e2):
    seg = from_vertices(e2, [(0, 0), (3, 4)], closed=False)
    path = tmp_path / "seg.json"
    path.write_text(serialize.dumps(serialize.curve_to_json(seg)))
    r = run_cli("morrey", "--in", str(path), "--tol", "1e-6")
    assert r.returncode == 0
    out = json.loads(r.stdout)
    assert out["lo"] <= 2.0 <= out["hi"] + 1e-9
    assert out["hi"] - out["lo"] <= 1e-6


def test_cli_decompose_and_eval(tmp_path):
    flow = random_flow(4, n_nodes=12, n_cycles=3)
    fpath = tmp_path / "flow.json"
    fpath.write_text(serialize.dumps(serialize.flow_to_json(flow)))
    out = tmp_path / "atoms.json"
    r = run_cli("decompose", "--epsilon", "0.5", "--in", str(fpath),
                "--out", str(out), "--svg", str(tmp_path / "atoms.svg"))
    assert r.returncode == 0, r.stderr
    v = run_cli("verify", "--in", str(out))
    assert v.returncode == 0, v.stderr
    battery = serialize.battery_to_json([[0.3, 0.4], [0.7, 0.2]], [0.5, 0.9],
                                        1.0, 2.0)
    bpath = tmp_path / "battery.json"
    bpath.write_text(serialize.dumps(battery))
    e = run_cli("eval", "--in", str(out), "--battery", str(bpath), "--m", "256")
    assert e.returncode == 0, e.stderr
    rows = json.loads(e.stdout)
    assert len(rows) == 2 and all("value" in row for row in rows)


def test_cli_sample(tmp_path, square):
    cpath = tmp_path / "sq.json"
    cpath.write_text(serialize.dumps(serialize.curve_to_json(square)))
    r = run_cli("sample", "--in", str(cpath), "--delta", "2.0",
                "--out", str(tmp_path / "s.json"))
    assert r.returncode == 0
    doc = json.loads((tmp_path / "s.json").read_text())
    c = serialize.curve_from_json(doc)
    assert c.length == pytest.approx(2 * np.sqrt(2))


def test_cli_usage_errors(tmp_path):
    assert run_cli("bogus").returncode == 1
    assert run_cli("morrey", "--in", str(tmp_path / "missing.json")).returncode == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("morrey", "--in", str(bad)).returncode == 1
    notcurve = tmp_path / "notcurve.json"
    notcurve.write_text('{"vertices": [[0,0],[1,1]]}')
    r = run_cli("morrey", "--in", str(notcurve))
    assert r.returncode == 1
    assert "space" in r.stderr  # names the offending field
    cpath = tmp_path / "c.json"
    cpath.write_text(serialize.dumps(serialize.curve_to_json(unit_square())))
    r = run_cli("surgery", "--in", str(cpath), "--out", str(tmp_path / "o.json"))
    assert r.returncode == 1  # neither eta nor epsilon given
