import numpy as np
import pytest

from curvesurgery import (CutVerificationError, basic_cut, evaluate,
                          from_vertices, is_den_curve, is_lsi, morrey_norm,
                          small_edge_count, standard_battery, type1_cut,
                          type2_cut)
from curvesurgery.currents import WeightedCurrent, evaluate_battery
from curvesurgery.fixtures import slit_rectangle, zigzag_fixture


def assert_current_identity(original, rem, exc, m=512, size=16):
    battery = standard_battery(original.space,
                               np.asarray(original.vertices()), size, seed=5)
    vin, ein = evaluate_battery(original, battery, m)
    vout, eout = evaluate_battery(WeightedCurrent.of((1, rem), (1, exc)),
                                  battery, m)
    assert np.all(np.abs(vin - vout) <= ein + eout + 1e-12)


def test_basic_cut_square_into_triangles(square):
    out = basic_cut(square, 0.0, 2.0)
    assert out.remainder.closed and out.excised.closed
    assert out.excised.length == pytest.approx(2 + np.sqrt(2), abs=1e-12)
    assert out.remainder.length == pytest.approx(2 + np.sqrt(2), abs=1e-12)
    # the two inserted diagonals traverse opposite directions
    assert out.remainder.edges[-1].start == out.excised.edges[-1].end
    assert out.remainder.edges[-1].end == out.excised.edges[-1].start
    assert_current_identity(square, out.remainder, out.excised)


def test_basic_cut_same_edge_doubles_a_segment(square):
    out = basic_cut(square, 0.25, 0.75)
    est = morrey_norm(out.excised, tol=1e-3)
    assert est.lo == pytest.approx(4.0, abs=1e-9)
    assert est.hi == pytest.approx(4.0, abs=1e-3)


def test_basic_cut_figure_eight_point(e2):
    # a closed curve visiting the same point twice: zero-length insertions
    c = from_vertices(e2, [(0, 0), (1, 0), (1, 1), (0, 0), (-1, 0), (-1, -1)],
                      closed=True)
    t = 0.0
    t_prime = 2 + np.sqrt(2)  # the second visit of (0, 0)
    assert c.point_at(t) == c.point_at(t_prime)
    out = basic_cut(c, t, t_prime)
    assert out.inserted_length == 0.0
    assert out.remainder.closed and out.excised.closed
    assert out.remainder.length + out.excised.length == \
        pytest.approx(c.length, rel=1e-12)


def test_cut_length_identity_exact(square):
    rng = np.random.default_rng(8)
    for _ in range(25):
        t, tp = sorted(rng.random(2) * 4)
        if tp - t < 1e-6:
            continue
        out = basic_cut(square, t, tp)
        assert out.remainder.length + out.excised.length == pytest.approx(
            square.length + 2 * out.inserted_length, rel=1e-12)


def test_basic_cut_rejects_bad_input(square, segment):
    with pytest.raises(ValueError):
        basic_cut(segment, 0.1, 0.5)
    with pytest.raises(ValueError):
        basic_cut(square, 1.0, 1.0)


def test_type1_cut_square(square):
    # eps = 0.6 fails lsi; the minimal interval has beta = 5/3 and the cut
    # inequalities all become equalities for this fixture
    eps, delta, n = 0.6, 0.1, 1
    out = type1_cut(square, delta, eps, n)
    assert out.cut_type == "I"
    beta = out.beta
    L = square.length
    assert delta <= beta <= L / 2
    assert out.inserted_length <= eps * beta + 1e-9
    assert out.remainder.length <= L - (1 - eps) * beta + 1e-9
    assert out.remainder.length + out.excised.length <= L + 2 * eps * beta + 1e-9
    assert small_edge_count(out.remainder, delta) <= \
        small_edge_count(square, delta) + 3
    assert out.checks["morrey_hi"] <= 4 / eps + 2 * n + 10 + 1e-6
    assert_current_identity(square, out.remainder, out.excised)


def test_type1_cut_slit_rectangle():
    slit = slit_rectangle(10.0, 0.01)
    eps, delta, n = 0.1, 0.005, 1
    out = type1_cut(slit, delta, eps, n)
    # the excised piece is a short transversal loop across the slit
    assert out.remainder.length <= slit.length - (1 - eps) * delta
    assert out.excised.length <= 0.25
    assert_current_identity(slit, out.remainder, out.excised)


def test_type1_requires_violation(square):
    with pytest.raises(CutVerificationError):
        type1_cut(square, 0.1, 0.4, 4)  # square is (0.1, 0.4)-lsi


def test_type2_cut_zigzag():
    zz = zigzag_fixture(n_small=5, small=0.1)
    delta, eps, n = 0.2, 0.5, 4
    den = is_den_curve(zz, delta, eps, n)
    assert not den.holds
    m_before = small_edge_count(zz, delta)
    out = type2_cut(zz, delta, eps, n)
    assert out.cut_type == "II"
    assert small_edge_count(out.remainder, delta) <= m_before - n
    assert out.remainder.length <= zz.length + 1e-12
    assert out.remainder.length + out.excised.length <= \
        zz.length + 4 * delta / eps + 1e-9
    # the excised loop contains the short edges; its Morrey bound comes
    # from the edge count: k <= 2/eps + (n+1) + 1
    assert out.checks["morrey_hi"] <= 2 * (n + 2 / eps + 2) + 1e-6
    assert out.excised.edge_count() <= 2 / eps + (n + 1) + 1
    assert_current_identity(zz, out.remainder, out.excised)


def test_type2_requires_crowding(square):
    with pytest.raises(CutVerificationError):
        type2_cut(square, 0.5, 0.5, 0)


def test_cut_determinism(square):
    a = type1_cut(square, 0.1, 0.6, 1)
    b = type1_cut(square, 0.1, 0.6, 1)
    assert a.t == b.t and a.t_prime == b.t_prime and a.beta == b.beta
