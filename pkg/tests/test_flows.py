import numpy as np
import pytest

from curvesurgery import (EdgeFlow, FlowError, WeightedCurrent,
                          atomic_decomposition, boundary_residual,
                          cycle_decompose, cycles_reproduce_flow,
                          evaluate_battery, from_vertices, standard_battery)
from curvesurgery.fixtures import random_flow, unit_square


def tri_flow(e2):
    return EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0), (0.5, 1.0)),
                    ((0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)))


def test_triangle_single_cycle(e2):
    cycles = cycle_decompose(tri_flow(e2))
    assert len(cycles) == 1
    w, cyc = cycles[0]
    assert w == 1.0 and sorted(cyc) == [0, 1, 2]
    assert cycles_reproduce_flow(tri_flow(e2), cycles) <= 1e-12


def test_two_squares_sharing_a_node(e2):
    # two edge-disjoint unit squares sharing the corner (1, 1)
    nodes = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0),
             (2.0, 1.0), (2.0, 2.0), (1.0, 2.0))
    edges = ((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0),
             (2, 4, 1.0), (4, 5, 1.0), (5, 6, 1.0), (6, 2, 1.0))
    flow = EdgeFlow(e2, nodes, edges)
    cycles = cycle_decompose(flow)
    assert len(cycles) == 2
    assert all(w == 1.0 for w, _ in cycles)
    assert cycles_reproduce_flow(flow, cycles) <= 1e-12


def test_zero_flow_empty_decomposition(e2):
    flow = EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0)), ((0, 1, 0.0),))
    assert cycle_decompose(flow) == []
    deco = atomic_decomposition(flow, 0.5)
    assert deco.atoms == () and deco.lambda_sum == 0.0
    assert deco.all_ok()


def test_nonconservative_flow_reports_worst_node(e2):
    flow = EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0), (0.5, 1.0)),
                    ((0, 1, 1.0), (1, 2, 0.5), (2, 0, 1.0)))
    with pytest.raises(FlowError, match="node"):
        cycle_decompose(flow)


def test_flow_validation(e2):
    with pytest.raises(FlowError):
        EdgeFlow(e2, ((0.0, 0.0), (0.0, 0.0)), ())
    with pytest.raises(FlowError):
        EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0)), ((0, 0, 1.0),))
    with pytest.raises(FlowError):
        EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0)), ((0, 1, 1.0), (0, 1, 2.0)))
    with pytest.raises(FlowError):
        EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0)), ((0, 3, 1.0),))


def test_random_flows_reproduce_exactly():
    for seed in range(8):
        flow = random_flow(seed, n_nodes=30, n_cycles=6)
        cycles = cycle_decompose(flow)
        assert len(cycles) <= len(flow.edges)
        assert all(w > 0 for w, _ in cycles)
        assert cycles_reproduce_flow(flow, cycles) <= 1e-9


def test_square_flow_atoms(e2):
    flow = EdgeFlow(e2, ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)),
                    ((0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)))
    deco = atomic_decomposition(flow, 0.5)
    assert deco.lambda_sum <= 1.5 * 4.0 + 1e-9
    assert deco.all_ok()
    assert deco.checks["battery_ok"]
    assert deco.checks["boundary_residual"] == 0.0


def test_triangle_atoms_exact_when_no_cuts(e2):
    # the triangle is regular enough that surgery returns it unchanged,
    # so there is one atom with lambda equal to the perimeter
    flow = tri_flow(e2)
    deco = atomic_decomposition(flow, 0.5)
    assert len(deco.atoms) == 1
    lam, curve = deco.atoms[0]
    assert lam == pytest.approx(curve.length, rel=1e-12)
    assert deco.lambda_sum == pytest.approx(flow.mass_upper_bound(), rel=1e-12)


def test_weighted_current_input(square):
    src = WeightedCurrent.of((2.0, square), (-1.0, square))
    deco = atomic_decomposition(src, 0.5)
    assert all(lam >= 0 for lam, _ in deco.atoms)
    assert deco.mass_bound == pytest.approx(3 * 4.0)
    assert deco.checks["mass_ok"]
    with pytest.raises(FlowError):
        atomic_decomposition(WeightedCurrent(()), 0.5)
    from curvesurgery import from_vertices
    open_curve = from_vertices(square.space, [(0, 0), (1, 0)], closed=False)
    with pytest.raises(FlowError):
        atomic_decomposition(WeightedCurrent.of((1.0, open_curve)), 0.5)


def test_atoms_reproduce_flow_current():
    flow = random_flow(3, n_nodes=16, n_cycles=4)
    deco = atomic_decomposition(flow, 0.5)
    assert deco.checks["battery_ok"]
    assert deco.checks["boundary_ok"]
    # independent battery re-evaluation
    battery = standard_battery(flow.space, np.asarray(flow.nodes), 20, seed=77)
    vin, ein = evaluate_battery(flow.as_current(), battery, 256)
    vout, eout = evaluate_battery(deco.as_current(), battery, 256)
    assert np.all(np.abs(vin - vout) <= ein + eout + 1e-12)


def test_padded_views(e2):
    flow = tri_flow(e2)
    deco = atomic_decomposition(flow, 0.5)
    padded = deco.padded(5)
    assert len(padded) == 5
    assert all(lam == 0.0 for lam, _ in padded[len(deco.atoms):])
    assert all(c.length == 0.0 for lam, c in padded[len(deco.atoms):])
    with pytest.raises(ValueError):
        deco.padded(0)


def test_atom_normalization_bound(square):
    deco = atomic_decomposition(WeightedCurrent.of((1.0, square)), 0.5)
    for lam, curve in deco.atoms:
        atom = WeightedCurrent.of((1.0 / curve.length, curve))
        from curvesurgery import mass_upper_bound
        assert mass_upper_bound(atom) == pytest.approx(1.0, rel=1e-12)
