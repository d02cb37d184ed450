import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import floyd_warshall

from coldvrp.instance import Depot, HighwayNetwork, VehicleSpec
from coldvrp.rebalance import (DisconnectedNetworkError, floyd_shortest_paths, solve_rebalance,
                               transfer_unit_cost)

from conftest import default_costs

VEHICLE = VehicleSpec(80, 0.2, 0.4)
COSTS = default_costs(fix_cost=500, rebalance_discount=0.4, travel_unit=10,
                      carbon_emission=2.61, carbon_price=0.1)


def test_hand_fixture_621_044():
    dst = np.array([[0.0, 20.0], [20.0, 0.0]])
    plan = solve_rebalance([1, -1], dst, COSTS, VEHICLE)
    assert plan.transfers == ((0, 1, 1),)
    assert plan.cost == pytest.approx(621.044, abs=1e-9)
    assert round(plan.cost, 3) == 621.044


def test_balanced_is_empty():
    plan = solve_rebalance([0, 0, 0], np.zeros((3, 3)), COSTS, VEHICLE)
    assert plan.transfers == () and plan.cost == 0


def test_unbalanced_vector_rejected():
    with pytest.raises(ValueError):
        solve_rebalance([1, 0], np.zeros((2, 2)), COSTS, VEHICLE)


def test_floyd_triangle():
    depots = [Depot(0, 0, 0, 1), Depot(1, 10, 0, 1), Depot(2, 20, 0, 1)]
    hw = HighwayNetwork.from_depots(depots, 15)
    d = floyd_shortest_paths(hw, 3)
    assert d[0, 2] == pytest.approx(20.0)
    assert np.allclose(d, d.T)
    single = floyd_shortest_paths(HighwayNetwork.from_depots(depots[:2], 15), 2)
    assert single[0, 1] == pytest.approx(10.0)


def test_disconnected_raises():
    depots = [Depot(0, 0, 0, 1), Depot(1, 100, 0, 1)]
    with pytest.raises(DisconnectedNetworkError):
        floyd_shortest_paths(HighwayNetwork.from_depots(depots, 15), 2)


@settings(max_examples=100, deadline=None)
@given(pts=st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=2, max_size=7),
       threshold=st.floats(10, 80))
def test_floyd_matches_scipy(pts, threshold):
    # the dense scipy input reads a zero entry as a missing edge
    assume(len(set(pts)) == len(pts))
    depots = [Depot(i, x, y, 1) for i, (x, y) in enumerate(pts)]
    hw = HighwayNetwork.from_depots(depots, threshold)
    n = len(depots)
    w = np.zeros((n, n))
    for i, j, d in hw.edges:
        w[i, j] = w[j, i] = d
    ref = floyd_warshall(w, directed=False)
    if np.isinf(ref).any():
        with pytest.raises(DisconnectedNetworkError):
            floyd_shortest_paths(hw, n)
    else:
        assert np.allclose(floyd_shortest_paths(hw, n), ref)


def _brute_force(u, unit):
    """Cheapest integer transfer matrix, by enumerating every count pattern."""
    n = len(u)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    bound = sum(x for x in u if x > 0)
    best = math.inf
    for counts in itertools.product(range(bound + 1), repeat=len(pairs)):
        net = [0] * n
        for (i, j), z in zip(pairs, counts):
            net[i] += z
            net[j] -= z
        if net == list(u):
            best = min(best, sum(z * unit[i, j] for (i, j), z in zip(pairs, counts)))
    return best


def _patterns(n, limit=3):
    for u in itertools.product(range(-limit, limit + 1), repeat=n):
        if sum(u) == 0 and any(u):
            yield u


def _metric(n, seed):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 60, size=(n, 2))
    return np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])


@pytest.mark.parametrize("n", [2, 3])
def test_matches_brute_force_small(n):
    dst = _metric(n, n)
    unit = transfer_unit_cost(dst, COSTS, VEHICLE)
    for u in _patterns(n):
        assert solve_rebalance(u, dst, COSTS, VEHICLE).cost == pytest.approx(_brute_force(u, unit))


def test_three_depot_two_one_one():
    dst = _metric(3, 11)
    unit = transfer_unit_cost(dst, COSTS, VEHICLE)
    plan = solve_rebalance([2, -1, -1], dst, COSTS, VEHICLE)
    assert plan.cost == pytest.approx(_brute_force([2, -1, -1], unit))
    assert plan.net_outflow(3) == [2, -1, -1]


def test_four_depots_against_enumeration():
    # with a metric unit cost, an optimum never ships out of a deficit depot or
    # into a surplus one, so surplus-to-deficit enumeration is exhaustive
    dst = _metric(4, 5)
    unit = transfer_unit_cost(dst, COSTS, VEHICLE)
    for u in _patterns(4):
        src = [i for i, x in enumerate(u) if x > 0]
        dst_ = [j for j, x in enumerate(u) if x < 0]
        pairs = [(i, j) for i in src for j in dst_]
        best = math.inf
        for counts in itertools.product(range(4), repeat=len(pairs)):
            net = [0] * 4
            for (i, j), z in zip(pairs, counts):
                net[i] += z
                net[j] -= z
            if net == list(u):
                best = min(best, sum(z * unit[i, j] for (i, j), z in zip(pairs, counts)))
        plan = solve_rebalance(u, dst, COSTS, VEHICLE)
        assert plan.cost == pytest.approx(best)
        assert plan.net_outflow(4) == list(u)
        assert all(z > 0 for _, _, z in plan.transfers)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 1000), a1=st.floats(0, 1), a2=st.floats(0, 1))
def test_cost_nonincreasing_in_discount(seed, a1, a2):
    lo, hi = sorted((a1, a2))
    dst = _metric(4, seed)
    u = list(_patterns(4))[seed % 100]
    c_lo = solve_rebalance(u, dst, default_costs(rebalance_discount=lo), VEHICLE).cost
    c_hi = solve_rebalance(u, dst, default_costs(rebalance_discount=hi), VEHICLE).cost
    assert c_hi <= c_lo + 1e-9
