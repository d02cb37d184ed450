import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coldvrp.cost import (COST_FIELDS, CostBreakdown, Route, co2_cost_at_visit, make_route,
                          relative_improvement, route_cost, solution_cost)
from coldvrp.oracle import audit_cost
from coldvrp.rebalance import RebalancePlan
from coldvrp.solution import Solution

from conftest import default_costs, make_instance, random_tiny_instance


def _fixed_arrival_route(inst, arrival):
    return Route(0, 0, (0,), 0.0, arrivals=(arrival,), legs=(30.0,), load=inst.customers[0].demand)


@pytest.fixture
def window_instance():
    return make_instance([(0, 0, 1)], [(5, 0, 10, 120, 180, 0)])


@pytest.mark.parametrize("arrival, expected", [(90, 2.5), (200, 10 / 60 * 20), (150, 0.0),
                                               (120, 0.0), (180, 0.0)])
def test_penalty_fixtures(window_instance, arrival, expected):
    cost = route_cost(_fixed_arrival_route(window_instance, arrival), window_instance)
    assert cost.penalty == pytest.approx(expected, abs=1e-12)


def test_late_penalty_rounded_value(window_instance):
    cost = route_cost(_fixed_arrival_route(window_instance, 200), window_instance)
    assert round(cost.penalty, 4) == 3.3333


@pytest.fixture
def co2_instance():
    # e = 0.1, lambda = 2.61, P0 = 0.2, P* = 0.4, Q = 80
    return make_instance([(0, 0, 1), (20, 0, 1)], [(10, 0, 40, 0, 480, 0)], fuel=(0.2, 0.4),
                         costs=default_costs(carbon_price=0.1, carbon_emission=2.61))


def test_co2_fixtures(co2_instance):
    route = make_route(co2_instance, 0, 1, (0,))
    assert co2_cost_at_visit(route, 0, co2_instance) == 0.0
    assert co2_cost_at_visit(route, 1, co2_instance) == pytest.approx(0.783, abs=1e-12)
    assert co2_cost_at_visit(route, 2, co2_instance) == pytest.approx(1.044, abs=1e-12)
    assert route_cost(route, co2_instance).co2 == pytest.approx(0.783 + 1.044, abs=1e-12)
    with pytest.raises(IndexError):
        co2_cost_at_visit(route, 3, co2_instance)


def test_route_cost_hand_breakdown(co2_instance):
    c = co2_instance.costs
    route = make_route(co2_instance, 0, 1, (0,))
    cost = route_cost(route, co2_instance)
    assert cost.fix == 500
    assert cost.transport == pytest.approx(10 * 20)
    # 10 km at 10 km/h = 60 min, no service time
    assert cost.cooling == pytest.approx(c.cooling_unit * 60)
    assert cost.good_loss == pytest.approx(c.good_loss * 40 * 60)
    assert cost.rebalance == 0


def test_empty_route_is_fix_only(co2_instance):
    route = make_route(co2_instance, 0, 0, ())
    assert route_cost(route, co2_instance) == CostBreakdown(fix=500.0)
    sol = Solution((route, route), "cc")
    assert solution_cost(sol, co2_instance).as_dict() == {**CostBreakdown(fix=1000.0).as_dict()}


def test_unpropagated_route_rejected(co2_instance):
    with pytest.raises(ValueError):
        route_cost(Route(0, 0, (0,)), co2_instance)


def test_solution_cost_adds_rebalance(co2_instance):
    route = make_route(co2_instance, 0, 1, (0,))
    sol = Solution((route,), "rboc", RebalancePlan(((1, 0, 1),), 621.044))
    total = solution_cost(sol, co2_instance)
    assert total.rebalance == 621.044
    assert total.total == pytest.approx(route_cost(route, co2_instance).total + 621.044)


def test_breakdown_total_and_fields():
    b = CostBreakdown(1, 2, 3, 4, 5, 6, 7)
    assert b.total == 28
    assert list(b.as_dict()) [:7] == ["fix", "transport", "co2", "cooling", "good_loss",
                                       "penalty", "rebalance"]
    assert set(COST_FIELDS) == set(b.as_dict())
    assert (b + b).total == 56


def test_relative_improvement():
    assert relative_improvement(90, 100) == pytest.approx(-10.0)
    assert relative_improvement(5, 5) == 0
    assert relative_improvement(13919.54, 15388.24) < 0
    with pytest.raises(ZeroDivisionError):
        relative_improvement(1, 0)


def _random_route(rng, inst):
    k = rng.randint(0, inst.n_customers)
    visits = rng.sample(range(inst.n_customers), k)
    return make_route(inst, rng.randrange(inst.n_depots), rng.randrange(inst.n_depots),
                      visits, rng.uniform(0, 120))


def test_audit_agreement_on_1000_random_routes():
    rng = random.Random(2024)
    for i in range(1000):
        inst = random_tiny_instance(i, n_customers=rng.randint(1, 5), n_depots=rng.randint(1, 3))
        route = _random_route(rng, inst)
        ours, theirs = route_cost(route, inst).as_dict(), audit_cost(route, inst).as_dict()
        for k in ours:
            assert ours[k] == pytest.approx(theirs[k], rel=1e-9, abs=1e-9), (i, k)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 5000), factor=st.floats(0.1, 10))
def test_co2_linear_in_price_and_emission(seed, factor):
    inst = random_tiny_instance(seed)
    route = _random_route(random.Random(seed), inst)
    base = route_cost(route, inst).co2
    scaled_e = inst.with_costs(carbon_price=inst.costs.carbon_price * factor)
    scaled_l = inst.with_costs(carbon_emission=inst.costs.carbon_emission * factor)
    assert route_cost(route, scaled_e).co2 == pytest.approx(base * factor, rel=1e-12)
    assert route_cost(route, scaled_l).co2 == pytest.approx(base * factor, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 5000))
def test_penalty_zero_iff_inside_windows(seed):
    inst = random_tiny_instance(seed)
    route = _random_route(random.Random(seed), inst)
    inside = all(inst.customers[c].earliest <= a <= inst.customers[c].latest
                 for c, a in zip(route.visits, route.arrivals))
    assert (route_cost(route, inst).penalty == 0) == inside


def test_cost_is_pure(two_depot_instance):
    route = make_route(two_depot_instance, 0, 1, (0, 1, 2))
    assert route_cost(route, two_depot_instance) == route_cost(route, two_depot_instance)


@pytest.mark.parametrize("dx", [0.5, 2.0, 7.0])
def test_longer_leg_costs_more(dx):
    # one speed everywhere, generous windows, so only distance-driven terms move
    def inst_at(x):
        return make_instance([(0, 0, 1)], [(x, 0, 10, 0, 10_000, 5)], speeds=(30,))
    near, far = inst_at(3.0), inst_at(3.0 + dx)
    assert (route_cost(make_route(far, 0, 0, (0,)), far).total
            > route_cost(make_route(near, 0, 0, (0,)), near).total)
