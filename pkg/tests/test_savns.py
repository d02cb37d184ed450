import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coldvrp import savns as savns_mod
from coldvrp.cost import make_route, solution_cost
from coldvrp.oracle import exact_solve
from coldvrp.savns import SavnsConfig, metropolis_accept, temperature_steps
from coldvrp.solution import compute_depot_imbalance, validate_solution
from coldvrp.strategies import initial_solution, solve

from conftest import random_tiny_instance

FAST = SavnsConfig(t_initial=50.0, t_final=1.0, cooling=0.9, k_max=4)


def test_default_schedule_length():
    # 5000 * 0.98**n >= 1 holds for n = 0 .. 421
    assert temperature_steps(SavnsConfig()) == 422


def test_single_step_schedule():
    assert temperature_steps(SavnsConfig(t_initial=1.0001, t_final=1.0)) == 1


def test_metropolis_frequency():
    rng = random.Random(12345)
    hits = sum(metropolis_accept(10.0, 10.0, rng) for _ in range(100_000))
    assert hits / 100_000 == pytest.approx(0.3679, abs=0.01)


def test_metropolis_always_takes_improvements():
    rng = random.Random(0)
    assert all(metropolis_accept(-1e-3, 1e-9, rng) for _ in range(100))
    assert metropolis_accept(0.0, 1.0, rng)


@pytest.mark.parametrize("bad", [dict(t_initial=1.0, t_final=1.0), dict(cooling=1.0),
                                 dict(k_max=0), dict(variant="tabu")])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        SavnsConfig(**bad)


@pytest.mark.parametrize("strategy", ["cc", "boc", "rboc"])
def test_deterministic_for_a_seed(strategy):
    inst = random_tiny_instance(3, n_customers=8, n_depots=3)
    a = solve(inst, strategy, FAST)
    b = solve(inst, strategy, FAST)
    assert a == b


@pytest.mark.parametrize("strategy", ["cc", "boc", "rboc"])
@pytest.mark.parametrize("variant", ["savns", "sa", "vns"])
def test_incumbent_nonincreasing_and_feasible(strategy, variant):
    inst = random_tiny_instance(11, n_customers=8, n_depots=3)
    trace = []
    config = SavnsConfig(t_initial=50.0, t_final=1.0, cooling=0.9, k_max=4, variant=variant)
    sol, cost = solve(inst, strategy, config, trace=trace)
    bests = [row[3] for row in trace]
    assert all(b2 <= b1 + 1e-9 for b1, b2 in zip(bests, bests[1:]))
    assert validate_solution(sol, inst) == []
    assert cost.total <= solution_cost(initial_solution(inst, strategy), inst).total + 1e-6
    # a depot with a single closed route has nothing to exchange and logs nothing
    if strategy != "cc":
        assert bests
    if bests:
        assert cost.total == pytest.approx(bests[-1], rel=1e-9)


def test_boc_never_accepts_imbalance(monkeypatch):
    inst = random_tiny_instance(5, n_customers=8, n_depots=3)
    original = savns_mod._Search.consider
    checked = []

    def watched(self, changed, temperature, extra_value=None):
        ok, delta = original(self, changed, temperature, extra_value)
        if ok:
            used = [r for r in self.routes if r.visits]
            checked.append(compute_depot_imbalance(used, inst.n_depots))
        return ok, delta

    monkeypatch.setattr(savns_mod._Search, "consider", watched)
    solve(inst, "boc", FAST)
    assert checked
    assert all(not any(u) for u in checked)


def test_savns2_rejects_closed_strategies(two_depot_instance):
    start = initial_solution(two_depot_instance, "cc")
    with pytest.raises(ValueError):
        savns_mod.savns2(start, two_depot_instance, FAST, "cc")


@settings(max_examples=8, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_never_beats_the_oracle(seed):
    inst = random_tiny_instance(seed, n_customers=4, n_depots=2)
    for strategy in ("cc", "boc", "rboc"):
        _, opt = exact_solve(inst, strategy)
        _, cost = solve(inst, strategy, FAST)
        assert cost.total >= opt.total - 1e-6 * opt.total


def test_idle_vehicle_only_for_a_lone_route(two_depot_instance):
    inst = two_depot_instance
    lone = savns_mod._Search([make_route(inst, 0, 0, (0, 1, 2, 3))], inst, FAST)
    pool = lone.pool()
    assert len(pool) == 2 and lone.routes[pool[1]].visits == ()
    assert lone.total == pytest.approx(solution_cost_of(lone.routes, inst))
    pair = savns_mod._Search([make_route(inst, 0, 0, (0, 1)), make_route(inst, 1, 1, (2, 3))],
                             inst, FAST)
    assert pair.pool() == [0, 1]
    # per depot, depot 1 has a lone route and gets an idle slot of its own
    assert pair.pool(depot=1) == [1, 2]
    assert pair.routes[2].depart_depot == pair.routes[2].return_depot == 1


def solution_cost_of(routes, inst):
    return sum(savns_mod._slot_cost(r, inst) for r in routes)


@pytest.mark.parametrize("seed", [1008, 1013, 1025])
def test_lone_route_can_be_improved(seed):
    # one vehicle serves everything; only the idle vehicle lets the search reorder it
    inst = random_tiny_instance(seed, n_customers=5, n_depots=2)
    start = initial_solution(inst, "cc")
    assert len(start.routes) == 1
    _, cost = solve(inst, "cc", SavnsConfig(seed=3))
    assert cost.total < solution_cost(start, inst).total - 1.0
