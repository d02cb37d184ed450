"""The four distribution scenarios: stand-alone, CC, BOC and RBOC."""
from __future__ import annotations

from .construction import InfeasibleError, PfihWeights, cluster_customers, pfih_construct, virtual_depot
from .cost import CostBreakdown, make_route, solution_cost
from .departure import DeparturePolicy, assign_departures
from .instance import Instance
from .rebalance import floyd_shortest_paths, solve_rebalance
from .savns import SavnsConfig, savns1, savns2
from .solution import (STRATEGIES, Solution, balancing_approach, compute_depot_imbalance,
                       ranked_depots)


def _closed_routes(groups: dict[int, list[int]], inst: Instance,
                   weights: PfihWeights) -> list:
    routes = []
    for depot in range(inst.n_depots):
        for visits in pfih_construct(groups.get(depot, []), depot, inst, weights):
            routes.append(make_route(inst, depot, depot, visits))
    return routes


def open_endpoints(visit_lists, inst: Instance) -> list:
    """Nearest-depot endpoints for routes built around the virtual depot.

    A route departs from the nearest depot with a vehicle left; it returns to
    the depot nearest its last customer.
    """
    left = [d.fleet_size for d in inst.depots]
    routes = []
    for visits in visit_lists:
        dep = next((k for k in ranked_depots(inst.node(visits[0]), inst) if left[k] > 0), None)
        if dep is None:
            raise InfeasibleError("not enough vehicles across all depots")
        left[dep] -= 1
        ret = inst.nearest_depot(visits[-1])
        routes.append(make_route(inst, dep, ret, visits))
    return routes


def initial_solution(inst: Instance, strategy: str,
                     policy: DeparturePolicy = DeparturePolicy(),
                     weights: PfihWeights = PfihWeights(),
                     ba_order: str = "nonincreasing") -> Solution:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if strategy == "standalone":
        if any(c.depot is None for c in inst.customers):
            raise ValueError("stand-alone needs split orders; run split_standalone_demand first")
        groups: dict[int, list[int]] = {}
        for i, c in enumerate(inst.customers):
            groups.setdefault(c.depot, []).append(i)
        routes = _closed_routes(groups, inst, weights)
    elif strategy == "cc":
        groups = {}
        for i, depot in enumerate(cluster_customers(inst)):
            groups.setdefault(depot, []).append(i)
        routes = _closed_routes(groups, inst, weights)
    else:
        visit_lists = pfih_construct(range(inst.n_customers), virtual_depot(inst), inst, weights)
        routes = open_endpoints(visit_lists, inst)
    routes = list(assign_departures(routes, policy, inst))
    if strategy == "boc":
        routes = list(balancing_approach(routes, inst, ba_order))
    if strategy == "rboc":
        u = compute_depot_imbalance(routes, inst.n_depots)
        dst = floyd_shortest_paths(inst.highway, inst.n_depots)
        plan = solve_rebalance(u, dst, inst.costs, inst.vehicle)
        return Solution(tuple(routes), strategy, plan)
    return Solution(tuple(routes), strategy)


def solve(inst: Instance, strategy: str, config: SavnsConfig = SavnsConfig(),
          policy: DeparturePolicy = DeparturePolicy(),
          weights: PfihWeights = PfihWeights(),
          trace: list | None = None,
          ba_order: str = "nonincreasing") -> tuple[Solution, CostBreakdown]:
    """Run one scenario end to end: construction, then the matching SAVNS.

    ``ba_order`` sets the BOC balancing sort direction (farthest-first by default).
    """
    if strategy == "rboc":
        floyd_shortest_paths(inst.highway, inst.n_depots)  # fail early if disconnected
    start = initial_solution(inst, strategy, policy, weights, ba_order)
    if strategy in ("standalone", "cc"):
        best = savns1(start, inst, config, trace)
    else:
        best = savns2(start, inst, config, strategy, trace, ba_order)
    return best, solution_cost(best, inst)
