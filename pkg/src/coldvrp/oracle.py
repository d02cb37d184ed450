"""Exhaustive ground truth for tiny instances.

``exact_solve`` enumerates every way to cut the customers into ordered routes
and, per partition, every depot endpoint choice the strategy allows, keeping
the cheapest plan. ``audit_cost`` recomputes a route's cost from first
principles, sharing no code with :mod:`coldvrp.cost`, so the two can be
cross-checked.
"""
from __future__ import annotations

import math
from itertools import combinations, permutations
from typing import Iterator, Sequence

from .construction import cluster_customers
from .cost import CostBreakdown, Route, make_route, route_cost, solution_cost
from .departure import DeparturePolicy
from .instance import Instance
from .rebalance import EMPTY_PLAN, floyd_shortest_paths, solve_rebalance
from .solution import STRATEGIES, Solution

MAX_CUSTOMERS = 7
MAX_DEPOTS = 3


class OracleSizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


# --- independent cost audit -------------------------------------------------

def _euclid(a, b) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2)


def _audit_travel(depart: float, km: float, inst: Instance) -> float:
    # walk through the speed periods one at a time, km/h converted per minute
    periods = inst.schedule.periods
    clock, left = depart, km
    for idx, p in enumerate(periods):
        last = idx == len(periods) - 1
        if not last and clock >= p.end_min:
            continue
        speed = p.speed / 60.0
        if last:
            return clock - depart + left / speed
        window = p.end_min - max(clock, p.start_min)
        clock = max(clock, p.start_min)
        if left <= window * speed:
            return clock - depart + left / speed
        left -= window * speed
        clock = p.end_min
    raise AssertionError("unreachable: the last period is open-ended")


def _audit_route(route: Route, inst: Instance) -> CostBreakdown:
    c, v = inst.costs, inst.vehicle
    stops = [inst.depots[route.depart_depot]]
    stops += [inst.customers[i] for i in route.visits]
    stops.append(inst.depots[route.return_depot])

    hops = [_euclid(a, b) for a, b in zip(stops, stops[1:])]
    transport = c.travel_unit * sum(hops)

    co2 = 0.0
    for pos in range(1, len(stops)):
        demand = stops[pos].demand if pos < len(stops) - 1 else 0.0
        fuel = v.fuel_empty + (v.fuel_full - v.fuel_empty) * demand / v.capacity
        co2 += c.carbon_emission * c.carbon_price * fuel * sum(hops[:pos])

    cooling = good_loss = penalty = 0.0
    clock = route.start
    for pos, cust in enumerate(stops[1:-1]):
        leg = _audit_travel(clock, hops[pos], inst)
        arrival = clock + leg
        cooling += c.cooling_unit * (leg + cust.service_time)
        good_loss += c.good_loss * cust.demand * (leg + cust.service_time)
        penalty += c.early_penalty * max(cust.earliest - arrival, 0.0)
        penalty += c.late_penalty * max(arrival - cust.latest, 0.0)
        clock = arrival + cust.service_time
    return CostBreakdown(fix=c.fix_cost, transport=transport, co2=co2, cooling=cooling,
                         good_loss=good_loss, penalty=penalty)


def audit_cost(item, inst: Instance) -> CostBreakdown:
    """Naive cost of a route or a whole solution (routes plus its rebalance plan).

    An empty route costs its fixed charge only.
    """
    if isinstance(item, Route):
        return _audit_route(item, inst)
    total = CostBreakdown()
    for r in item.routes:
        total = total + _audit_route(r, inst)
    plan = getattr(item, "rebalance", None)
    if plan is not None:
        total = total + CostBreakdown(rebalance=plan.cost)
    return total


# --- exhaustive solver -------------------------------------------------------

def ordered_partitions(items: Sequence[int], demand: Sequence[float],
                       capacity: float) -> Iterator[list[tuple[int, ...]]]:
    """Every capacity-feasible split of ``items`` into non-empty ordered routes.

    Route order inside the partition is canonical (the route holding the
    smallest remaining item comes first), so each plan is produced once.
    """
    items = tuple(sorted(items))
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for size in range(len(rest) + 1):
        for mates in combinations(rest, size):
            group = (first, *mates)
            if sum(demand[c] for c in group) > capacity + 1e-9:
                continue
            remaining = [c for c in rest if c not in mates]
            tails = list(ordered_partitions(remaining, demand, capacity))
            for order in permutations(group):
                for tail in tails:
                    yield [order, *tail]


def _encoding(choice: Sequence[tuple[tuple[int, ...], int, int]]) -> tuple:
    return tuple(sorted((visits, d, e) for visits, d, e in choice))


def _better(cost: float, enc: tuple, best: tuple[float, tuple] | None) -> bool:
    if best is None:
        return True
    tol = 1e-9 * max(1.0, abs(best[0]))
    if cost < best[0] - tol:
        return True
    return abs(cost - best[0]) <= tol and enc < best[1]


def exact_solve(inst: Instance, strategy: str,
                policy: DeparturePolicy = DeparturePolicy()) -> tuple[Solution, CostBreakdown]:
    """Optimal plan for ``strategy`` on a tiny instance, by full enumeration.

    Endpoint rules: stand-alone routes stay at the depot their orders are
    bound to; CC routes stay at the cluster depot of all their customers;
    BOC routes may use any depots provided departures and returns balance at
    every depot; RBOC endpoints are free and the optimal rebalance cost is
    added. Every strategy respects per-depot fleet sizes. Only fixed
    departure policies are supported, since random start times have no
    single optimum.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    n, m = inst.n_customers, inst.n_depots
    if n > MAX_CUSTOMERS or m > MAX_DEPOTS:
        raise OracleSizeError(
            f"oracle handles at most {MAX_CUSTOMERS} customers and {MAX_DEPOTS} depots, "
            f"got {n} and {m}")
    if policy.kind != "fixed":
        raise ValueError("the oracle needs a fixed departure policy")
    if strategy == "standalone" and any(c.depot is None for c in inst.customers):
        raise ValueError("stand-alone needs split orders; run split_standalone_demand first")

    start = policy.t0
    fleet = [d.fleet_size for d in inst.depots]
    demand = [c.demand for c in inst.customers]
    cluster = cluster_customers(inst) if strategy == "cc" else None
    dst = floyd_shortest_paths(inst.highway, m) if strategy == "rboc" else None
    rebalance_memo: dict[tuple[int, ...], float] = {}
    route_memo: dict[tuple, float] = {}

    def options(visits: tuple[int, ...]) -> list[tuple[int, int]]:
        if strategy == "standalone":
            homes = {inst.customers[c].depot for c in visits}
            return [(h, h) for h in homes] if len(homes) == 1 else []
        if strategy == "cc":
            homes = {cluster[c] for c in visits}
            return [(h, h) for h in homes] if len(homes) == 1 else []
        return [(d, e) for d in range(m) for e in range(m)]

    def cost_of(visits: tuple[int, ...], d: int, e: int) -> float:
        key = (visits, d, e)
        if key not in route_memo:
            route_memo[key] = route_cost(make_route(inst, d, e, visits, start), inst).total
        return route_memo[key]

    def rebalance_cost(u: tuple[int, ...]) -> float:
        if u not in rebalance_memo:
            rebalance_memo[u] = solve_rebalance(u, dst, inst.costs, inst.vehicle).cost
        return rebalance_memo[u]

    best: tuple[float, tuple] | None = None
    total_fleet = sum(fleet)
    for partition in ordered_partitions(range(n), demand, inst.vehicle.capacity):
        if len(partition) > total_fleet:
            continue
        opts = [options(v) for v in partition]
        if any(not o for o in opts):
            continue
        # DP over the routes; state = (departures per depot, returns per depot)
        states: dict[tuple, tuple[float, tuple]] = {((0,) * m, (0,) * m): (0.0, ())}
        for visits, opt in zip(partition, opts):
            nxt: dict[tuple, tuple[float, tuple]] = {}
            for (deps, rets), (acc, chosen) in states.items():
                for d, e in opt:
                    if deps[d] + 1 > fleet[d]:
                        continue
                    nd = deps[:d] + (deps[d] + 1,) + deps[d + 1:]
                    ne = rets[:e] + (rets[e] + 1,) + rets[e + 1:]
                    val = acc + cost_of(visits, d, e)
                    ch = chosen + ((visits, d, e),)
                    cur = nxt.get((nd, ne))
                    if cur is None or _better(val, _encoding(ch), (cur[0], _encoding(cur[1]))):
                        nxt[(nd, ne)] = (val, ch)
            states = nxt
        for (deps, rets), (val, chosen) in states.items():
            if strategy == "boc" and deps != rets:
                continue
            if strategy == "rboc":
                val += rebalance_cost(tuple(r - d for d, r in zip(deps, rets)))
            enc = _encoding(chosen)
            if _better(val, enc, best):
                best = (val, enc)

    if best is None:
        raise ValueError(f"no feasible {strategy} plan exists for this instance")
    routes = tuple(make_route(inst, d, e, visits, start) for visits, d, e in best[1])
    plan = None
    if strategy == "rboc":
        u = [0] * m
        for r in routes:
            u[r.return_depot] += 1
            u[r.depart_depot] -= 1
        plan = solve_rebalance(u, dst, inst.costs, inst.vehicle) if any(u) else EMPTY_PLAN
    sol = Solution(routes, strategy, plan)
    return sol, solution_cost(sol, inst)
