"""Solutions, depot vehicle-flow bookkeeping, the balancing approach and feasibility checks."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .construction import cluster_customers
from .cost import Route, with_endpoints
from .instance import Instance
from .rebalance import RebalancePlan
from .traveltime import propagate_route_times

STRATEGIES = ("standalone", "cc", "boc", "rboc")


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    strategy: str
    rebalance: RebalancePlan | None = None

    @property
    def n_vehicles(self) -> int:
        return len(self.routes)


def compute_depot_imbalance(routes: Sequence[Route], n_depots: int) -> list[int]:
    """Per depot: vehicles returning minus vehicles departing."""
    u = [0] * n_depots
    for r in routes:
        u[r.return_depot] += 1
        u[r.depart_depot] -= 1
    return u


def departures(routes: Sequence[Route], n_depots: int) -> list[int]:
    out = [0] * n_depots
    for r in routes:
        out[r.depart_depot] += 1
    return out


def _last_node(route: Route, inst: Instance) -> int:
    return inst.node(route.visits[-1]) if route.visits else route.depart_depot


def nearest_endpoints(visits: Sequence[int], inst: Instance) -> tuple[int, int]:
    """Nearest-depot rule: depart from the depot closest to the first customer,
    return to the one closest to the last."""
    return inst.nearest_depot(visits[0]), inst.nearest_depot(visits[-1])


def ranked_depots(node: int, inst: Instance) -> list[int]:
    row = inst.dist_rows[node]
    return sorted(range(inst.n_depots), key=lambda k: (row[k], k))


def balancing_approach(routes: Sequence[Route], inst: Instance,
                       order: str = "nonincreasing") -> tuple[Route, ...]:
    """Re-point return depots until every depot's vehicle flow balances.

    For each surplus depot (ascending index), its returning routes are ranked
    by how far their last customer lies from it (farthest first by default)
    and the first ``u`` of them are sent to the nearest depot still short of
    vehicles. Visits and departure depots are left alone.
    """
    if order not in ("nonincreasing", "nondecreasing"):
        raise ValueError(f"unknown BA order {order!r}")
    routes = list(routes)
    u = compute_depot_imbalance(routes, inst.n_depots)
    d = inst.dist_rows
    for m in range(inst.n_depots):
        if u[m] <= 0:
            continue
        returning = [i for i, r in enumerate(routes) if r.return_depot == m]
        sign = -1.0 if order == "nonincreasing" else 1.0
        returning.sort(key=lambda i: (sign * d[_last_node(routes[i], inst)][m], i))
        for i in returning[: u[m]]:
            last = _last_node(routes[i], inst)
            target = next(k for k in ranked_depots(last, inst) if u[k] < 0)
            routes[i] = with_endpoints(routes[i], routes[i].depart_depot, target, inst)
            u[target] += 1
            u[m] -= 1
    return tuple(routes)


def validate_solution(solution: Solution, inst: Instance, strategy: str | None = None,
                      tol: float = 1e-6) -> list[str]:
    """Every broken constraint as a readable message; empty means feasible."""
    strategy = strategy or solution.strategy
    problems: list[str] = []
    m = inst.n_depots
    seen = Counter(c for r in solution.routes for c in r.visits)
    for i, cust in enumerate(inst.customers):
        if seen[i] == 0:
            problems.append(f"customer {cust.id} is not served")
        elif seen[i] > 1:
            problems.append(f"customer {cust.id} is served {seen[i]} times")
    for c in seen:
        if not 0 <= c < inst.n_customers:
            problems.append(f"route visits unknown customer index {c}")

    cap = inst.vehicle.capacity
    for h, r in enumerate(solution.routes):
        if not (0 <= r.depart_depot < m and 0 <= r.return_depot < m):
            problems.append(f"route {h} does not start and end at depots")
            continue
        if any(not 0 <= c < inst.n_customers for c in r.visits):
            continue
        load = sum(inst.customers[c].demand for c in r.visits)
        if load > cap + 1e-9:
            problems.append(f"route {h} load {load:g} exceeds capacity {cap:g}")
        if abs(load - r.load) > 1e-9:
            problems.append(f"route {h} records load {r.load:g}, visits sum to {load:g}")
        arrivals, _ = propagate_route_times(r.depart_depot, r.visits, r.start, inst)
        if r.arrivals is None or len(r.arrivals) != len(arrivals) or any(
                abs(a - b) > tol for a, b in zip(arrivals, r.arrivals)):
            problems.append(f"route {h} arrival times disagree with the travel-time engine")
        if strategy in ("standalone", "cc") and r.depart_depot != r.return_depot:
            problems.append(f"route {h} must return to its departure depot")
        if strategy == "standalone":
            for c in r.visits:
                if inst.customers[c].depot != r.depart_depot:
                    problems.append(
                        f"order {inst.customers[c].id} served from depot "
                        f"{r.depart_depot}, bound to {inst.customers[c].depot}")

    if strategy == "cc":
        cluster = cluster_customers(inst)
        for h, r in enumerate(solution.routes):
            stray = [inst.customers[c].id for c in r.visits
                     if 0 <= c < inst.n_customers and cluster[c] != r.depart_depot]
            if stray:
                problems.append(f"route {h} serves customers {stray} outside its depot cluster")

    for k, (used, depot) in enumerate(zip(departures(solution.routes, m), inst.depots)):
        if used > depot.fleet_size:
            problems.append(f"depot {depot.id} dispatches {used} vehicles, fleet is {depot.fleet_size}")

    u = compute_depot_imbalance(solution.routes, m)
    if strategy == "rboc" and solution.rebalance is not None:
        moved = solution.rebalance.net_outflow(m)
        u = [a - b for a, b in zip(u, moved)]
        if any(z <= 0 for _, _, z in solution.rebalance.transfers):
            problems.append("rebalance plan has non-positive transfer counts")
    if strategy in ("cc", "standalone", "boc", "rboc"):
        for k, x in enumerate(u):
            if x != 0:
                problems.append(f"depot {inst.depots[k].id} vehicle flow unbalanced (u = {x})")
    return problems
