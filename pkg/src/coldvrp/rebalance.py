"""Post-distribution vehicle rebalancing over the depot highway network."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import CostParams, HighwayNetwork, VehicleSpec


class DisconnectedNetworkError(ValueError):
    pass


@dataclass(frozen=True)
class RebalancePlan:
    """Vehicle transfers ``(from_depot, to_depot, count)`` and their total cost."""

    transfers: tuple[tuple[int, int, int], ...] = ()
    cost: float = 0.0

    def net_outflow(self, n_depots: int) -> list[int]:
        out = [0] * n_depots
        for i, j, z in self.transfers:
            out[i] += z
            out[j] -= z
        return out


EMPTY_PLAN = RebalancePlan()


def floyd_shortest_paths(highway: HighwayNetwork, n_depots: int) -> np.ndarray:
    """All-pairs shortest highway distances between depots."""
    d = np.full((n_depots, n_depots), np.inf)
    np.fill_diagonal(d, 0.0)
    for i, j, w in highway.edges:
        if w < d[i, j]:
            d[i, j] = d[j, i] = w
    for k in range(n_depots):
        d = np.minimum(d, d[:, k, None] + d[None, k, :])
    if np.isinf(d).any():
        raise DisconnectedNetworkError(
            f"depot highway network (threshold {highway.threshold_km} km) is disconnected")
    return d


def transfer_unit_cost(dst: np.ndarray, costs: CostParams, vehicle: VehicleSpec) -> np.ndarray:
    """Cost of moving one vehicle between each depot pair: fixed + discounted travel + empty CO2."""
    per_km = ((1.0 - costs.rebalance_discount) * costs.travel_unit
              + costs.carbon_emission * costs.carbon_price * vehicle.fuel_empty)
    unit = costs.fix_cost + per_km * dst
    np.fill_diagonal(unit, 0.0)
    return unit


def solve_rebalance(u: Sequence[int], dst: np.ndarray, costs: CostParams,
                    vehicle: VehicleSpec) -> RebalancePlan:
    """Cheapest integer transfers that zero every depot's imbalance.

    ``u[i]`` is returns minus departures: depots with ``u > 0`` hold spare
    vehicles and send them to depots with ``u < 0``. Solved by successive
    shortest augmenting paths on the surplus-to-deficit network.
    """
    u = [int(x) for x in u]
    if sum(u) != 0:
        raise ValueError(f"imbalance vector {u} does not sum to zero")
    unit = transfer_unit_cost(dst, costs, vehicle)
    sources = [i for i, x in enumerate(u) if x > 0]
    sinks = [j for j, x in enumerate(u) if x < 0]
    if not sources:
        return EMPTY_PLAN

    # nodes: 0 = super source, 1..S sources, S+1..S+T sinks, last = super sink
    n_s, n_t = len(sources), len(sinks)
    sink_node = n_s + n_t + 1
    graph: list[list[list]] = [[] for _ in range(sink_node + 1)]

    def add(a: int, b: int, cap: int, cost: float) -> None:
        graph[a].append([b, cap, cost, len(graph[b])])
        graph[b].append([a, 0, -cost, len(graph[a]) - 1])

    for a, i in enumerate(sources, 1):
        add(0, a, u[i], 0.0)
        for b, j in enumerate(sinks, n_s + 1):
            add(a, b, u[i], float(unit[i, j]))
    for b, j in enumerate(sinks, n_s + 1):
        add(b, sink_node, -u[j], 0.0)

    remaining = sum(u[i] for i in sources)
    while remaining:
        # Bellman-Ford: residual arcs can carry negative cost
        dist = [float("inf")] * len(graph)
        via: list[tuple[int, int] | None] = [None] * len(graph)
        dist[0] = 0.0
        for _ in range(len(graph) - 1):
            changed = False
            for a, arcs in enumerate(graph):
                if dist[a] == float("inf"):
                    continue
                for k, (b, cap, cost, _) in enumerate(arcs):
                    if cap > 0 and dist[a] + cost < dist[b] - 1e-12:
                        dist[b] = dist[a] + cost
                        via[b] = (a, k)
                        changed = True
            if not changed:
                break
        # bottleneck along the path
        push = remaining
        node = sink_node
        while node != 0:
            a, k = via[node]
            push = min(push, graph[a][k][1])
            node = a
        node = sink_node
        while node != 0:
            a, k = via[node]
            arc = graph[a][k]
            arc[1] -= push
            graph[node][arc[3]][1] += push
            node = a
        remaining -= push

    transfers = []
    total = 0.0
    for a, i in enumerate(sources, 1):
        for b, cap, _, rev in graph[a]:
            if n_s + 1 <= b <= n_s + n_t:
                moved = graph[b][rev][1]
                if moved > 0:
                    j = sinks[b - n_s - 1]
                    transfers.append((i, j, moved))
                    total += moved * float(unit[i, j])
    return RebalancePlan(tuple(sorted(transfers)), total)
