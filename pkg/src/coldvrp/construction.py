"""Initial solutions: nearest-depot clustering and push-forward insertion (PFIH)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .instance import Instance


class InfeasibleError(RuntimeError):
    """A depot needs more vehicles than its fleet allows."""


@dataclass(frozen=True)
class PfihWeights:
    eta: float = 0.7
    theta: float = 0.2
    xi: float = 0.1

    def __post_init__(self):
        if min(self.eta, self.theta, self.xi) < 0:
            raise ValueError("PFIH weights must be non-negative")


def cluster_customers(inst: Instance) -> tuple[int, ...]:
    """Depot index for every customer: the closest one, lowest index on ties."""
    m = inst.n_depots
    d = inst.dist[m:, :m]
    return tuple(int(k) for k in np.argmin(d, axis=1))


def virtual_depot(inst: Instance) -> tuple[float, float]:
    xs = [d.x for d in inst.depots]
    ys = [d.y for d in inst.depots]
    return sum(xs) / len(xs), sum(ys) / len(ys)


def seed_costs(customers: Sequence[int], origin: tuple[float, float], inst: Instance,
               weights: PfihWeights) -> np.ndarray:
    """Solomon's PFIH seed cost for each candidate; the seed is the argmin."""
    ox, oy = origin
    out = np.empty(len(customers))
    for k, i in enumerate(customers):
        c = inst.customers[i]
        d0 = math.hypot(c.x - ox, c.y - oy)
        angle = math.degrees(math.atan2(c.y - oy, c.x - ox)) % 360.0
        out[k] = -weights.eta * d0 + weights.theta * c.latest + weights.xi * (angle / 360.0) * d0
    return out


def pfih_construct(customers: Sequence[int], depot: int | tuple[float, float],
                   inst: Instance, weights: PfihWeights = PfihWeights()) -> list[tuple[int, ...]]:
    """Build routes around one depot (an index) or a free point such as the virtual depot.

    Each route starts from the seed-cost argmin, then grows by cheapest
    insertion (extra route length) among customers that still fit the load.
    Time windows are soft and play no part here. Returns visit sequences.
    """
    customers = sorted(customers)
    if not customers:
        return []
    if isinstance(depot, (int, np.integer)):
        d = inst.depots[int(depot)]
        origin = (d.x, d.y)
        fleet = d.fleet_size
    else:
        origin = (float(depot[0]), float(depot[1]))
        fleet = None

    n = len(customers)
    nodes = [inst.node(i) for i in customers]
    ext = np.empty((n + 1, n + 1))
    ext[:n, :n] = inst.dist[np.ix_(nodes, nodes)]
    xy = np.array([(inst.customers[i].x, inst.customers[i].y) for i in customers])
    to_origin = np.hypot(xy[:, 0] - origin[0], xy[:, 1] - origin[1])
    ext[n, :n] = ext[:n, n] = to_origin
    ext[n, n] = 0.0
    demand = np.array([inst.customers[i].demand for i in customers])
    seeds = seed_costs(customers, origin, inst, weights)
    cap = inst.vehicle.capacity

    unrouted = np.ones(n, dtype=bool)
    routes: list[tuple[int, ...]] = []
    while unrouted.any():
        seed = int(np.flatnonzero(unrouted)[np.argmin(seeds[unrouted])])
        route = [seed]
        load = demand[seed]
        unrouted[seed] = False
        while True:
            cand = np.flatnonzero(unrouted & (demand <= cap - load + 1e-9))
            if cand.size == 0:
                break
            prev = np.array([n, *route])
            nxt = np.array([*route, n])
            extra = ext[np.ix_(cand, prev)] + ext[np.ix_(cand, nxt)] - ext[prev, nxt]
            u, p = np.unravel_index(int(np.argmin(extra)), extra.shape)
            route.insert(int(p), int(cand[u]))
            load += demand[cand[u]]
            unrouted[cand[u]] = False
        routes.append(tuple(customers[k] for k in route))

    if fleet is not None and len(routes) > fleet:
        raise InfeasibleError(
            f"depot {inst.depots[int(depot)].id} needs {len(routes)} vehicles, fleet is {fleet}")
    return routes
