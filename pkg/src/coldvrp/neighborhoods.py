"""Cross and i-Cross exchange of sub-paths between two routes."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .instance import Instance

RETRY_CAP = 50


@dataclass(frozen=True)
class Move:
    """Replace the visits of routes ``r1`` and ``r2`` (indices into the route list)."""

    r1: int
    r2: int
    visits1: tuple[int, ...]
    visits2: tuple[int, ...]
    reverse: bool


def sub_path(visits: Sequence[int], start: int, k: int) -> tuple[int, int]:
    """(start, length) of the sub-path from ``start``: k customers, cut at the route end."""
    return start, min(k, len(visits) - start)


def cross_exchange(v1: Sequence[int], v2: Sequence[int], path1: tuple[int, int],
                   path2: tuple[int, int], reverse: bool = False
                   ) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Swap two sub-paths; with ``reverse`` each one is inserted back to front (i-Cross)."""
    s1, n1 = path1
    s2, n2 = path2
    seg1 = tuple(v1[s1:s1 + n1])
    seg2 = tuple(v2[s2:s2 + n2])
    if reverse:
        seg1, seg2 = seg1[::-1], seg2[::-1]
    return (tuple(v1[:s1]) + seg2 + tuple(v1[s1 + n1:]),
            tuple(v2[:s2]) + seg1 + tuple(v2[s2 + n2:]))


def vns_strategy_k(routes: Sequence[Sequence[int]], k: int, rng: random.Random,
                   inst: Instance, pool: Sequence[int] | None = None,
                   retry_cap: int = RETRY_CAP) -> Move | None:
    """Draw one capacity-feasible Cross/i-Cross move of neighbourhood size ``k``.

    Two distinct routes come uniformly from ``pool`` (default: all non-empty
    routes), each with a uniformly drawn start. A start may also be the slot
    after the last customer, giving an empty sub-path: the other sub-path is
    then relocated to that route's end, and a route can be emptied entirely.
    An explicit pool may name an empty route (an idle vehicle), which can
    only receive a relocated sub-path.
    Returns None when no feasible draw turns up within ``retry_cap`` attempts.
    """
    if pool is None:
        pool = [i for i, r in enumerate(routes) if r]
    else:
        pool = list(pool)
    if len(pool) < 2 or not any(routes[i] for i in pool):
        return None
    demand = inst.demands
    cap = inst.vehicle.capacity + 1e-9
    for _ in range(retry_cap):
        i1, i2 = rng.sample(pool, 2)
        v1, v2 = routes[i1], routes[i2]
        p1 = sub_path(v1, rng.randrange(len(v1) + 1), k)
        p2 = sub_path(v2, rng.randrange(len(v2) + 1), k)
        if p1[1] == 0 and p2[1] == 0:
            continue
        reverse = rng.random() < 0.5
        new1, new2 = cross_exchange(v1, v2, p1, p2, reverse)
        if sum(demand[c] for c in new1) <= cap and sum(demand[c] for c in new2) <= cap:
            return Move(i1, i2, new1, new2, reverse)
    return None
