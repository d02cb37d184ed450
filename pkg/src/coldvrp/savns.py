"""Hybrid simulated annealing / variable neighbourhood search.

``savns1`` improves each depot's own routes in turn (closed routes, CC and
stand-alone); ``savns2`` works on all routes at once with open endpoints
(BOC and RBOC). Both return the best solution visited.

The ``variant`` field of :class:`SavnsConfig` selects the ablations used for
comparison: ``"sa"`` keeps the annealing schedule but always uses the k=1
neighbourhood, ``"vns"`` keeps the k cycling but only accepts non-worsening
moves. All variants spend the same number of move proposals.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable, Sequence

from .cost import Route, make_route, route_total
from .instance import Instance
from .neighborhoods import RETRY_CAP, vns_strategy_k
from .rebalance import EMPTY_PLAN, floyd_shortest_paths, solve_rebalance
from .solution import (Solution, balancing_approach, compute_depot_imbalance,
                       departures, nearest_endpoints)

VARIANTS = ("savns", "sa", "vns")


@dataclass(frozen=True)
class SavnsConfig:
    t_initial: float = 5000.0
    t_final: float = 1.0
    cooling: float = 0.98
    k_max: int = 8
    seed: int = 0
    vns_retry_cap: int = RETRY_CAP
    variant: str = "savns"
    audit_every: int = 1000

    def __post_init__(self):
        if not self.t_final < self.t_initial:
            raise ValueError("t_final must be below t_initial")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @classmethod
    def from_defaults(cls, cfg: dict, **changes) -> SavnsConfig:
        base = dict(t_initial=cfg["t_initial"], t_final=cfg["t_final"],
                    cooling=cfg["cooling_rate"], k_max=int(cfg["k_max"]),
                    vns_retry_cap=int(cfg["vns_retry_cap"]))
        base.update(changes)
        return cls(**base)


def metropolis_accept(delta: float, temperature: float, rng: random.Random) -> bool:
    if delta <= 0:
        return True
    return rng.random() < math.exp(-delta / temperature)


def temperature_steps(config: SavnsConfig) -> int:
    """Number of temperature levels the annealing loop visits."""
    t, n = config.t_initial, 0
    while t >= config.t_final:
        n += 1
        t *= config.cooling
    return n


class DriftError(AssertionError):
    """Incrementally tracked objective drifted from a full re-evaluation."""


TraceRow = tuple[int, float, float, float]


def _slot_cost(route: Route, inst: Instance) -> float:
    # an emptied route is a vehicle left at home
    return route_total(route, inst) if route.visits else 0.0


def _used(routes: Sequence[Route]) -> list[Route]:
    return [r for r in routes if r.visits]


class _Search:
    """Shared annealing state: current routes, their costs, and the incumbent."""

    def __init__(self, routes: Sequence[Route], inst: Instance, config: SavnsConfig,
                 extra: Callable[[Sequence[Route]], float] | None = None,
                 trace: list | None = None):
        self.inst = inst
        self.config = config
        self.rng = random.Random(config.seed)
        self.routes = list(routes)
        self.costs = [_slot_cost(r, inst) for r in self.routes]
        self.extra = extra
        self.extra_value = extra(self.routes) if extra else 0.0
        self.total = sum(self.costs) + self.extra_value
        self.best_routes = tuple(self.routes)
        self.best_total = self.total
        self.trace = trace
        self.accepted = 0
        self.iteration = 0

    def visits(self) -> list[tuple[int, ...]]:
        return [r.visits for r in self.routes]

    def pool(self, depot: int | None = None) -> list[int]:
        """Busy routes (of ``depot`` when given), plus an idle vehicle when only one is busy.

        The idle vehicle is an empty route slot costing nothing. With a single
        busy route no two-route move exists; relocating part of it into the
        idle vehicle splits it, and merging back reorders its customers.
        """
        def mine(r: Route) -> bool:
            return depot is None or r.depart_depot == depot

        busy = [i for i, r in enumerate(self.routes) if r.visits and mine(r)]
        if len(busy) != 1:
            return busy
        idle = next((i for i, r in enumerate(self.routes) if not r.visits and mine(r)), None)
        if idle is None:
            template = self.routes[busy[0]] if busy else self.routes[0]
            home = template.depart_depot if depot is None else depot
            self.routes.append(make_route(self.inst, home, home, (), template.start))
            self.costs.append(0.0)
            idle = len(self.routes) - 1
        return busy + [idle]

    def consider(self, changed: dict[int, Route], temperature: float,
                 extra_value: float | None = None) -> tuple[bool, float]:
        new_costs = {i: _slot_cost(r, self.inst) for i, r in changed.items()}
        delta = sum(new_costs[i] - self.costs[i] for i in changed)
        if extra_value is not None:
            delta += extra_value - self.extra_value
        if self.config.variant == "vns":
            ok = delta <= 0
        else:
            ok = metropolis_accept(delta, temperature, self.rng)
        if ok:
            for i, r in changed.items():
                self.routes[i] = r
                self.costs[i] = new_costs[i]
            if extra_value is not None:
                self.extra_value = extra_value
            self.total += delta
            self.accepted += 1
            if self.total < self.best_total - 1e-9:
                self.best_total = self.total
                self.best_routes = tuple(self.routes)
            if self.config.audit_every and self.accepted % self.config.audit_every == 0:
                self.audit()
        return ok, delta

    def audit(self) -> None:
        full = sum(_slot_cost(r, self.inst) for r in self.routes)
        if self.extra:
            full += self.extra(self.routes)
        if abs(full - self.total) > 1e-6 * max(1.0, abs(full)):
            raise DriftError(f"tracked objective {self.total} vs recomputed {full}")
        self.total = full

    def log(self, temperature: float) -> None:
        self.iteration += 1
        if self.trace is not None:
            self.trace.append((self.iteration, temperature, self.total, self.best_total))

    def schedule(self):
        """Yield (temperature, k) for every move proposal."""
        c = self.config
        t = c.t_initial
        k = 1
        while t >= c.t_final:
            for step in range(1, c.k_max + 1):
                if c.variant == "savns":
                    yield t, step
                elif c.variant == "sa":
                    yield t, 1
                else:
                    yield t, k
                    k = self._next_k(k)
            t *= c.cooling

    def _next_k(self, k: int) -> int:
        # VNS ablation: back to the smallest neighbourhood after an improvement
        if self._last_improved:
            return 1
        return k % self.config.k_max + 1

    _last_improved = False


def savns1(initial: Solution, inst: Instance, config: SavnsConfig,
           trace: list | None = None) -> Solution:
    """Improve each depot's closed routes in turn; the temperature restarts per depot."""
    s = _Search(initial.routes, inst, config, trace=trace)
    for depot in range(inst.n_depots):
        fleet = inst.depots[depot].fleet_size
        if sum(len(r.visits) for r in s.routes if r.depart_depot == depot) < 2:
            continue
        for t, k in s.schedule():
            pool = s.pool(depot)
            move = vns_strategy_k(s.visits(), k, s.rng, inst, pool, config.vns_retry_cap)
            s._last_improved = False
            if move is not None:
                r1, r2 = s.routes[move.r1], s.routes[move.r2]
                in_use = sum(1 for i in pool if s.routes[i].visits)
                in_use += (bool(move.visits1) - bool(r1.visits)) + (bool(move.visits2) - bool(r2.visits))
                if in_use <= fleet:
                    changed = {
                        move.r1: make_route(inst, depot, depot, move.visits1, r1.start),
                        move.r2: make_route(inst, depot, depot, move.visits2, r2.start),
                    }
                    ok, delta = s.consider(changed, t)
                    s._last_improved = ok and delta < 0
            s.log(t)
    s.audit()
    return Solution(tuple(_used(s.best_routes)), initial.strategy)


def rebalance_evaluator(inst: Instance) -> Callable[[Sequence[Route]], float]:
    """Rebalance cost of a route set, memoised on the imbalance vector."""
    dst = floyd_shortest_paths(inst.highway, inst.n_depots)
    memo: dict[tuple[int, ...], float] = {}

    def cost(routes: Sequence[Route]) -> float:
        u = tuple(compute_depot_imbalance(_used(routes), inst.n_depots))
        if u not in memo:
            memo[u] = solve_rebalance(u, dst, inst.costs, inst.vehicle).cost
        return memo[u]

    cost.dst = dst
    return cost


def _open_move(s: _Search, move, strategy: str, fleet: list[int], t: float,
               ba_order: str) -> tuple[bool, float]:
    inst = s.inst
    changed = {}
    for idx, visits in ((move.r1, move.visits1), (move.r2, move.visits2)):
        old = s.routes[idx]
        if visits:
            dep, ret = nearest_endpoints(visits, inst)
        else:
            dep = ret = old.depart_depot
        changed[idx] = make_route(inst, dep, ret, visits, old.start)
    candidate = list(s.routes)
    for idx, r in changed.items():
        candidate[idx] = r
    if any(n > f for n, f in zip(departures(_used(candidate), inst.n_depots), fleet)):
        return False, 0.0
    extra_value = None
    if strategy == "boc":
        used = [i for i, r in enumerate(candidate) if r.visits]
        balanced = balancing_approach([candidate[i] for i in used], inst, ba_order)
        for i, r in zip(used, balanced):
            if r is not s.routes[i]:
                changed[i] = r
    else:
        extra_value = s.extra(candidate)
    return s.consider(changed, t, extra_value)


def savns2(initial: Solution, inst: Instance, config: SavnsConfig, strategy: str,
           trace: list | None = None, ba_order: str = "nonincreasing") -> Solution:
    """Improve all routes jointly with open endpoints.

    Touched routes get their endpoints from the nearest-depot rule. BOC then re-balances return depots; RBOC
    prices the imbalance with the optimal rebalance plan inside the
    objective. Moves overrunning a depot's fleet are rejected outright.
    """
    if strategy not in ("boc", "rboc"):
        raise ValueError(f"savns2 handles boc or rboc, not {strategy!r}")
    extra = rebalance_evaluator(inst) if strategy == "rboc" else None
    s = _Search(initial.routes, inst, config, extra=extra, trace=trace)
    fleet = [d.fleet_size for d in inst.depots]
    for t, k in s.schedule():
        pool = s.pool()
        move = vns_strategy_k(s.visits(), k, s.rng, inst, pool, config.vns_retry_cap)
        s._last_improved = False
        if move is not None:
            ok, delta = _open_move(s, move, strategy, fleet, t, ba_order)
            s._last_improved = ok and delta < 0
        s.log(t)
    s.audit()
    best = tuple(_used(s.best_routes))
    plan = None
    if strategy == "rboc":
        u = compute_depot_imbalance(best, inst.n_depots)
        plan = solve_rebalance(u, extra.dst, inst.costs, inst.vehicle) if any(u) else EMPTY_PLAN
    return Solution(best, strategy, plan)
