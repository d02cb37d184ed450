"""Objective evaluation: fixed, transport, CO2, cooling, good-loss, penalty and rebalance costs."""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence

from .instance import Instance
from .traveltime import propagate_route_times


@dataclass(frozen=True)
class Route:
    """One vehicle: leaves ``depart_depot`` at ``start``, serves ``visits`` in order,
    ends at ``return_depot``. ``arrivals``/``legs`` are filled by :func:`make_route`."""

    depart_depot: int
    return_depot: int
    visits: tuple[int, ...]
    start: float = 0.0
    arrivals: tuple[float, ...] | None = None
    legs: tuple[float, ...] | None = None
    load: float = 0.0

    @property
    def propagated(self) -> bool:
        return self.arrivals is not None and len(self.arrivals) == len(self.visits)


def make_route(inst: Instance, depart: int, ret: int, visits: Sequence[int],
               start: float = 0.0) -> Route:
    visits = tuple(visits)
    arrivals, legs = propagate_route_times(depart, visits, start, inst)
    load = sum(inst.customers[c].demand for c in visits)
    return Route(depart, ret, visits, start, tuple(arrivals), tuple(legs), load)


def with_endpoints(route: Route, depart: int, ret: int, inst: Instance) -> Route:
    """Same visits with new depots; arrivals only move when the departure depot does."""
    if depart == route.depart_depot:
        if ret == route.return_depot:
            return route
        return Route(depart, ret, route.visits, route.start, route.arrivals, route.legs,
                     route.load)
    return make_route(inst, depart, ret, route.visits, route.start)


@dataclass(frozen=True)
class CostBreakdown:
    fix: float = 0.0
    transport: float = 0.0
    co2: float = 0.0
    cooling: float = 0.0
    good_loss: float = 0.0
    penalty: float = 0.0
    rebalance: float = 0.0

    @property
    def total(self) -> float:
        return (self.fix + self.transport + self.co2 + self.cooling + self.good_loss
                + self.penalty + self.rebalance)

    def __add__(self, other: CostBreakdown) -> CostBreakdown:
        return CostBreakdown(*(getattr(self, f.name) + getattr(other, f.name)
                               for f in fields(self)))

    def as_dict(self) -> dict[str, float]:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["total"] = self.total
        return out


# CSV/JSON column order
COST_FIELDS = ("total", "fix", "transport", "penalty", "good_loss", "co2", "cooling", "rebalance")


def co2_coefficient(inst: Instance, demand: float) -> float:
    """$ per km travelled before reaching a node with this demand."""
    v, c = inst.vehicle, inst.costs
    return c.carbon_price * c.carbon_emission * (
        v.fuel_empty + demand * (v.fuel_full - v.fuel_empty) / v.capacity)


def route_nodes(route: Route, inst: Instance) -> list[int]:
    m = inst.n_depots
    return [route.depart_depot, *(m + c for c in route.visits), route.return_depot]


def co2_cost_at_visit(route: Route, position: int, inst: Instance) -> float:
    """CO2 cost charged at one node of the route.

    ``position`` indexes the node sequence: 0 is the departure depot, 1..n the
    customers, n+1 the return depot (charged with zero demand). The charge is
    the node's emission coefficient times the distance driven from the start.
    """
    nodes = route_nodes(route, inst)
    if not 0 <= position < len(nodes):
        raise IndexError(f"route has no node at position {position}")
    if position == 0:
        return 0.0
    d = inst.dist_rows
    travelled = sum(d[a][b] for a, b in zip(nodes[:position], nodes[1:position + 1]))
    demand = inst.customers[route.visits[position - 1]].demand if position <= len(route.visits) else 0.0
    return co2_coefficient(inst, demand) * travelled


def route_cost(route: Route, inst: Instance) -> CostBreakdown:
    if not route.propagated:
        raise ValueError("route arrivals are not propagated; build it with make_route")
    c = inst.costs
    v = inst.vehicle
    d = inst.dist_rows
    m = inst.n_depots
    customers = inst.customers
    co2_base = c.carbon_price * c.carbon_emission * v.fuel_empty
    co2_slope = c.carbon_price * c.carbon_emission * (v.fuel_full - v.fuel_empty) / v.capacity

    length = 0.0
    co2 = cooling = good_loss = penalty = 0.0
    prev = route.depart_depot
    for c_idx, arrive, leg in zip(route.visits, route.arrivals, route.legs):
        node = m + c_idx
        cust = customers[c_idx]
        length += d[prev][node]
        co2 += (co2_base + co2_slope * cust.demand) * length
        busy = leg + cust.service_time
        cooling += c.cooling_unit * busy
        good_loss += c.good_loss * cust.demand * busy
        if arrive < cust.earliest:
            penalty += c.early_penalty * (cust.earliest - arrive)
        elif arrive > cust.latest:
            penalty += c.late_penalty * (arrive - cust.latest)
        prev = node
    length += d[prev][route.return_depot]
    co2 += co2_base * length
    return CostBreakdown(
        fix=c.fix_cost,
        transport=c.travel_unit * length,
        co2=co2,
        cooling=cooling,
        good_loss=good_loss,
        penalty=penalty,
    )


def route_total(route: Route, inst: Instance) -> float:
    return route_cost(route, inst).total


def solution_cost(solution, inst: Instance) -> CostBreakdown:
    """Sum of route costs plus the rebalance plan's cost, if any."""
    total = CostBreakdown()
    for r in solution.routes:
        total = total + route_cost(r, inst)
    plan = getattr(solution, "rebalance", None)
    if plan is not None:
        total = total + CostBreakdown(rebalance=plan.cost)
    return total


def relative_improvement(obj_savns: float, obj_other: float) -> float:
    """Percent change of the SAVNS objective relative to another method's."""
    if obj_other == 0:
        raise ZeroDivisionError("reference objective is zero")
    return (obj_savns - obj_other) / obj_other * 100.0
