"""Piecewise-constant, time-dependent travel times.

Periods are half-open ``[start, end)``; a departure exactly on a boundary
uses the later period. Past the last period the last speed applies.
"""
from __future__ import annotations

from bisect import bisect_right
from typing import Sequence

from .instance import Instance, SpeedSchedule


def departure_period(t: float, schedule: SpeedSchedule) -> int:
    """Index (0-based) of the period containing ``t``."""
    starts = [p.start_min for p in schedule.periods]
    return max(0, min(bisect_right(starts, t) - 1, len(starts) - 1))


def leg_travel_time(depart: float, distance: float, schedule: SpeedSchedule) -> float:
    """Minutes to cover ``distance`` km leaving at minute ``depart``."""
    starts, ends, speeds = schedule.bounds
    return _leg_time(depart, distance, starts, ends, speeds)


def leg_period_times(depart: float, distance: float, schedule: SpeedSchedule) -> list[float]:
    """Minutes spent in each period from the departure period onwards."""
    starts, ends, speeds = schedule.bounds
    p = max(0, min(bisect_right(starts, depart) - 1, len(starts) - 1))
    out = []
    t, rest = depart, distance
    while True:
        if p == len(starts) - 1:
            out.append(rest / speeds[p])
            return out
        reach = (ends[p] - t) * speeds[p]
        if rest <= reach:
            out.append(rest / speeds[p])
            return out
        out.append(ends[p] - t)
        rest -= reach
        t = ends[p]
        p += 1


def _leg_time(t: float, rest: float, starts: Sequence[float], ends: Sequence[float],
              speeds: Sequence[float]) -> float:
    last = len(starts) - 1
    p = bisect_right(starts, t) - 1
    if p < 0:
        p = 0
    elif p > last:
        p = last
    elapsed = 0.0
    while p < last:
        reach = (ends[p] - t) * speeds[p]
        if rest <= reach:
            return elapsed + rest / speeds[p]
        elapsed += ends[p] - t
        rest -= reach
        t = ends[p]
        p += 1
    return elapsed + rest / speeds[last]


def propagate_route_times(depart_depot: int, visits: Sequence[int], start: float,
                          inst: Instance) -> tuple[list[float], list[float]]:
    """Arrival minute at each customer of a route, and the leg time into each.

    The vehicle leaves the depot at ``start`` and never waits: each arrival is
    the previous arrival plus its service time plus the leg time.
    """
    starts, ends, speeds = inst.schedule.bounds
    dist = inst.dist_rows
    m = inst.n_depots
    customers = inst.customers
    arrivals: list[float] = []
    legs: list[float] = []
    prev = depart_depot
    t = start
    for c in visits:
        node = m + c
        leg = _leg_time(t, dist[prev][node], starts, ends, speeds)
        t += leg
        arrivals.append(t)
        legs.append(leg)
        t += customers[c].service_time
        prev = node
    return arrivals, legs
