"""Vehicle set-off times: one fixed clock time, or independent uniform draws."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .cost import Route, make_route
from .instance import Instance

HORIZON_START = 9 * 60  # the planning horizon opens at 9:00


def clock_to_minutes(text: str) -> float:
    """'9:30' -> 30.0 (minutes after 9:00)."""
    try:
        hh, mm = text.strip().split(":")
        value = int(hh) * 60 + int(mm) - HORIZON_START
    except ValueError as exc:
        raise ValueError(f"bad clock time {text!r}, expected HH:MM") from exc
    if value < 0:
        raise ValueError(f"clock time {text!r} is before 9:00")
    return float(value)


@dataclass(frozen=True)
class DeparturePolicy:
    kind: str = "fixed"
    t0: float = 0.0
    lo: float = 0.0
    hi: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("fixed", "flexible"):
            raise ValueError(f"unknown departure policy {self.kind!r}")
        if self.t0 < 0 or self.lo < 0:
            raise ValueError("departure times must be >= 0")
        if self.lo > self.hi and self.kind == "flexible":
            raise ValueError("flexible window needs lo <= hi")

    @classmethod
    def fixed(cls, t0: float = 0.0) -> DeparturePolicy:
        return cls("fixed", t0=t0)

    @classmethod
    def flexible(cls, lo: float, hi: float, seed: int = 0) -> DeparturePolicy:
        return cls("flexible", lo=lo, hi=hi, seed=seed)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> DeparturePolicy:
        """``fixed:HH:MM`` or ``flexible:HH:MM-HH:MM``."""
        kind, _, rest = text.partition(":")
        if kind == "fixed":
            return cls.fixed(clock_to_minutes(rest))
        if kind == "flexible":
            lo, sep, hi = rest.partition("-")
            if not sep:
                raise ValueError(f"flexible policy needs a range, got {text!r}")
            return cls.flexible(clock_to_minutes(lo), clock_to_minutes(hi), seed)
        raise ValueError(f"bad departure policy {text!r}")

    def starts(self, n: int) -> list[float]:
        if self.kind == "fixed":
            return [self.t0] * n
        rng = random.Random(self.seed)
        return [rng.uniform(self.lo, self.hi) for _ in range(n)]


def assign_departures(routes: Sequence[Route], policy: DeparturePolicy,
                      inst: Instance) -> tuple[Route, ...]:
    """Give every route its start time under the policy and re-propagate arrivals."""
    starts = policy.starts(len(routes))
    return tuple(make_route(inst, r.depart_depot, r.return_depot, r.visits, s)
                 for r, s in zip(routes, starts))
