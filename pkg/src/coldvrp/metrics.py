"""Service and utilisation indicators for a finished routing plan."""
from __future__ import annotations

from dataclasses import dataclass

from .instance import Customer, Instance


@dataclass(frozen=True)
class IndicatorReport:
    lr: float   # loading rate: mean load / capacity
    flr: float  # share of routes loaded to the fullness threshold
    cs: float   # mean customer satisfaction
    ear: float  # share of visits arriving before the window opens
    tr: float   # share of visits arriving after the window closes

    def as_dict(self) -> dict[str, float]:
        return {"lr": self.lr, "flr": self.flr, "cs": self.cs, "ear": self.ear, "tr": self.tr}


def customer_satisfaction(arrival: float, customer: Customer) -> float:
    """Fuzzy appointment satisfaction.

    Full marks between the ideal earliest time and the window opening, a
    linear fall to zero across the window, and nothing outside that range.
    A zero-width window scores 1 up to its opening and 0 after it.
    """
    et_star, et, lt = customer.ideal_earliest, customer.earliest, customer.latest
    if et_star <= arrival <= et:
        return 1.0
    if et < arrival <= lt:
        return 1.0 - (arrival - et) / (lt - et)
    return 0.0


def indicators(solution, inst: Instance, flr_threshold: float = 1.0) -> IndicatorReport:
    """LR, FLR, CS, EAR and TR for ``solution``; EAR and TR count customer visits."""
    routes = [r for r in solution.routes if r.visits]
    if not routes:
        raise ValueError("indicators need at least one non-empty route")
    q = inst.vehicle.capacity
    loads = [r.load for r in routes]
    lr = sum(loads) / (q * len(routes))
    flr = sum(1 for x in loads if x >= flr_threshold * q - 1e-9) / len(routes)

    scores, early, late = [], 0, 0
    for r in routes:
        for c, a in zip(r.visits, r.arrivals):
            cust = inst.customers[c]
            scores.append(customer_satisfaction(a, cust))
            early += a < cust.earliest
            late += a > cust.latest
    n = len(scores)
    return IndicatorReport(lr=lr, flr=flr, cs=sum(scores) / n, ear=early / n, tr=late / n)
