"""Solution JSON and tabular CSV output.

Column order of every CSV written here is fixed by the ``*_COLUMNS`` tuples
so downstream scripts can rely on it.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping

from .cost import COST_FIELDS, CostBreakdown
from .instance import Instance
from .metrics import IndicatorReport
from .solution import Solution

INDICATOR_FIELDS = ("lr", "flr", "cs", "ear", "tr")
COSTS_COLUMNS = ("strategy", "n_vehicles", *COST_FIELDS, *INDICATOR_FIELDS)
TRACE_COLUMNS = ("iteration", "temperature", "current", "best")


def solution_to_dict(solution: Solution, inst: Instance, cost: CostBreakdown,
                     report: IndicatorReport | None = None) -> dict:
    routes = []
    for r in solution.routes:
        routes.append({
            "depart_depot": inst.depots[r.depart_depot].id,
            "return_depot": inst.depots[r.return_depot].id,
            "start": r.start,
            "visits": [inst.customers[c].id for c in r.visits],
            "arrivals": list(r.arrivals),
            "load": r.load,
        })
    plan = solution.rebalance
    out = {
        "instance": inst.name,
        "strategy": solution.strategy,
        "routes": routes,
        "rebalance": {
            "transfers": [{"from": inst.depots[i].id, "to": inst.depots[j].id, "count": z}
                          for i, j, z in (plan.transfers if plan else ())],
            "cost": plan.cost if plan else 0.0,
        },
        "cost": {k: cost.as_dict()[k] for k in COST_FIELDS},
    }
    if report is not None:
        out["indicators"] = report.as_dict()
    return out


def write_solution_json(path: str | Path, solution: Solution, inst: Instance,
                        cost: CostBreakdown, report: IndicatorReport | None = None) -> None:
    data = solution_to_dict(solution, inst, cost, report)
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def costs_row(strategy: str, n_vehicles: int, cost: CostBreakdown,
              report: IndicatorReport) -> dict:
    row: dict = {"strategy": strategy, "n_vehicles": n_vehicles}
    row.update({k: cost.as_dict()[k] for k in COST_FIELDS})
    row.update(report.as_dict())
    return row


def write_csv(path: str | Path, columns: Iterable[str], rows: Iterable[Mapping]) -> None:
    columns = list(columns)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k, "") for k in columns})


def write_trace_csv(path: str | Path, trace) -> None:
    write_csv(path, TRACE_COLUMNS, (dict(zip(TRACE_COLUMNS, row)) for row in trace))
