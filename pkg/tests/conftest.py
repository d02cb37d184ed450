import random

import pytest

from coldvrp.instance import (CostParams, Customer, Depot, HighwayNetwork, Instance,
                              SpeedSchedule, VehicleSpec, load_defaults)

TABLE_SPEEDS = (10, 15, 15, 30, 30, 15, 15, 10)


def default_costs(**changes) -> CostParams:
    from dataclasses import replace
    return replace(CostParams.from_defaults(load_defaults()), **changes)


def make_instance(depots, customers, *, capacity=80.0, fuel=(0.165, 0.377),
                  speeds=TABLE_SPEEDS, threshold=1e9, costs=None, name="tiny"):
    """depots: (x, y, fleet); customers: (x, y, demand, earliest, latest, service[, depot])."""
    ds = [Depot(i, x, y, fleet) for i, (x, y, fleet) in enumerate(depots)]
    cs = []
    for i, rec in enumerate(customers):
        x, y, q, e, l, s = rec[:6]
        bound = rec[6] if len(rec) > 6 else None
        cs.append(Customer(i, x, y, q, e, l, max(0.0, e - 60.0), s, depot=bound))
    return Instance(
        depots=tuple(ds), customers=tuple(cs),
        vehicle=VehicleSpec(capacity, *fuel),
        schedule=SpeedSchedule.uniform(speeds, 60.0),
        costs=costs or default_costs(),
        highway=HighwayNetwork.from_depots(ds, threshold),
        name=name,
    )


def random_tiny_instance(seed: int, n_customers: int = 4, n_depots: int = 2,
                         side: float = 20.0, fleet: int = 3) -> Instance:
    rng = random.Random(seed)
    depots = [(rng.uniform(0, side), rng.uniform(0, side), fleet) for _ in range(n_depots)]
    customers = []
    for _ in range(n_customers):
        e = rng.uniform(60, 240)
        customers.append((rng.uniform(0, side), rng.uniform(0, side), rng.randint(1, 25),
                          e, e + rng.uniform(60, 120), rng.uniform(5, 15)))
    return make_instance(depots, customers)


@pytest.fixture
def two_depot_instance() -> Instance:
    return make_instance(
        [(0.0, 0.0, 2), (10.0, 0.0, 2)],
        [(2.0, 1.0, 10, 60, 180, 5), (3.0, -2.0, 20, 90, 200, 10),
         (8.0, 1.0, 30, 120, 240, 5), (9.0, -1.0, 15, 60, 150, 8)],
    )


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdicts, one line per criterion, after the run."""
    import sys
    module = sys.modules.get("test_acceptance")
    if module is None or not module.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.VERDICTS):
        terminalreporter.write_line(module.VERDICTS[number])
