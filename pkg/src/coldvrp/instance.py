"""Problem data for the collaborative cold-chain MDVRPTW.

All times are minutes from the start of the planning horizon (9:00),
distances are km, demands are boxes. Cost coefficients are stored per
minute; hourly rates from the defaults file are converted on load.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np


class InstanceError(ValueError):
    """Raised when instance data fails to parse or violates an invariant."""


# ---------------------------------------------------------------------------
# defaults file


_LIST_KEYS = {"speeds", "pfih_weights"}


def parse_defaults(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InstanceError(f"defaults line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in _LIST_KEYS:
                out[key] = [float(v) for v in value.split(",") if v.strip()]
            else:
                out[key] = float(value)
        except ValueError as exc:
            raise InstanceError(f"defaults key {key!r}: bad value {value!r}") from exc
    return out


def load_defaults(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Read the packaged defaults, then an optional user file, then overrides."""
    text = resources.files("coldvrp").joinpath("defaults.cfg").read_text()
    cfg = parse_defaults(text)
    if path is not None:
        cfg.update(parse_defaults(Path(path).read_text()))
    if overrides:
        cfg.update(overrides)
    return cfg


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TimePeriod:
    start_min: float
    end_min: float
    speed: float  # km/h

    def __post_init__(self):
        if not self.start_min < self.end_min:
            raise InstanceError(f"time period [{self.start_min}, {self.end_min}) is empty")
        if not self.speed > 0:
            raise InstanceError(f"time period speed must be positive, got {self.speed}")


@dataclass(frozen=True)
class SpeedSchedule:
    periods: tuple[TimePeriod, ...]

    def __post_init__(self):
        if not self.periods:
            raise InstanceError("speed schedule has no periods")
        if self.periods[0].start_min != 0:
            raise InstanceError("speed schedule must start at minute 0")
        for a, b in zip(self.periods, self.periods[1:]):
            if a.end_min != b.start_min:
                raise InstanceError(
                    f"speed schedule gap between {a.end_min} and {b.start_min}"
                )

    @classmethod
    def uniform(cls, speeds: Sequence[float], period_minutes: float = 60.0) -> SpeedSchedule:
        return cls(tuple(
            TimePeriod(i * period_minutes, (i + 1) * period_minutes, float(v))
            for i, v in enumerate(speeds)
        ))

    @cached_property
    def bounds(self) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
        """(starts, ends, speeds in km/min) as plain tuples for the hot loop."""
        return (
            tuple(p.start_min for p in self.periods),
            tuple(p.end_min for p in self.periods),
            tuple(p.speed / 60.0 for p in self.periods),
        )


@dataclass(frozen=True)
class Depot:
    id: int
    x: float
    y: float
    fleet_size: int

    def __post_init__(self):
        if self.fleet_size < 0:
            raise InstanceError(f"depot {self.id}: fleet_size must be >= 0")


@dataclass(frozen=True)
class Customer:
    id: int
    x: float
    y: float
    demand: float
    earliest: float
    latest: float
    ideal_earliest: float
    service_time: float
    depot: int | None = None   # bound depot index (stand-alone orders only)
    origin: int | None = None  # id of the customer a split order came from

    def __post_init__(self):
        if not self.demand > 0:
            raise InstanceError(f"customer {self.id}: demand must be positive")
        if not 0 <= self.ideal_earliest <= self.earliest:
            raise InstanceError(
                f"customer {self.id}: ideal_earliest must lie in [0, earliest]"
            )
        if self.earliest > self.latest:
            raise InstanceError(f"customer {self.id}: earliest > latest")
        if self.service_time < 0:
            raise InstanceError(f"customer {self.id}: service_time must be >= 0")


@dataclass(frozen=True)
class VehicleSpec:
    capacity: float
    fuel_empty: float
    fuel_full: float

    def __post_init__(self):
        if not self.capacity > 0:
            raise InstanceError("vehicle capacity must be positive")
        if not 0 < self.fuel_empty <= self.fuel_full:
            raise InstanceError("vehicle fuel rates need 0 < fuel_empty <= fuel_full")


@dataclass(frozen=True)
class CostParams:
    fix_cost: float
    travel_unit: float
    rebalance_discount: float
    cooling_unit: float      # $/min
    early_penalty: float     # $/min
    late_penalty: float      # $/min
    good_loss: float         # $/(box*min)
    carbon_emission: float   # kgCO2/L
    carbon_price: float      # $/kgCO2

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise InstanceError(f"cost parameter {name} must be >= 0")
        if self.rebalance_discount > 1:
            raise InstanceError("rebalance_discount must lie in [0, 1]")

    @classmethod
    def from_defaults(cls, cfg: dict) -> CostParams:
        return cls(
            fix_cost=cfg["fix_cost"],
            travel_unit=cfg["travel_unit"],
            rebalance_discount=cfg["rebalance_discount"],
            cooling_unit=cfg["cooling_per_hour"] / 60.0,
            early_penalty=cfg["early_penalty_per_hour"] / 60.0,
            late_penalty=cfg["late_penalty_per_hour"] / 60.0,
            good_loss=cfg["good_loss"],
            carbon_emission=cfg["carbon_emission"],
            carbon_price=cfg["carbon_price"],
        )


@dataclass(frozen=True)
class HighwayNetwork:
    """Undirected depot graph: an edge wherever two depots are closer than the threshold."""

    threshold_km: float
    edges: tuple[tuple[int, int, float], ...] = ()

    @classmethod
    def from_depots(cls, depots: Sequence[Depot], threshold_km: float) -> HighwayNetwork:
        edges = []
        for i, a in enumerate(depots):
            for j in range(i + 1, len(depots)):
                b = depots[j]
                d = math.hypot(a.x - b.x, a.y - b.y)
                if d < threshold_km:
                    edges.append((i, j, d))
        return cls(threshold_km, tuple(edges))

    def is_connected(self, n_depots: int) -> bool:
        if n_depots <= 1:
            return True
        adj: dict[int, set[int]] = {i: set() for i in range(n_depots)}
        for i, j, _ in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == n_depots


@dataclass(frozen=True)
class Instance:
    depots: tuple[Depot, ...]
    customers: tuple[Customer, ...]
    vehicle: VehicleSpec
    schedule: SpeedSchedule
    costs: CostParams
    highway: HighwayNetwork
    name: str = "instance"
    dist: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depots", tuple(self.depots))
        object.__setattr__(self, "customers", tuple(self.customers))
        if not self.depots:
            raise InstanceError("instance needs at least one depot")
        if not self.customers:
            raise InstanceError("instance needs at least one customer")
        if len({d.id for d in self.depots}) != len(self.depots):
            raise InstanceError("depot ids are not unique")
        if len({c.id for c in self.customers}) != len(self.customers):
            raise InstanceError("customer ids are not unique")
        for c in self.customers:
            if c.demand > self.vehicle.capacity:
                raise InstanceError(f"customer {c.id}: demand exceeds vehicle capacity")
            if c.depot is not None and not 0 <= c.depot < len(self.depots):
                raise InstanceError(f"customer {c.id}: bound depot {c.depot} does not exist")
        xy = np.array([(n.x, n.y) for n in (*self.depots, *self.customers)], dtype=float)
        d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    @cached_property
    def dist_rows(self) -> list[list[float]]:
        # plain lists index faster than numpy scalars in the inner loops
        return self.dist.tolist()

    @cached_property
    def demands(self) -> list[float]:
        return [c.demand for c in self.customers]

    # Node numbering: depots are 0..M-1, customer i is node M+i.
    @property
    def n_depots(self) -> int:
        return len(self.depots)

    @property
    def n_customers(self) -> int:
        return len(self.customers)

    def node(self, customer: int) -> int:
        return len(self.depots) + customer

    def nearest_depot(self, customer: int) -> int:
        """Closest depot to a customer; ties go to the lowest index."""
        row = self.dist[self.node(customer), : len(self.depots)]
        return int(np.argmin(row))

    def with_costs(self, **changes) -> Instance:
        return replace(self, costs=replace(self.costs, **changes))


# ---------------------------------------------------------------------------
# loading


def _schedule_from(data, cfg: dict) -> SpeedSchedule:
    if data is None:
        return SpeedSchedule.uniform(cfg["speeds"], cfg["period_minutes"])
    return SpeedSchedule(tuple(TimePeriod(p["start"], p["end"], p["speed"]) for p in data))


def _customer(rec: dict, offset: float) -> Customer:
    try:
        earliest = float(rec["earliest"])
        ideal = rec.get("ideal_earliest")
        return Customer(
            id=int(rec["id"]),
            x=float(rec["x"]),
            y=float(rec["y"]),
            demand=float(rec["demand"]),
            earliest=earliest,
            latest=float(rec["latest"]),
            ideal_earliest=float(ideal) if ideal is not None else max(0.0, earliest - offset),
            service_time=float(rec.get("service_time", 0.0)),
            depot=rec.get("depot"),
            origin=rec.get("origin"),
        )
    except KeyError as exc:
        raise InstanceError(f"customer record {rec.get('id', '?')}: missing field {exc}") from exc


def instance_from_dict(data: dict, cfg: dict | None = None) -> Instance:
    """Build an Instance from the native JSON layout; absent blocks use defaults."""
    cfg = cfg or load_defaults()
    try:
        depots = [
            Depot(int(d["id"]), float(d["x"]), float(d["y"]),
                  int(d.get("fleet_size", cfg["fleet_size"])))
            for d in data["depots"]
        ]
        offset = cfg["ideal_earliest_offset"]
        customers = [_customer(c, offset) for c in data["customers"]]
    except KeyError as exc:
        raise InstanceError(f"missing field {exc}") from exc
    v = data.get("vehicle", {})
    vehicle = VehicleSpec(
        float(v.get("capacity", cfg["capacity"])),
        float(v.get("fuel_empty", cfg["fuel_empty"])),
        float(v.get("fuel_full", cfg["fuel_full"])),
    )
    costs = CostParams.from_defaults(cfg)
    if "costs" in data:
        costs = replace(costs, **{k: float(x) for k, x in data["costs"].items()})
    threshold = float(data.get("highway_threshold_km", cfg["highway_threshold_km"]))
    return Instance(
        depots=tuple(depots),
        customers=tuple(customers),
        vehicle=vehicle,
        schedule=_schedule_from(data.get("schedule"), cfg),
        costs=costs,
        highway=HighwayNetwork.from_depots(depots, threshold),
        name=str(data.get("name", "instance")),
    )


def instance_to_dict(inst: Instance) -> dict:
    def cust(c: Customer) -> dict:
        rec = {
            "id": c.id, "x": c.x, "y": c.y, "demand": c.demand,
            "earliest": c.earliest, "latest": c.latest,
            "ideal_earliest": c.ideal_earliest, "service_time": c.service_time,
        }
        if c.depot is not None:
            rec["depot"] = c.depot
        if c.origin is not None:
            rec["origin"] = c.origin
        return rec

    return {
        "name": inst.name,
        "depots": [{"id": d.id, "x": d.x, "y": d.y, "fleet_size": d.fleet_size}
                   for d in inst.depots],
        "customers": [cust(c) for c in inst.customers],
        "vehicle": {"capacity": inst.vehicle.capacity,
                    "fuel_empty": inst.vehicle.fuel_empty,
                    "fuel_full": inst.vehicle.fuel_full},
        "schedule": [{"start": p.start_min, "end": p.end_min, "speed": p.speed}
                     for p in inst.schedule.periods],
        "costs": dict(inst.costs.__dict__),
        "highway_threshold_km": inst.highway.threshold_km,
    }


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2))


def read_cordeau(text: str, cfg: dict | None = None, name: str = "cordeau") -> Instance:
    """Parse a Cordeau MDVRPTW file (problem type 6).

    Layout: ``type m n t`` header, ``t`` lines of ``D Q``, then ``n`` customer
    lines followed by ``t`` depot lines, each ``i x y d q f a [list] e l``.
    ``m`` (vehicles per depot) becomes every depot's fleet size.
    """
    cfg = cfg or load_defaults()
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    try:
        ptype, m, n, t = (int(v) for v in rows[0][:4])
        if ptype != 6:
            raise InstanceError(f"expected Cordeau problem type 6 (MDVRPTW), got {ptype}")
        capacity = float(rows[1][1])
        node_rows = rows[1 + t: 1 + t + n + t]
        if len(node_rows) != n + t:
            raise InstanceError(f"expected {n + t} node lines, found {len(node_rows)}")
        offset = cfg["ideal_earliest_offset"]
        customers = []
        for r in node_rows[:n]:
            e, l = float(r[-2]), float(r[-1])
            customers.append(Customer(
                id=int(r[0]), x=float(r[1]), y=float(r[2]),
                demand=float(r[4]), earliest=e, latest=l,
                ideal_earliest=max(0.0, e - offset), service_time=float(r[3]),
            ))
        depots = [Depot(int(r[0]), float(r[1]), float(r[2]), m) for r in node_rows[n:]]
    except (IndexError, ValueError) as exc:
        raise InstanceError(f"malformed Cordeau file: {exc}") from exc
    return Instance(
        depots=tuple(depots),
        customers=tuple(customers),
        vehicle=VehicleSpec(capacity, cfg["fuel_empty"], cfg["fuel_full"]),
        schedule=SpeedSchedule.uniform(cfg["speeds"], cfg["period_minutes"]),
        costs=CostParams.from_defaults(cfg),
        highway=HighwayNetwork.from_depots(depots, cfg["highway_threshold_km"]),
        name=name,
    )


def load_instance(path: str | Path, format: str = "native-json",
                  cfg: dict | None = None) -> Instance:
    path = Path(path)
    text = path.read_text()
    if format == "native-json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
        return instance_from_dict(data, cfg)
    if format == "cordeau":
        return read_cordeau(text, cfg, name=path.stem)
    raise InstanceError(f"unknown instance format {format!r}")


# ---------------------------------------------------------------------------
# generation


@dataclass(frozen=True)
class GenerationSpec:
    n_customers: int
    n_depots: int
    area_km2: float = 900.0
    demand_range: tuple[int, int] = (1, 25)
    service_range: tuple[float, float] = (5.0, 15.0)
    fleet_range: tuple[int, int] = (6, 10)
    earliest_range: tuple[float, float] = (60.0, 300.0)
    window_width_range: tuple[float, float] = (60.0, 120.0)
    capacity: float = 80.0
    highway_threshold_km: float = 60.0
    # Redraw depot sites until every nearest-depot cluster's demand fits in
    # this share of its fleet capacity; None disables the check.
    cluster_load_cap: float | None = 0.85
    seed: int = 0
    name: str = "generated"

    def __post_init__(self):
        if self.n_customers < 1 or self.n_depots < 1:
            raise InstanceError("n_customers and n_depots must be >= 1")
        for name in ("demand_range", "service_range", "fleet_range",
                     "earliest_range", "window_width_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise InstanceError(f"{name} is empty")


def _cluster_loads(depot_xy: np.ndarray, cust_xy: np.ndarray, demand: np.ndarray,
                   nearest: int) -> np.ndarray:
    d = np.hypot(cust_xy[:, None, 0] - depot_xy[None, :, 0],
                 cust_xy[:, None, 1] - depot_xy[None, :, 1])
    order = np.argsort(d, axis=1, kind="stable")[:, :nearest]
    loads = np.zeros(len(depot_xy))
    for k in range(nearest):
        np.add.at(loads, order[:, k], demand / nearest)
    return loads


def generate_instance(spec: GenerationSpec, cfg: dict | None = None) -> Instance:
    """Random instance on a square area; deterministic for a fixed seed."""
    cfg = cfg or load_defaults()
    rng = np.random.default_rng(spec.seed)
    side = math.sqrt(spec.area_km2)
    cust_xy = rng.uniform(0.0, side, size=(spec.n_customers, 2))
    demand = rng.integers(spec.demand_range[0], spec.demand_range[1] + 1, size=spec.n_customers)
    service = rng.uniform(*spec.service_range, size=spec.n_customers)
    earliest = rng.uniform(*spec.earliest_range, size=spec.n_customers)
    width = rng.uniform(*spec.window_width_range, size=spec.n_customers)
    fleet = rng.integers(spec.fleet_range[0], spec.fleet_range[1] + 1, size=spec.n_depots)

    for _ in range(1000):
        depot_xy = rng.uniform(0.0, side, size=(spec.n_depots, 2))
        depots = [Depot(i, float(x), float(y), int(f))
                  for i, ((x, y), f) in enumerate(zip(depot_xy, fleet))]
        highway = HighwayNetwork.from_depots(depots, spec.highway_threshold_km)
        if not highway.is_connected(len(depots)):
            continue
        if spec.cluster_load_cap is None:
            break
        cap = spec.cluster_load_cap * spec.capacity * fleet
        nearest = min(2, spec.n_depots)
        if (np.all(_cluster_loads(depot_xy, cust_xy, demand, 1) <= cap)
                and np.all(_cluster_loads(depot_xy, cust_xy, demand, nearest) <= cap)):
            break
    else:
        raise InstanceError("could not place depots satisfying connectivity and load caps")

    offset = cfg["ideal_earliest_offset"]
    customers = [
        Customer(
            id=i, x=float(cust_xy[i, 0]), y=float(cust_xy[i, 1]),
            demand=float(demand[i]),
            earliest=float(earliest[i]), latest=float(earliest[i] + width[i]),
            ideal_earliest=max(0.0, float(earliest[i]) - offset),
            service_time=float(service[i]),
        )
        for i in range(spec.n_customers)
    ]
    return Instance(
        depots=tuple(depots),
        customers=tuple(customers),
        vehicle=VehicleSpec(spec.capacity, cfg["fuel_empty"], cfg["fuel_full"]),
        schedule=SpeedSchedule.uniform(cfg["speeds"], cfg["period_minutes"]),
        costs=CostParams.from_defaults(cfg),
        highway=highway,
        name=spec.name,
    )


def two_nearest_depots(inst: Instance, customer: int) -> tuple[int, int]:
    row = inst.dist[inst.node(customer), : inst.n_depots]
    order = np.argsort(row, kind="stable")
    return int(order[0]), int(order[1])


def split_standalone_demand(inst: Instance, seed: int) -> Instance:
    """Split every customer's demand into orders placed with its two nearest depots.

    Each part is bound to one depot. Parts of size zero are dropped, since an
    order for nothing needs no visit.
    """
    if inst.n_depots < 2:
        raise InstanceError("stand-alone demand splitting needs at least 2 depots")
    rng = np.random.default_rng(seed)
    orders: list[Customer] = []
    for i, c in enumerate(inst.customers):
        first = int(rng.integers(0, int(c.demand) + 1))
        parts = (first, int(c.demand) - first)
        for depot, amount in zip(two_nearest_depots(inst, i), parts):
            if amount > 0:
                orders.append(replace(c, id=len(orders), demand=float(amount),
                                      depot=depot, origin=c.id))
    return replace(inst, customers=tuple(orders), name=f"{inst.name}-standalone")

