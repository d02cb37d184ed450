"""Command-line front end: ``coldvrp {solve,compare,sweep,oracle,generate}``.

Exit codes: 0 on success, 1 when a plan is infeasible or fails validation,
2 on usage errors.
"""
from __future__ import annotations

import argparse
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .construction import InfeasibleError, PfihWeights
from .cost import COST_FIELDS, CostBreakdown
from .departure import DeparturePolicy
from .instance import (CostParams, GenerationSpec, Instance, InstanceError, generate_instance,
                       load_defaults, load_instance, parse_defaults, save_instance,
                       split_standalone_demand)
from .io import (COSTS_COLUMNS, INDICATOR_FIELDS, costs_row, write_csv, write_solution_json,
                 write_trace_csv)
from .metrics import indicators
from .oracle import OracleSizeError, exact_solve
from .rebalance import DisconnectedNetworkError
from .savns import VARIANTS, SavnsConfig
from .solution import STRATEGIES, validate_solution
from .strategies import solve

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE = 0, 1, 2

COMPARE_COLUMNS = ("strategy", "reps", *COST_FIELDS, *INDICATOR_FIELDS,
                   "std", "std_avg", "mre", "savings_vs_standalone")
SWEEP_COLUMNS = ("param", "value", "strategy", "seed", *COST_FIELDS, *INDICATOR_FIELDS)
# sweep names -> config keys
SWEEP_PARAMS = {"lambda": "carbon_emission", "c1": "cooling_per_hour", "alpha": "rebalance_discount"}

_COST_KEYS = {
    "fix_cost": "fix_cost", "travel_unit": "travel_unit",
    "rebalance_discount": "rebalance_discount", "cooling_per_hour": "cooling_unit",
    "early_penalty_per_hour": "early_penalty", "late_penalty_per_hour": "late_penalty",
    "good_loss": "good_loss", "carbon_emission": "carbon_emission",
    "carbon_price": "carbon_price",
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# shared plumbing

def _config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("parameter overrides (defaults from the config file)")
    group.add_argument("--config", help="key = value file layered over the packaged defaults")
    for key in load_defaults():
        group.add_argument("--" + key.replace("_", "-"), dest="cfg_" + key, metavar="VALUE")


def _overrides(args) -> dict:
    text = "\n".join(f"{k[4:]} = {v}" for k, v in vars(args).items()
                     if k.startswith("cfg_") and v is not None)
    try:
        return parse_defaults(text)
    except InstanceError as exc:
        raise UsageError(str(exc)) from exc


def _load(args) -> tuple[Instance, dict]:
    overrides = _overrides(args)
    cfg = load_defaults(args.config, overrides)
    inst = load_instance(args.instance, args.format, cfg)
    # flags win over cost blocks embedded in the instance file
    derived = CostParams.from_defaults(cfg)
    changes = {_COST_KEYS[k]: getattr(derived, _COST_KEYS[k]) for k in overrides if k in _COST_KEYS}
    if changes:
        inst = inst.with_costs(**changes)
    return inst, cfg


def _policy(text: str, seed: int) -> DeparturePolicy:
    try:
        return DeparturePolicy.parse(text, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _instance_for(inst: Instance, strategy: str, seed: int) -> Instance:
    if strategy == "standalone" and any(c.depot is None for c in inst.customers):
        return split_standalone_demand(inst, seed)
    return inst


def _run(job: tuple) -> tuple:
    """One solver run; module-level so worker processes can pickle it."""
    inst, strategy, cfg, seed, policy_text, variant, ba_order = job
    run_inst = _instance_for(inst, strategy, seed)
    config = SavnsConfig.from_defaults(cfg, seed=seed, variant=variant)
    policy = DeparturePolicy.parse(policy_text, seed)
    weights = PfihWeights(*cfg["pfih_weights"])
    sol, cost = solve(run_inst, strategy, config, policy, weights, ba_order=ba_order)
    problems = validate_solution(sol, run_inst, strategy)
    return sol, cost, indicators(sol, run_inst), problems, run_inst


def _map(jobs: list[tuple], n_jobs: int) -> list[tuple]:
    if n_jobs <= 1 or len(jobs) <= 1:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(_run, jobs))


def _print_breakdown(strategy: str, cost: CostBreakdown, n_vehicles: int) -> None:
    d = cost.as_dict()
    print(f"strategy {strategy}: {n_vehicles} vehicles")
    for k in COST_FIELDS:
        print(f"  {k:<10} {d[k]:>14.4f}")


def _mean_row(costs: list[CostBreakdown], reports) -> dict:
    row = {k: statistics.fmean(c.as_dict()[k] for c in costs) for k in COST_FIELDS}
    for k in INDICATOR_FIELDS:
        row[k] = statistics.fmean(getattr(r, k) for r in reports)
    return row


def stability(objs: list[float]) -> tuple[float, float, float]:
    """(std, std/avg, mre) of replication objectives; mre = max |obj - mean| / mean."""
    mean = statistics.fmean(objs)
    std = statistics.pstdev(objs) if len(objs) > 1 else 0.0
    mre = max(abs(o - mean) for o in objs) / mean if mean else 0.0
    return std, (std / mean if mean else 0.0), mre


# ---------------------------------------------------------------------------
# subcommands

def cmd_generate(args) -> int:
    cfg = load_defaults(args.config, _overrides(args))
    spec = GenerationSpec(
        args.customers, args.depots, area_km2=args.area,
        fleet_range=(args.fleet_min, args.fleet_max), seed=args.seed,
        capacity=cfg["capacity"], highway_threshold_km=cfg["highway_threshold_km"])
    inst = generate_instance(spec, cfg)
    save_instance(inst, args.out)
    print(f"wrote {args.out}: {inst.n_customers} customers, {inst.n_depots} depots")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst, cfg = _load(args)
    _policy(args.departure, args.seed)
    run_inst = _instance_for(inst, args.strategy, args.seed)
    config = SavnsConfig.from_defaults(cfg, seed=args.seed, variant=args.variant)
    trace: list | None = [] if args.trace else None
    sol, cost = solve(run_inst, args.strategy, config, DeparturePolicy.parse(args.departure, args.seed),
                      PfihWeights(*cfg["pfih_weights"]), trace, ba_order=args.ba_order)
    problems = validate_solution(sol, run_inst, args.strategy)
    report = indicators(sol, run_inst)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_solution_json(out / "solution.json", sol, run_inst, cost, report)
    write_csv(out / "costs.csv", COSTS_COLUMNS, [costs_row(args.strategy, sol.n_vehicles, cost, report)])
    if trace is not None:
        write_trace_csv(args.trace, trace)
    _print_breakdown(args.strategy, cost, sol.n_vehicles)
    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_compare(args) -> int:
    inst, cfg = _load(args)
    _policy(args.departure, args.seed_base)
    strategies = args.strategies
    jobs = [(inst, s, cfg, args.seed_base + r, args.departure, args.variant, args.ba_order)
            for s in strategies for r in range(args.reps)]
    results = _map(jobs, args.jobs)
    rows, bad = [], []
    for i, s in enumerate(strategies):
        chunk = results[i * args.reps:(i + 1) * args.reps]
        costs = [c for _, c, _, _, _ in chunk]
        row = {"strategy": s, "reps": args.reps, **_mean_row(costs, [r for _, _, r, _, _ in chunk])}
        row["std"], row["std_avg"], row["mre"] = stability([c.total for c in costs])
        rows.append(row)
        bad += [p for _, _, _, probs, _ in chunk for p in probs]
    base = next((r["total"] for r in rows if r["strategy"] == "standalone"), None)
    for r in rows:
        r["savings_vs_standalone"] = (base - r["total"]) / base if base else ""
    write_csv(args.out, COMPARE_COLUMNS, rows)
    for r in rows:
        print(f"{r['strategy']:<11} total {r['total']:>12.2f}  std/avg {r['std_avg']:.4f}  "
              f"mre {r['mre']:.4f}")
    for p in bad:
        print(f"violation: {p}", file=sys.stderr)
    return EXIT_INFEASIBLE if bad else EXIT_OK


def cmd_sweep(args) -> int:
    if not args.values:
        raise UsageError("sweep needs at least one value")
    inst, cfg = _load(args)
    _policy(args.departure, args.seed_base)
    key = SWEEP_PARAMS[args.param]
    cells, jobs = [], []
    for value in args.values:
        cell_cfg = dict(cfg, **{key: value})
        cell_inst = inst.with_costs(**{_COST_KEYS[key]: getattr(CostParams.from_defaults(cell_cfg),
                                                               _COST_KEYS[key])})
        for s in args.strategies:
            for r in range(args.reps):
                seed = args.seed_base + r
                cells.append((value, s, seed))
                jobs.append((cell_inst, s, cell_cfg, seed, args.departure, args.variant, args.ba_order))
    results = _map(jobs, args.jobs)
    rows, bad = [], []
    for (value, s, seed), (_, cost, report, probs, _) in zip(cells, results):
        row = {"param": args.param, "value": value, "strategy": s, "seed": seed}
        row.update({k: cost.as_dict()[k] for k in COST_FIELDS})
        row.update(report.as_dict())
        rows.append(row)
        bad += probs
    write_csv(args.out, SWEEP_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    for p in bad:
        print(f"violation: {p}", file=sys.stderr)
    return EXIT_INFEASIBLE if bad else EXIT_OK


def cmd_oracle(args) -> int:
    inst, cfg = _load(args)
    policy = _policy(args.departure, args.seed)
    run_inst = _instance_for(inst, args.strategy, args.seed)
    sol, cost = exact_solve(run_inst, args.strategy, policy)
    report = indicators(sol, run_inst)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_solution_json(out / "solution.json", sol, run_inst, cost, report)
    write_csv(out / "costs.csv", COSTS_COLUMNS, [costs_row(args.strategy, sol.n_vehicles, cost, report)])
    _print_breakdown(args.strategy, cost, sol.n_vehicles)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _strategy_list(text: str) -> list[str]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    for s in items:
        if s not in STRATEGIES:
            raise argparse.ArgumentTypeError(f"unknown strategy {s!r}; choose from {STRATEGIES}")
    if not items:
        raise argparse.ArgumentTypeError("no strategies given")
    return items


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance file")
    p.add_argument("--format", choices=("native-json", "cordeau"), default="native-json")
    p.add_argument("--departure", default="fixed:9:00",
                   help="fixed:HH:MM or flexible:HH:MM-HH:MM (default fixed:9:00)")
    p.add_argument("--variant", choices=VARIANTS, default="savns",
                   help="search variant; sa and vns are the ablations")
    p.add_argument("--ba-order", choices=("nonincreasing", "nondecreasing"),
                   default="nonincreasing", help="BOC balancing sort direction")
    _config_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coldvrp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random instance as native JSON")
    p.add_argument("--customers", type=int, required=True)
    p.add_argument("--depots", type=int, required=True)
    p.add_argument("--area", type=float, default=900.0, help="square area, km^2")
    p.add_argument("--fleet-min", type=int, default=6)
    p.add_argument("--fleet-max", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _config_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run one strategy")
    _instance_args(p)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--trace", help="write the per-iteration trace CSV here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="all strategies over replications")
    _instance_args(p)
    p.add_argument("--strategies", type=_strategy_list, default=list(STRATEGIES))
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="summary CSV path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="sensitivity sweep over one cost parameter")
    _instance_args(p)
    p.add_argument("--param", choices=sorted(SWEEP_PARAMS), required=True)
    p.add_argument("--values", type=_float_list, required=True,
                   help="comma-separated; c1 in $/h")
    p.add_argument("--strategies", type=_strategy_list, default=["cc", "boc", "rboc"])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="sweep CSV path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exact optimum of a tiny instance")
    _instance_args(p)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.add_argument("--seed", type=int, default=0, help="seed for stand-alone order splitting")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on bad flags
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (InfeasibleError, DisconnectedNetworkError, OracleSizeError, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
