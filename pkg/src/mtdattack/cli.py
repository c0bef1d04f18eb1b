"""Command line interface.

Subcommands: validate | build | simulate | optimize | pareto | sweep | export.
Exit codes: 0 success, 1 validation failure, 2 parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import engine, modelfile, optimizer, strategyfile
from .export_dot import model_to_dot, ptmdp_to_dot
from .export_uppaal import export_uppaal
from .model import AmgModel, validate
from .shellio import atomic_write
from .state_space import ExplorationLimitExceeded, build_ptmdp

FRONTIER_METHODS = ("exact", "montecarlo")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _load_model(path: str) -> AmgModel:
    try:
        return modelfile.load_model(path)
    except json.JSONDecodeError as exc:
        print(f"parse error: {path}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        raise SystemExit(2)
    except modelfile.ModelFormatError as exc:
        print(f"parse error: {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _load_valid_model(path: str) -> AmgModel:
    model = _load_model(path)
    issues = validate(model)
    if issues:
        for issue in issues:
            print(f"invalid: {issue}", file=sys.stderr)
        raise SystemExit(1)
    return model


def cmd_validate(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    issues = validate(model)
    if issues:
        for issue in issues:
            print(str(issue))
        print(f"INVALID: {len(issues)} issue(s)")
        return 1
    print("OK")
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    model = _load_valid_model(args.model)
    try:
        ptmdp = build_ptmdp(model, args.limit_states)
    except ExplorationLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    n_trans = sum(len(ts) for ts in ptmdp.transitions.values())
    print(f"locations: {len(ptmdp.locations)}")
    print(f"transitions: {n_trans}")
    print(f"goal: {ptmdp.goal}")
    return 0


def _stats_dict(stats: engine.EvalStats) -> dict:
    def est(e: Optional[engine.Estimate]) -> Optional[dict]:
        if e is None:
            return None
        return {"value": e.value, "stderr": e.stderr, "n": e.n}

    return {
        "n_runs": stats.n_runs,
        "t_max": stats.t_max,
        "c_max": stats.c_max,
        "reach_prob": stats.reach_prob,
        "reach_prob_stderr": stats.reach_prob_stderr,
        "expected_time_given_time_bound": est(stats.time_given_time),
        "expected_cost_given_time_bound": est(stats.cost_given_time),
        "expected_time_given_cost_bound": est(stats.time_given_cost),
        "expected_cost_given_cost_bound": est(stats.cost_given_cost),
        "expected_time_goal_runs": est(stats.uncond_time),
        "expected_cost_goal_runs": est(stats.uncond_cost),
        "goal_runs": stats.goal_runs,
    }


def _stats_csv(stats: engine.EvalStats) -> str:
    def val(e: Optional[engine.Estimate]) -> str:
        return "" if e is None else repr(e.value)

    header = (
        "n_runs,t_max,c_max,reach_prob,reach_prob_stderr,"
        "time_given_time,cost_given_time,time_given_cost,cost_given_cost,"
        "uncond_time,uncond_cost,goal_runs"
    )
    row = ",".join(
        [
            str(stats.n_runs),
            str(stats.t_max),
            "" if stats.c_max is None else str(stats.c_max),
            repr(stats.reach_prob),
            repr(stats.reach_prob_stderr),
            val(stats.time_given_time),
            val(stats.cost_given_time),
            val(stats.time_given_cost),
            val(stats.cost_given_cost),
            val(stats.uncond_time),
            val(stats.uncond_cost),
            str(stats.goal_runs),
        ]
    )
    return header + "\n" + row + "\n"


def cmd_simulate(args: argparse.Namespace) -> int:
    model = _load_valid_model(args.model)
    try:
        strategy = strategyfile.load_strategy(args.strategy, model)
    except strategyfile.StrategyFormatError as exc:
        print(f"strategy error: {exc}", file=sys.stderr)
        return 2
    stats = engine.evaluate(
        model, strategy, args.runs, args.seed, t_max=args.tmax, c_max=args.cmax
    )
    if args.trace_out:
        lines = []
        horizon = args.tmax if args.tmax is not None else engine.default_horizon(model)
        for i in range(min(args.runs, args.trace_runs)):
            trace = engine.simulate_run(
                model, strategy, engine.RngStream(args.seed, i), horizon, record=True
            )
            lines.append(f"# run {i} outcome={trace.outcome}")
            for step in trace.steps:
                lines.append(
                    f"{step.cumulative_time}\t{step.cumulative_cost}\t{step.event}\t{step.next_state}"
                )
        atomic_write(args.trace_out, "\n".join(lines) + "\n")
    if args.format == "json":
        _emit(json.dumps(_stats_dict(stats), indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(_stats_csv(stats), args.out)
    return 0


def _num_str(x) -> str:
    if isinstance(x, Fraction):
        return repr(float(x))
    return repr(float(x))


def frontier_csv(
    model: AmgModel,
    rows: list[tuple[str, dict[str, int], Optional[int], object]],
) -> str:
    """FrontierCsv text: one row per (config, bound) point.

    ``rows`` entries are (config_id, periods, c_max, point-or-None); a None
    point marks an unreachable/omitted entry with empty values.
    """
    dids = sorted(model.defenses)
    header = "config_id," + ",".join(f"t_d_{d}" for d in dids) + \
        ",c_max,expected_time,expected_cost,reach_prob,method"
    out = [header]
    for config_id, periods, c_max, point in rows:
        base = [config_id] + [str(periods[d]) for d in dids]
        cmax_s = "" if c_max is None else str(c_max)
        if point is None:
            out.append(",".join(base + [cmax_s, "", "", "0", ""]))
        else:
            out.append(
                ",".join(
                    base
                    + [
                        cmax_s,
                        _num_str(point.expected_time),
                        _num_str(point.expected_cost),
                        repr(float(point.reach_prob)),
                        point.method,
                    ]
                )
            )
    return "\n".join(out) + "\n"


def _policy_json(result: optimizer.OptimizationResult) -> str:
    entries = []
    for state, activate in result.strategy.table_items():
        entries.append(
            {
                "location": {
                    "activated": list(state.location.activated),
                    "completed": list(state.location.completed),
                },
                "attack_clocks": {a: x for a, x in state.attack_clocks},
                "defense_clocks": list(state.defense_clocks),
                "activate": sorted(activate),
            }
        )
    return json.dumps(entries, indent=2, sort_keys=True) + "\n"


def _current_periods(model: AmgModel) -> dict[str, int]:
    return {d: model.defenses[d].period for d in model.defenses}


def cmd_optimize(args: argparse.Namespace) -> int:
    model = _load_valid_model(args.model)
    periods = _current_periods(model)
    try:
        if args.cmax is not None or args.tmax is not None:
            result = optimizer.optimize_with_bound(
                model, args.objective, t_max=args.tmax, c_max=args.cmax,
                state_cap=args.limit_states,
            )
        elif args.objective == "time":
            result = optimizer.optimize_expected_time(model, state_cap=args.limit_states)
        else:
            result = optimizer.optimize_expected_cost(model, state_cap=args.limit_states)
    except optimizer.UnreachableGoal:
        print("goal unreachable: expected value is infinite", file=sys.stderr)
        _emit(frontier_csv(model, [("base", periods, args.cmax, None)]), args.csv)
        return 0
    except ExplorationLimitExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    point = optimizer.ParetoPoint(
        expected_time=float(result.expected_time),
        expected_cost=float(result.expected_cost),
        strategy=result.strategy,
        bound=args.cmax,
        method="exact" if result.exact else "montecarlo",
    )
    print(f"objective: minimal expected {args.objective}")
    print(f"value: {result.value}")
    print(f"expected_time: {result.expected_time}")
    print(f"expected_cost: {result.expected_cost}")
    print(f"decision_states: {result.n_decision_states}")
    if args.out:
        atomic_write(args.out, _policy_json(result))
    _emit(frontier_csv(model, [("base", periods, args.cmax, point)]), args.csv)
    return 0


def _parse_budgets(text: str) -> list[Optional[int]]:
    if not text.strip():
        return []
    out: list[Optional[int]] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        out.append(None if part.lower() in ("none", "inf") else int(part))
    return out


def cmd_pareto(args: argparse.Namespace) -> int:
    model = _load_valid_model(args.model)
    periods = _current_periods(model)
    budgets = _parse_budgets(args.budgets)
    points, notes = optimizer.pareto_frontier(model, budgets, state_cap=args.limit_states)
    for note in notes:
        print(f"note: {note}", file=sys.stderr)
    rows = [("base", periods, p.bound, p) for p in points]
    _emit(frontier_csv(model, rows), args.csv)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    model = _load_valid_model(args.model)
    try:
        with open(args.budget_spec, encoding="utf-8") as fh:
            spec = json.load(fh)
        constraint = optimizer.BudgetConstraint(
            bases={str(k): int(v) for k, v in spec["bases"].items()},
            radix=int(spec["radix"]),
            budget=int(spec["budget"]),
        )
        budgets = spec.get("cost_budgets", [None])
        budgets = [None if b is None else int(b) for b in budgets]
    except (OSError, KeyError, ValueError, TypeError) as exc:
        print(f"bad budget spec {args.budget_spec}: {exc}", file=sys.stderr)
        return 2
    results = optimizer.sweep_defense_periods(
        model,
        constraint,
        cost_budgets=budgets,
        exact_state_cap=args.limit_states,
        n_runs=args.runs,
        master_seed=args.seed,
        horizon=args.tmax,
        use_fast_kernel=not args.no_fast,
    )
    rows = []
    dominating: list[str] = []
    for res in results:
        if not res.points:
            rows.append((res.config_id, res.periods, None, None))
        for p in res.points:
            rows.append((res.config_id, res.periods, p.bound, p))
        for note in res.notes:
            print(f"note[{res.config_id}]: {note}", file=sys.stderr)
    _emit(frontier_csv(model, rows), args.csv)

    # Configurations whose frontier is not dominated by any other's.
    best = {}
    for res in results:
        for p in res.points:
            key = res.config_id
            if key not in best or (p.expected_time, p.expected_cost) < best[key]:
                best[key] = (p.expected_time, p.expected_cost)
    for cid in sorted(best):
        t, c = best[cid]
        others = [v for k, v in best.items() if k != cid]
        if not any(o[0] <= t and o[1] <= c and o != (t, c) for o in others):
            dominating.append(cid)
    if dominating:
        print("non-dominated configurations: " + ", ".join(dominating), file=sys.stderr)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    model = _load_valid_model(args.model)
    try:
        if args.format == "dot":
            text = model_to_dot(model)
        elif args.format == "dot-ptmdp":
            text = ptmdp_to_dot(build_ptmdp(model, args.limit_states), args.limit_states)
        else:
            text = export_uppaal(build_ptmdp(model, args.limit_states), args.limit_states)
    except (ValueError, ExplorationLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(text, args.out)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtdattack",
        description="Analyze multi-step attacks against systems with moving target defenses.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("model", help="model file (.amg.json)")
        p.add_argument("--limit-states", type=int, default=10**6,
                       help="exploration cap on built state spaces")

    p = sub.add_parser("validate", help="check a model file against all invariants")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("build", help="build the location graph and print its size")
    add_common(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("simulate", help="Monte Carlo evaluation of a strategy")
    add_common(p)
    p.add_argument("--strategy", default="greedy-all",
                   help="builtin name (greedy-all, none) or rule file path")
    p.add_argument("--runs", type=int, default=100000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tmax", type=int, default=None, help="time bound / horizon")
    p.add_argument("--cmax", type=int, default=None, help="cost bound for conditionals")
    p.add_argument("--trace-out", default=None, help="write per-run event traces here")
    p.add_argument("--trace-runs", type=int, default=10, help="max runs to trace")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="write stats here instead of stdout")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("optimize", help="optimal strategy for one objective")
    add_common(p)
    p.set_defaults(limit_states=optimizer.DEFAULT_STATE_CAP)
    p.add_argument("--objective", choices=("time", "cost"), required=True)
    p.add_argument("--cmax", type=int, default=None)
    p.add_argument("--tmax", type=int, default=None)
    p.add_argument("--out", default=None, help="write the policy table here (JSON)")
    p.add_argument("--csv", default=None, help="write the frontier CSV here")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("pareto", help="frontier of expected time vs cost over budgets")
    add_common(p)
    p.set_defaults(limit_states=optimizer.DEFAULT_STATE_CAP)
    p.add_argument("--budgets", default="", help="comma list of cost budgets (empty = none)")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("sweep", help="per-configuration frontiers under a defensive budget")
    add_common(p)
    p.set_defaults(limit_states=50_000)  # exact-DP attempt cap before MC fallback
    p.add_argument("--budget-spec", required=True,
                   help='JSON file: {"bases": {...}, "radix": 3, "budget": 8, "cost_budgets": [...]}')
    p.add_argument("--runs", type=int, default=100000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--tmax", type=int, default=None)
    p.add_argument("--no-fast", action="store_true", help="disable the compiled kernel")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export", help="DOT or Uppaal Stratego XML export")
    add_common(p)
    p.add_argument("--format", choices=("dot", "dot-ptmdp", "uppaal"), required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_export)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
