#!/usr/bin/env python3
"""Run the electricity-meter defensive-budget sweep and write a frontier CSV.

The full budget-8 sweep evaluates 165 period configurations; the default run
count keeps each configuration honest (n = 100k Monte Carlo per policy) and
takes on the order of half an hour single-threaded.  Set
MTD_FRONTIER_THREADS to parallelize, or pass --runs for a quicker look.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mtdattack import catalog
from mtdattack.cli import frontier_csv
from mtdattack.optimizer import sweep_defense_periods
from mtdattack.shellio import atomic_write


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tmax", type=int, default=30_000)
    parser.add_argument("--budget", type=int, default=8)
    parser.add_argument("--ic50", action="store_true",
                        help="use the alternative intercept-connection cost rate (50)")
    parser.add_argument("--out", default="sweep-b8.csv")
    args = parser.parse_args()

    model = catalog.electricity_meter_model(ic_cost_rate=50 if args.ic50 else 5)
    constraint = catalog.meter_budget_b8()
    if args.budget != 8:
        from mtdattack.optimizer import BudgetConstraint

        constraint = BudgetConstraint(constraint.bases, constraint.radix, args.budget)

    t0 = time.time()
    results = sweep_defense_periods(
        model,
        constraint,
        cost_budgets=[None],
        n_runs=args.runs,
        master_seed=args.seed,
        horizon=args.tmax,
    )
    rows = []
    for res in results:
        if not res.points:
            rows.append((res.config_id, res.periods, None, None))
        for p in res.points:
            rows.append((res.config_id, res.periods, p.bound, p))
    atomic_write(args.out, frontier_csv(model, rows))
    print(f"{len(results)} configurations in {time.time() - t0:.0f}s -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
