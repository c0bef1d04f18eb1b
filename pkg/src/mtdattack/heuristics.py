"""Plan-based attacker heuristics for models too large to solve exactly.

The heuristic drops clocks entirely: each leaf gets a renewal estimate of
expected time and cost per completion (folding in resets by the defenses
covering it), the DAG is folded bottom-up under a time/cost weighting, and
the resulting leaf plan is recomputed per location from its completed set.
The policies are evaluated honestly by Monte Carlo; only the *choice* of
policy is heuristic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from . import ops
from .engine import EvalStats, evaluate
from .model import AmgModel, AttackState, Refinement
from .optimizer import ParetoPoint, PolicyStrategy
from .state_space import Ptmdp, build_ptmdp

_DEAD = 1e18

# Weightings that span fast-and-expensive to slow-and-cheap plans.
WEIGHT_GRID: tuple[tuple[float, float], ...] = ((1, 0), (3, 1), (1, 1), (1, 3), (0, 1))


@dataclass(frozen=True)
class LeafEstimate:
    expected_time: float
    expected_cost: float
    viable: bool


def leaf_estimate(model: AmgModel, attack_id: str) -> LeafEstimate:
    """Renewal estimate of one leaf's cost/time per completed attempt.

    Assumes the attacker re-activates immediately after each reset, so a
    defense with period t_d lands floor((t_a - 1) / t_d) firings inside an
    attempt window.
    """
    attrs = model.attacks[attack_id]
    p = float(attrs.success_prob)
    survive = p
    for did in model.defended_by[attack_id]:
        d = model.defenses[did]
        hits = (attrs.completion_time - 1) // d.period
        survive *= (1.0 - float(d.success_prob)) ** hits
    if survive <= 0.0:
        return LeafEstimate(_DEAD, _DEAD, False)
    attempts = 1.0 / survive
    return LeafEstimate(
        attempts * attrs.completion_time,
        attempts * (attrs.activation_cost + attrs.cost_rate * attrs.completion_time),
        True,
    )


def plan_leaves(
    model: AmgModel,
    completed: frozenset[str],
    w_time: float,
    w_cost: float,
    estimates: Optional[Mapping[str, LeafEstimate]] = None,
) -> frozenset[str]:
    """Leaves supporting the cheapest completion of the root, given progress.

    OR nodes pick their best child under the weighting; AND nodes need every
    child (time folds as max, cost as sum).  Already-completed nodes cost
    nothing.
    """
    if estimates is None:
        estimates = {a: leaf_estimate(model, a) for a in model.attacks}
    done = ops.propagate(model, completed)
    memo: dict[str, tuple[float, float, frozenset[str]]] = {}

    def value(n: str) -> tuple[float, float, frozenset[str]]:
        got = memo.get(n)
        if got is not None:
            return got
        if n in done:
            out = (0.0, 0.0, frozenset())
        elif n in model.attacks:
            est = estimates[n]
            out = (est.expected_time, est.expected_cost, frozenset({n}))
        else:
            child_vals = [value(c) for c in model.children_map[n]]
            if model.refinements[n] is Refinement.OR:
                out = min(child_vals, key=lambda v: (w_time * v[0] + w_cost * v[1], v[0], v[1]))
            else:
                t = max((v[0] for v in child_vals), default=0.0)
                c = sum(v[1] for v in child_vals)
                leaves = frozenset().union(*(v[2] for v in child_vals))
                out = (t, c, leaves)
        memo[n] = out
        return out

    return value(model.root)[2]


def plan_policy(
    model: AmgModel,
    ptmdp: Ptmdp,
    w_time: float,
    w_cost: float,
) -> dict[AttackState, frozenset[str]]:
    """Location-table policy: keep the planned leaves running."""
    estimates = {a: leaf_estimate(model, a) for a in model.attacks}
    plan_cache: dict[frozenset[str], frozenset[str]] = {}
    table: dict[AttackState, frozenset[str]] = {}
    for loc in ptmdp.locations:
        key = loc.completed_set
        plan = plan_cache.get(key)
        if plan is None:
            plan = plan_leaves(model, key, w_time, w_cost, estimates)
            plan_cache[key] = plan
        table[loc] = plan & ops.available_activations(model, loc)
    return table


def greedy_all_policy(model: AmgModel, ptmdp: Ptmdp) -> dict[AttackState, frozenset[str]]:
    return {loc: ops.available_activations(model, loc) for loc in ptmdp.locations}


def candidate_policies(
    model: AmgModel,
    ptmdp: Ptmdp,
    weights: Sequence[tuple[float, float]] = WEIGHT_GRID,
    include_greedy: bool = True,
) -> list[tuple[str, dict[AttackState, frozenset[str]]]]:
    """Deduplicated labelled candidate policies for MC evaluation."""
    out: list[tuple[str, dict[AttackState, frozenset[str]]]] = []
    seen: set[tuple] = set()

    def push(name: str, table: dict[AttackState, frozenset[str]]) -> None:
        key = tuple(sorted((loc, tuple(sorted(v))) for loc, v in table.items()))
        if key not in seen:
            seen.add(key)
            out.append((name, table))

    if include_greedy:
        push("greedy-all", greedy_all_policy(model, ptmdp))
    for wt, wc in weights:
        push(f"plan-{wt}-{wc}", plan_policy(model, ptmdp, wt, wc))
    return out


def evaluate_policy_table(
    model: AmgModel,
    ptmdp: Ptmdp,
    table: Mapping[AttackState, frozenset[str]],
    n_runs: int,
    master_seed: int,
    horizon: int,
    use_fast_kernel: bool = True,
    c_max: Optional[int] = None,
) -> EvalStats:
    if use_fast_kernel:
        from . import fastsim

        tables = compile_cached(ptmdp)
        return fastsim.fast_evaluate(tables, table, n_runs, master_seed, horizon, c_max)
    strategy = PolicyStrategy(model, {}, by_location=table)
    return evaluate(model, strategy, n_runs, master_seed, t_max=horizon, c_max=c_max)


_table_cache: dict[int, object] = {}


def compile_cached(ptmdp: Ptmdp):
    from . import fastsim

    key = id(ptmdp)
    got = _table_cache.get(key)
    if got is None:
        got = fastsim.compile_tables(ptmdp)
        _table_cache.clear()  # keep at most one; sweeps build many models
        _table_cache[key] = got
    return got


def default_mc_horizon(model: AmgModel) -> int:
    """MC horizon scaled to attack durations, ignoring huge defense periods."""
    return 64 * max((a.completion_time for a in model.attacks.values()), default=1)


def heuristic_frontier(
    model: AmgModel,
    cost_budgets: Sequence[Optional[int]],
    n_runs: int,
    master_seed: int,
    horizon: Optional[int] = None,
    use_fast_kernel: bool = True,
    location_cap: int = 10**6,
    weights: Sequence[tuple[float, float]] = WEIGHT_GRID,
    include_greedy: bool = True,
) -> tuple[list[ParetoPoint], list[str]]:
    """Monte Carlo frontier over the candidate policies, labelled as such."""
    from .optimizer import _dominance_filter

    notes: list[str] = ["heuristic strategies evaluated by Monte Carlo"]
    if horizon is None:
        horizon = default_mc_horizon(model)
    ptmdp = build_ptmdp(model, location_cap)
    measured: list[tuple[str, dict, EvalStats]] = []
    for name, table in candidate_policies(model, ptmdp, weights, include_greedy):
        stats = evaluate_policy_table(
            model, ptmdp, table, n_runs, master_seed, horizon, use_fast_kernel
        )
        measured.append((name, table, stats))

    usable = [
        (name, table, st) for name, table, st in measured
        if st.uncond_time is not None and st.reach_prob > 0.5
    ]
    if not usable:
        notes.append("no candidate strategy reached the goal; configuration reported empty")
        return [], notes

    points: list[ParetoPoint] = []
    for c_max in cost_budgets:
        feasible = [
            (name, table, st) for name, table, st in usable
            if c_max is None or st.uncond_cost.value <= c_max
        ]
        if not feasible:
            notes.append(f"budget {c_max}: no candidate within expected cost; point omitted")
            continue
        name, table, st = min(
            feasible, key=lambda x: (x[2].uncond_time.value, x[2].uncond_cost.value)
        )
        points.append(
            ParetoPoint(
                expected_time=st.uncond_time.value,
                expected_cost=st.uncond_cost.value,
                strategy=PolicyStrategy(model, {}, by_location=table),
                bound=c_max,
                method="montecarlo",
                reach_prob=st.reach_prob,
            )
        )
        notes.append(f"budget {c_max}: policy {name}")
    return _dominance_filter(points), notes
