"""Exact attacker-strategy optimization on the embedded decision process.

The timed semantics is embedded as a finite MDP over decision states
(location plus integer clock residues).  The attacker's primitive moves
mirror the engine's consultation protocol exactly: activate one attack, or
wait for the next environment deadline.  Arbitrary activation sets arise as
chains of single activations at the same instant, so a table policy computed
here replays verbatim in the simulator.

Optimization is policy iteration seeded with the witness policy of the
almost-sure-reachability fixpoint (always proper, so zero-cost cycles cannot
trap it), followed by a lexicographic pass on the secondary objective.  The
final policy is re-evaluated exactly in rational arithmetic on its own
reachable chain, which is how the closed-form oracle values come out as
exact fractions.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import ops
from .engine import Strategy
from .model import AmgModel, AttackState, EMPTY_STATE
from .state_space import ClockValuation, ExplorationLimitExceeded

Number = Union[Fraction, float]

DEFAULT_STATE_CAP = 200_000
EXACT_CHAIN_CAP = 600
DENSE_SOLVE_CAP = 3_000


class UnreachableGoal(RuntimeError):
    """No strategy reaches the goal with probability one; the value is infinite."""


@dataclass(frozen=True, order=True)
class DecisionState:
    """A consultation point: location plus integer clock residues.

    ``attack_clocks`` holds (attack id, clock) pairs for exactly the active
    attacks; ``defense_clocks`` aligns with the model's sorted defense ids.
    Defense clocks sit in [0, period]; the upper end marks a deadline that is
    due but not yet resolved within the current instant.
    """

    location: AttackState
    attack_clocks: tuple[tuple[str, int], ...]
    defense_clocks: tuple[int, ...]


# Attacker moves: ("wait",) or ("act", attack_id).
Action = tuple

WAIT: Action = ("wait",)


@dataclass(frozen=True)
class ActionData:
    """Stage data for one move out of a decision state.

    For an activation the branch list is a single certain successor and the
    delay is zero.  For a wait, the delay runs to the next clock deadline and
    the branches enumerate (event, outcome) pairs with exact probabilities;
    a wait with no clock to run against is a dead end (delay None).
    """

    action: Action
    delay: Optional[int]
    act_cost: int
    rate: int
    branches: tuple[tuple[Fraction, int], ...]  # (probability, successor index)

    def time_stage(self) -> int:
        return self.delay or 0

    def cost_stage(self) -> int:
        return self.act_cost + (self.delay or 0) * self.rate


@dataclass
class DecisionMdp:
    """Explicit finite embedding of the timed game for one model."""

    model: AmgModel
    states: list[DecisionState]
    index: dict[DecisionState, int]
    actions: list[tuple[ActionData, ...]]
    is_goal: list[bool]
    initial: int

    @property
    def n_states(self) -> int:
        return len(self.states)


def initial_decision_state(model: AmgModel) -> DecisionState:
    return DecisionState(EMPTY_STATE, (), tuple(0 for _ in model.defense_ids))


def decision_state_of(model: AmgModel, state: AttackState, clocks: ClockValuation) -> DecisionState:
    att = tuple(sorted(clocks.attack_clocks.items()))
    dfc = tuple(clocks.defense_clocks[d] for d in model.defense_ids)
    return DecisionState(state, att, dfc)


def _wait_data(model: AmgModel, s: DecisionState, rate: int, resolve) -> ActionData:
    """Build the wait move: advance to the next deadline and let one event fire."""
    att = dict(s.attack_clocks)
    defense_ids = model.defense_ids
    delays = [model.attacks[a].completion_time - x for a, x in att.items()]
    delays += [model.defenses[d].period - x for d, x in zip(defense_ids, s.defense_clocks)]
    if not delays:
        return ActionData(WAIT, None, 0, rate, ())
    b = min(delays)
    due_a = sorted(a for a, x in att.items() if x + b == model.attacks[a].completion_time)
    due_d = {
        d for d, x in zip(defense_ids, s.defense_clocks) if x + b == model.defenses[d].period
    }
    kept = sorted(d for d in due_d if not (model.followers[d] & due_d))
    events = [(True, a) for a in due_a] + [(False, d) for d in kept]
    kappa = Fraction(1, len(events))

    att_adv = {a: x + b for a, x in att.items()}
    dfc_adv = tuple(x + b for x in s.defense_clocks)
    branches: list[tuple[Fraction, int]] = []
    for is_attack, subject in events:
        p = model.attacks[subject].success_prob if is_attack else model.defenses[subject].success_prob
        for success, prob in ((True, kappa * p), (False, kappa * (1 - p))):
            if prob == 0:
                continue
            if is_attack:
                loc2 = ops.apply_completion(model, s.location, subject, success)
                att2 = {a: x for a, x in att_adv.items() if a != subject}
                dfc2 = dfc_adv
            else:
                loc2 = ops.apply_defense(model, s.location, subject) if success else s.location
                att2 = dict(att_adv)
                dfc2 = tuple(
                    0 if d == subject else x for d, x in zip(defense_ids, dfc_adv)
                )
            active = loc2.activated_set
            att2 = {a: x for a, x in att2.items() if a in active}
            nxt = DecisionState(loc2, tuple(sorted(att2.items())), dfc2)
            branches.append((prob, resolve(nxt)))
    return ActionData(WAIT, b, 0, rate, tuple(branches))


def build_decision_mdp(model: AmgModel, state_cap: int = DEFAULT_STATE_CAP) -> DecisionMdp:
    """Transitive closure of attacker moves and environment events.

    Raises ExplorationLimitExceeded past ``state_cap`` decision states.
    """
    goal = ops.goal_state(model)
    init = initial_decision_state(model)
    states: list[DecisionState] = [init]
    index: dict[DecisionState, int] = {init: 0}
    actions: list[tuple[ActionData, ...]] = []
    is_goal: list[bool] = []

    def resolve(s: DecisionState) -> int:
        i = index.get(s)
        if i is None:
            i = len(states)
            if i >= state_cap:
                raise ExplorationLimitExceeded(state_cap, len(actions), len(states) - len(actions))
            index[s] = i
            states.append(s)
        return i

    k = 0
    while k < len(states):
        s = states[k]
        k += 1
        if s.location == goal:
            is_goal.append(True)
            actions.append(())
            continue
        is_goal.append(False)
        rate = sum(model.attacks[a].cost_rate for a in s.location.activated)
        acts: list[ActionData] = [_wait_data(model, s, rate, resolve)]
        for a in sorted(ops.available_activations(model, s.location)):
            loc2 = AttackState.of(s.location.activated_set | {a}, s.location.completed_set)
            att2 = tuple(sorted(list(s.attack_clocks) + [(a, 0)]))
            nxt = DecisionState(loc2, att2, s.defense_clocks)
            acts.append(
                ActionData(("act", a), 0, model.attacks[a].activation_cost, rate,
                           ((Fraction(1), resolve(nxt)),))
            )
        actions.append(tuple(acts))
    return DecisionMdp(model, states, index, actions, is_goal, 0)


def almost_sure_closure(mdp: DecisionMdp) -> tuple[frozenset[int], dict[int, ActionData]]:
    """States from which some policy reaches the goal with probability one.

    Standard two-level fixpoint: repeatedly restrict to states that can reach
    the goal using only moves whose every stochastic branch stays inside the
    current candidate set.  Also returns a witness policy (the action that
    pulled each state into the final fixpoint); following it reaches the goal
    almost surely, which seeds policy iteration with a proper policy.
    """
    w = set(range(mdp.n_states))
    goal_set = {i for i in w if mdp.is_goal[i]}
    witness: dict[int, ActionData] = {}
    while True:
        reached = set(goal_set)
        witness = {}
        changed = True
        while changed:
            changed = False
            for i in w:
                if i in reached:
                    continue
                for act in mdp.actions[i]:
                    if act.delay is None and act.action == WAIT:
                        continue
                    succs = [j for _, j in act.branches]
                    if succs and all(j in w for j in succs) and any(j in reached for j in succs):
                        reached.add(i)
                        witness[i] = act
                        changed = True
                        break
        if reached == w:
            return frozenset(w), witness
        w = reached


def almost_sure_indices(mdp: DecisionMdp) -> frozenset[int]:
    return almost_sure_closure(mdp)[0]


def reachability_closure(model: AmgModel, state_cap: int = DEFAULT_STATE_CAP) -> frozenset[DecisionState]:
    """Decision states from which the goal is almost-surely reachable."""
    mdp = build_decision_mdp(model, state_cap)
    keep = almost_sure_indices(mdp)
    return frozenset(mdp.states[i] for i in keep)


def _allowed_actions(mdp: DecisionMdp, w: frozenset[int]) -> list[tuple[ActionData, ...]]:
    out: list[tuple[ActionData, ...]] = []
    for i in range(mdp.n_states):
        if i not in w or mdp.is_goal[i]:
            out.append(())
            continue
        keep = tuple(
            act for act in mdp.actions[i]
            if act.delay is not None or act.action != WAIT
            if all(j in w for _, j in act.branches)
        )
        out.append(keep)
    return out


def _tie_key(act: ActionData) -> tuple:
    # Prefer waiting (the empty activation set), then lexicographic attack id.
    return (0, "") if act.action == WAIT else (1, act.action[1])


def _stage(act: ActionData, w_time: float, w_cost: float) -> float:
    return w_time * act.time_stage() + w_cost * act.cost_stage()


def _policy_eval_iterative(
    mdp: DecisionMdp,
    policy: Mapping[int, ActionData],
    w_time: float,
    w_cost: float,
    sweeps: int = 20_000,
    tol: float = 1e-13,
) -> np.ndarray:
    v = np.zeros(mdp.n_states)
    for _ in range(sweeps):
        delta = 0.0
        for i, act in policy.items():
            val = _stage(act, w_time, w_cost)
            for p, j in act.branches:
                val += float(p) * v[j]
            d = abs(val - v[i])
            if d > delta:
                delta = d
            v[i] = val
        if delta <= tol * (1.0 + float(np.max(np.abs(v)))):
            break
    return v


def policy_iteration(
    mdp: DecisionMdp,
    allowed: list[tuple[ActionData, ...]],
    initial: Mapping[int, ActionData],
    w_time: float,
    w_cost: float,
    rel_tol: float = 1e-9,
    max_rounds: int = 200,
) -> tuple[np.ndarray, dict[int, ActionData]]:
    """Policy iteration from a proper policy; switches only on strict gain.

    Starting proper and never switching on ties keeps every iterate proper,
    which makes this immune to the zero-cost wait-forever trap that plain
    value iteration falls into when the stage cost can be zero.
    """
    policy = dict(initial)
    v = np.zeros(mdp.n_states)
    for _ in range(max_rounds):
        pv = _policy_eval_float(mdp, policy, w_time, w_cost)
        if pv is not None:
            v = pv
        else:
            v = _policy_eval_iterative(mdp, policy, w_time, w_cost)
        changed = False
        for i, current in list(policy.items()):
            cur_val = _stage(current, w_time, w_cost)
            for p, j in current.branches:
                cur_val += float(p) * v[j]
            scored = []
            for act in allowed[i]:
                val = _stage(act, w_time, w_cost)
                finite = True
                for p, j in act.branches:
                    if not np.isfinite(v[j]):
                        finite = False
                        break
                    val += float(p) * v[j]
                if finite:
                    scored.append((val, act))
            if not scored:
                continue
            best_val = min(val for val, _ in scored)
            eps = rel_tol * (1.0 + abs(cur_val))
            if best_val < cur_val - eps:  # ties never switch: keeps the policy proper
                top = [act for val, act in scored if val <= best_val + eps]
                policy[i] = min(top, key=_tie_key)
                changed = True
        if not changed:
            return v, policy
    return v, policy


def _restrict_to_optimal(
    mdp: DecisionMdp,
    allowed: list[tuple[ActionData, ...]],
    v: np.ndarray,
    w_time: float,
    w_cost: float,
    rel_tol: float = 1e-9,
) -> list[tuple[ActionData, ...]]:
    """Keep only the moves whose one-step lookahead achieves the optimal value."""
    out: list[tuple[ActionData, ...]] = []
    for i, acts in enumerate(allowed):
        if not acts:
            out.append(())
            continue
        keep = []
        eps = rel_tol * (1.0 + abs(v[i]))
        for act in acts:
            val = _stage(act, w_time, w_cost)
            finite = True
            for p, j in act.branches:
                if not np.isfinite(v[j]):
                    finite = False
                    break
                val += float(p) * v[j]
            if finite and val <= v[i] + eps:
                keep.append(act)
        out.append(tuple(keep) if keep else acts)
    return out


def _policy_chain(mdp: DecisionMdp, policy: Mapping[int, ActionData], start: int) -> list[int]:
    seen = [start]
    seen_set = {start}
    k = 0
    while k < len(seen):
        i = seen[k]
        k += 1
        if mdp.is_goal[i]:
            continue
        act = policy.get(i)
        if act is None:
            continue
        for _, j in act.branches:
            if j not in seen_set:
                seen_set.add(j)
                seen.append(j)
    return seen


def _policy_eval_exact(
    mdp: DecisionMdp, policy: Mapping[int, ActionData], start: int
) -> Optional[tuple[Fraction, Fraction]]:
    """Exact expected (time, cost) of a policy from ``start``.

    Solves the two linear systems over the policy's reachable chain with
    rational arithmetic.  Returns None when the chain is too large or the
    policy does not reach the goal from every chain state.
    """
    chain = _policy_chain(mdp, policy, start)
    if len(chain) > EXACT_CHAIN_CAP:
        return None
    pos = {i: k for k, i in enumerate(chain)}
    n = len(chain)
    # Properness: every chain state must reach the goal within the chain.
    good = {i for i in chain if mdp.is_goal[i]}
    changed = True
    while changed:
        changed = False
        for i in chain:
            if i in good:
                continue
            act = policy.get(i)
            if act and any(j in good for _, j in act.branches):
                good.add(i)
                changed = True
    if len(good) != n:
        return None

    # Augmented elimination on [I - P | t_stage c_stage].
    rows: list[list[Fraction]] = []
    for i in chain:
        row = [Fraction(0)] * (n + 2)
        row[pos[i]] = Fraction(1)
        if not mdp.is_goal[i]:
            act = policy[i]
            for p, j in act.branches:
                row[pos[j]] -= p
            row[n] = Fraction(act.time_stage())
            row[n + 1] = Fraction(act.cost_stage())
        rows.append(row)
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = 1 / rows[col][col]
        rows[col] = [x * inv for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    k = pos[start]
    return rows[k][n], rows[k][n + 1]


def _policy_eval_float(
    mdp: DecisionMdp, policy: Mapping[int, ActionData], w_time: float, w_cost: float,
) -> Optional[np.ndarray]:
    """Scalarized policy value by a dense linear solve; None when oversized."""
    idx = sorted(i for i in policy if not mdp.is_goal[i])
    if len(idx) > DENSE_SOLVE_CAP:
        return None
    pos = {i: k for k, i in enumerate(idx)}
    n = len(idx)
    a = np.eye(n)
    b = np.zeros(n)
    for i in idx:
        act = policy[i]
        k = pos[i]
        b[k] = w_time * act.time_stage() + w_cost * act.cost_stage()
        for p, j in act.branches:
            if j in pos:
                a[k, pos[j]] -= float(p)
            elif not mdp.is_goal[j]:
                return None  # policy leaves its own evaluated set
    try:
        x = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        return None
    v = np.full(mdp.n_states, np.inf)
    for i in range(mdp.n_states):
        if mdp.is_goal[i]:
            v[i] = 0.0
    for i, k in pos.items():
        v[i] = x[k]
    return v


class PolicyStrategy:
    """Engine strategy backed by an explicit decision table.

    Decision states outside the table (including the intermediate
    configurations that arise while an activation chain is being applied)
    map to the empty activation set.
    """

    def __init__(
        self,
        model: AmgModel,
        table: Mapping[DecisionState, frozenset[str]],
        by_location: Optional[Mapping[AttackState, frozenset[str]]] = None,
    ):
        self._model = model
        self._table = dict(table)
        self._by_location = dict(by_location) if by_location else None

    def decide(self, state: AttackState, clocks: ClockValuation) -> frozenset[str]:
        key = decision_state_of(self._model, state, clocks)
        got = self._table.get(key)
        if got is not None:
            return got
        if self._by_location is not None:
            return self._by_location.get(state, frozenset())
        return frozenset()

    def table_items(self):
        return sorted(self._table.items(), key=lambda kv: kv[0])


@dataclass
class OptimizationResult:
    """Optimal policy with its exact or near-exact values at the initial state."""

    strategy: PolicyStrategy
    objective: str
    value: Number
    expected_time: Number
    expected_cost: Number
    exact: bool
    n_decision_states: int
    policy_by_index: dict[int, ActionData] = field(repr=False, default_factory=dict)
    mdp: Optional[DecisionMdp] = field(repr=False, default=None)


def _optimize(
    mdp: DecisionMdp,
    w_time: float,
    w_cost: float,
    objective: str,
) -> OptimizationResult:
    w, witness = almost_sure_closure(mdp)
    if mdp.initial not in w:
        raise UnreachableGoal(
            "goal not almost-surely reachable from the initial state; expected values are infinite"
        )
    allowed = _allowed_actions(mdp, w)
    initial_policy = {i: act for i, act in witness.items() if i in w}
    v, policy = policy_iteration(mdp, allowed, initial_policy, w_time, w_cost)
    # Lexicographic polish: among primary-optimal moves, minimize the other
    # objective.  This is what drops pointless costly activations from
    # time-optimal policies.
    w2_time, w2_cost = (0.0, 1.0) if w_time > 0 else (1.0, 0.0)
    restricted = _restrict_to_optimal(mdp, allowed, v, w_time, w_cost)
    _, policy = policy_iteration(mdp, restricted, policy, w2_time, w2_cost)

    exact = _policy_eval_exact(mdp, policy, mdp.initial)
    if exact is not None:
        etime, ecost = exact
        is_exact = True
    else:
        vt = _policy_eval_float(mdp, policy, 1.0, 0.0)
        vc = _policy_eval_float(mdp, policy, 0.0, 1.0)
        if vt is None:
            vt = _policy_eval_iterative(mdp, policy, 1.0, 0.0)
        if vc is None:
            vc = _policy_eval_iterative(mdp, policy, 0.0, 1.0)
        etime = float(vt[mdp.initial])
        ecost = float(vc[mdp.initial])
        is_exact = False

    table = {
        mdp.states[i]: (frozenset({act.action[1]}) if act.action != WAIT else frozenset())
        for i, act in policy.items()
    }
    value = etime if objective == "time" else ecost if objective == "cost" else (
        w_time * float(etime) + w_cost * float(ecost)
    )
    return OptimizationResult(
        strategy=PolicyStrategy(mdp.model, table),
        objective=objective,
        value=value,
        expected_time=etime,
        expected_cost=ecost,
        exact=is_exact,
        n_decision_states=mdp.n_states,
        policy_by_index=policy,
        mdp=mdp,
    )


def optimize_expected_time(
    model: AmgModel, state_cap: int = DEFAULT_STATE_CAP, mdp: Optional[DecisionMdp] = None
) -> OptimizationResult:
    """Minimize expected attack time; raises UnreachableGoal when infinite."""
    mdp = mdp or build_decision_mdp(model, state_cap)
    return _optimize(mdp, 1.0, 0.0, "time")


def optimize_expected_cost(
    model: AmgModel, state_cap: int = DEFAULT_STATE_CAP, mdp: Optional[DecisionMdp] = None
) -> OptimizationResult:
    """Minimize expected attack cost; raises UnreachableGoal when infinite."""
    mdp = mdp or build_decision_mdp(model, state_cap)
    return _optimize(mdp, 0.0, 1.0, "cost")


def optimize_scalarized(
    model: AmgModel,
    w_time: float,
    w_cost: float,
    state_cap: int = DEFAULT_STATE_CAP,
    mdp: Optional[DecisionMdp] = None,
) -> OptimizationResult:
    """Minimize w_time * E[time] + w_cost * E[cost]."""
    mdp = mdp or build_decision_mdp(model, state_cap)
    return _optimize(mdp, w_time, w_cost, "scalarized")


def optimize_with_bound(
    model: AmgModel,
    objective: str,
    t_max: Optional[int] = None,
    c_max: Optional[int] = None,
    state_cap: int = DEFAULT_STATE_CAP,
) -> OptimizationResult:
    """Minimize one objective subject to a bound on the other's expectation.

    Selects among the supported trade-off policies; raises UnreachableGoal
    when no policy satisfies the bound.
    """
    candidates = _frontier_candidates(model, state_cap)
    feasible = [
        r for r in candidates
        if (t_max is None or float(r.expected_time) <= t_max)
        and (c_max is None or float(r.expected_cost) <= c_max)
    ]
    if not feasible:
        raise UnreachableGoal(
            f"no strategy keeps the bounded expectation within t_max={t_max}, c_max={c_max}"
        )
    if objective == "time":
        best = min(feasible, key=lambda r: (float(r.expected_time), float(r.expected_cost)))
    else:
        best = min(feasible, key=lambda r: (float(r.expected_cost), float(r.expected_time)))
    import dataclasses

    return dataclasses.replace(
        best,
        objective=objective,
        value=best.expected_time if objective == "time" else best.expected_cost,
    )


@dataclass(frozen=True)
class ParetoPoint:
    """One frontier entry: a strategy with its true expected time and cost."""

    expected_time: float
    expected_cost: float
    strategy: Strategy
    bound: Optional[int]  # the cost budget this point answered, if any
    method: str  # "exact" | "montecarlo"
    reach_prob: float = 1.0
    exact_time: Optional[Fraction] = None
    exact_cost: Optional[Fraction] = None


def _frontier_candidates(model: AmgModel, state_cap: int) -> list[OptimizationResult]:
    """Policies spanning the achievable (time, cost) trade-off curve.

    Starts from the pure time and pure cost optima and recursively probes the
    weighted objective between adjacent points; each probe either confirms
    the segment or inserts a new supported point.
    """
    mdp = build_decision_mdp(model, state_cap)
    left = _optimize(mdp, 1.0, 0.0, "time")
    right = _optimize(mdp, 0.0, 1.0, "cost")

    def tc(r: OptimizationResult) -> tuple[float, float]:
        return float(r.expected_time), float(r.expected_cost)

    results: dict[tuple[float, float], OptimizationResult] = {tc(left): left, tc(right): right}

    def refine(a: OptimizationResult, b: OptimizationResult, depth: int) -> None:
        if depth <= 0:
            return
        t1, c1 = tc(a)
        t2, c2 = tc(b)
        if t2 - t1 <= 1e-9 or c1 - c2 <= 1e-9:
            return
        wt, wc = (c1 - c2), (t2 - t1)
        mid = _optimize(mdp, wt, wc, "scalarized")
        tm, cm = tc(mid)
        seg = wt * t1 + wc * c1
        if wt * tm + wc * cm < seg - 1e-9 * (1.0 + abs(seg)):
            results[tc(mid)] = mid
            refine(a, mid, depth - 1)
            refine(mid, b, depth - 1)

    refine(left, right, depth=8)
    return sorted(results.values(), key=lambda r: (float(r.expected_time), float(r.expected_cost)))


def _dominance_filter(points: Iterable[ParetoPoint]) -> list[ParetoPoint]:
    chosen: list[ParetoPoint] = []
    for p in sorted(points, key=lambda p: (p.expected_time, p.expected_cost)):
        if any(
            q.expected_time <= p.expected_time and q.expected_cost <= p.expected_cost
            and (q.expected_time, q.expected_cost) != (p.expected_time, p.expected_cost)
            for q in chosen
        ):
            continue
        if any(
            (q.expected_time, q.expected_cost) == (p.expected_time, p.expected_cost)
            for q in chosen
        ):
            continue
        chosen.append(p)
    return chosen


def pareto_frontier(
    model: AmgModel,
    cost_budgets: Sequence[Optional[int]],
    state_cap: int = DEFAULT_STATE_CAP,
) -> tuple[list[ParetoPoint], list[str]]:
    """Best expected time per cost budget, with dominated entries dropped.

    For each budget the cheapest-in-time strategy whose expected cost stays
    within the budget is selected among the supported trade-off policies; a
    budget below every achievable expected cost is reported as infeasible in
    the notes instead of producing a point.
    """
    notes: list[str] = []
    if not cost_budgets:
        return [], notes
    try:
        candidates = _frontier_candidates(model, state_cap)
    except UnreachableGoal:
        notes.append("goal unreachable: no strategy reaches it with probability one")
        return [], notes
    points: list[ParetoPoint] = []
    for c_max in cost_budgets:
        feasible = [
            r for r in candidates
            if c_max is None or float(r.expected_cost) <= c_max
        ]
        if not feasible:
            notes.append(
                f"budget {c_max}: no strategy keeps expected cost within the budget; point omitted"
            )
            continue
        best = min(feasible, key=lambda r: (float(r.expected_time), float(r.expected_cost)))
        points.append(
            ParetoPoint(
                expected_time=float(best.expected_time),
                expected_cost=float(best.expected_cost),
                strategy=best.strategy,
                bound=c_max,
                method="exact" if best.exact else "montecarlo",
                exact_time=best.expected_time if best.exact else None,
                exact_cost=best.expected_cost if best.exact else None,
            )
        )
    return _dominance_filter(points), notes


@dataclass(frozen=True)
class BudgetConstraint:
    """Defensive budget: periods b_d * radix**e_d with exponents summing to B."""

    bases: Mapping[str, int]
    radix: int
    budget: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "bases", dict(self.bases))
        if self.radix < 2:
            raise ValueError("radix must be >= 2")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")

    def configurations(self) -> list[dict[str, int]]:
        """Every integer-exponent period assignment satisfying the budget."""
        ids = sorted(self.bases)
        configs: list[dict[str, int]] = []

        def rec(k: int, remaining: int, acc: list[int]) -> None:
            if k == len(ids) - 1:
                configs.append(
                    {d: self.bases[d] * self.radix ** e for d, e in zip(ids, acc + [remaining])}
                )
                return
            for e in range(remaining + 1):
                rec(k + 1, remaining - e, acc + [e])

        if not ids:
            return []
        rec(0, self.budget, [])
        return configs

    def config_id(self, periods: Mapping[str, int]) -> str:
        parts = []
        for d in sorted(self.bases):
            e = 0
            t = periods[d]
            base = self.bases[d]
            while t > base:
                t //= self.radix
                e += 1
            parts.append(str(e))
        return "e" + "-".join(parts)


@dataclass
class ConfigFrontier:
    """Frontier obtained for one defense-period configuration."""

    config_id: str
    periods: dict[str, int]
    points: list[ParetoPoint]
    method: str
    notes: list[str] = field(default_factory=list)


def worker_count() -> int:
    env = os.environ.get("MTD_FRONTIER_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def sweep_defense_periods(
    model: AmgModel,
    constraint: BudgetConstraint,
    cost_budgets: Sequence[Optional[int]] = (None,),
    exact_state_cap: int = 50_000,
    n_runs: int = 100_000,
    master_seed: int = 42,
    horizon: Optional[int] = None,
    use_fast_kernel: bool = True,
) -> list[ConfigFrontier]:
    """Per-configuration frontiers under a defensive budget constraint.

    Each configuration is attempted exactly; configurations whose decision
    space overflows the cap fall back to Monte Carlo evaluation of heuristic
    strategies (clearly labeled).  Failures are isolated per configuration
    and the sweep continues.  Output order follows the configuration key, so
    it is independent of worker scheduling.
    """
    from concurrent.futures import ThreadPoolExecutor

    from . import heuristics

    configs = constraint.configurations()
    jobs = sorted((constraint.config_id(c), c) for c in configs)

    def run_one(job: tuple[str, dict[str, int]]) -> ConfigFrontier:
        config_id, periods = job
        m = model.with_defense_periods(periods)
        try:
            try:
                points, notes = pareto_frontier(m, cost_budgets, state_cap=exact_state_cap)
                return ConfigFrontier(config_id, periods, points, "exact", notes)
            except ExplorationLimitExceeded:
                points, notes = heuristics.heuristic_frontier(
                    m,
                    cost_budgets,
                    n_runs=n_runs,
                    master_seed=master_seed,
                    horizon=horizon,
                    use_fast_kernel=use_fast_kernel,
                )
                return ConfigFrontier(config_id, periods, points, "montecarlo", notes)
        except Exception as exc:  # isolate per-config failures
            return ConfigFrontier(config_id, periods, [], "failed", [f"{type(exc).__name__}: {exc}"])

    workers = worker_count()
    if workers <= 1:
        results = [run_one(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, jobs))
    return sorted(results, key=lambda r: r.config_id)
