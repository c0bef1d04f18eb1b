"""Stochastic discrete-event execution of the timed attack semantics.

A run alternates instants and delays.  At an instant the attacker is
consulted after every resolved event (and once up front at time zero); all
deadline events due at the instant resolve one at a time, each drawn
uniformly among the currently eligible ones and succeeding or failing by its
own Bernoulli draw.  Delays jump straight to the next clock deadline,
accruing location cost-rate times the delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Optional, Protocol, Union

import numpy as np

from . import ops
from .model import AmgModel, AttackState, EMPTY_STATE
from .state_space import ActionLabel, ActionKind, ClockValuation


class Strategy(Protocol):
    """Deterministic memoryless non-lazy attacker policy.

    ``decide`` must return a subset of the available activations for the
    given state; it is consulted at time zero and after every instantaneous
    event, never while time is flowing.
    """

    def decide(self, state: AttackState, clocks: ClockValuation) -> AbstractSet[str]:
        ...


class GreedyAllStrategy:
    """Activate every available attack at every decision point."""

    def __init__(self, model: AmgModel):
        self._model = model

    def decide(self, state: AttackState, clocks: ClockValuation) -> frozenset[str]:
        return ops.available_activations(self._model, state)


class NeverStrategy:
    """Activate nothing, ever."""

    def decide(self, state: AttackState, clocks: ClockValuation) -> frozenset[str]:
        return frozenset()


class ActivationSetStrategy:
    """Keep a fixed set of attacks running whenever they are available."""

    def __init__(self, model: AmgModel, attack_ids: Iterable[str]):
        unknown = sorted(set(attack_ids) - set(model.attacks))
        if unknown:
            raise ValueError(f"unknown attack ids: {unknown}")
        self._model = model
        self._ids = frozenset(attack_ids)

    def decide(self, state: AttackState, clocks: ClockValuation) -> frozenset[str]:
        return self._ids & ops.available_activations(self._model, state)


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream index; fully determines every draw of one run."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class RunStep:
    """One run element: (state, valuation) --event--> (state', valuation').

    ``event`` is either an integer delay or an ActionLabel; the cumulative
    pair reflects the accumulator *after* the event: a delay e adds
    (e, e * rate(location)); an action adds (0, cost(action)).
    """

    state: AttackState
    clocks: ClockValuation
    event: Union[int, ActionLabel]
    cumulative_time: int
    cumulative_cost: int
    next_state: AttackState
    next_clocks: ClockValuation


@dataclass(frozen=True)
class RunTrace:
    steps: tuple[RunStep, ...]
    reached_goal: bool
    attack_time: Optional[int]  # None encodes "never" (infinite)
    attack_cost: Optional[int]

    @property
    def outcome(self) -> str:
        return "GoalReached" if self.reached_goal else "HorizonExceeded"


def default_horizon(model: AmgModel) -> int:
    """Bound on run length when none is given: 64 times the largest time attribute."""
    return 64 * model.max_time_attr


class TransitionTables:
    """Per-model memoization of location-level structure.

    Looking up a transition target here is equivalent to ``state_space.fire``
    on the state part; clock bookkeeping stays in the run loop.
    """

    def __init__(self, model: AmgModel):
        self.model = model
        self.goal = ops.goal_state(model)
        self._avail: dict[AttackState, frozenset[str]] = {}
        self._rate: dict[AttackState, int] = {}
        self._target: dict[tuple[AttackState, ActionLabel], AttackState] = {}

    def available(self, loc: AttackState) -> frozenset[str]:
        got = self._avail.get(loc)
        if got is None:
            got = ops.available_activations(self.model, loc)
            self._avail[loc] = got
        return got

    def rate(self, loc: AttackState) -> int:
        got = self._rate.get(loc)
        if got is None:
            got = sum(self.model.attacks[a].cost_rate for a in loc.activated)
            self._rate[loc] = got
        return got

    def target(self, loc: AttackState, label: ActionLabel) -> AttackState:
        key = (loc, label)
        got = self._target.get(key)
        if got is None:
            kind, subject = label.kind, label.subject
            if kind is ActionKind.ACTIVATE:
                got = ops.simple_state(self.model, loc.activated_set | {subject}, loc.completed_set)
            elif kind is ActionKind.DEFENSE_SUCCESS:
                got = ops.apply_defense(self.model, loc, subject)
            elif kind is ActionKind.DEFENSE_FAIL:
                got = loc
            else:
                got = ops.apply_completion(
                    self.model, loc, subject, kind is ActionKind.COMPLETE_SUCCESS
                )
            self._target[key] = got
        return got


class _RunState:
    """Mutable run bookkeeping for one simulation."""

    __slots__ = ("model", "tables", "loc", "attack_clocks", "defense_clocks",
                 "time", "cost", "steps", "record")

    def __init__(self, model: AmgModel, tables: TransitionTables, record: bool):
        self.model = model
        self.tables = tables
        self.loc = EMPTY_STATE
        self.attack_clocks: dict[str, int] = {}
        self.defense_clocks: dict[str, int] = {d: 0 for d in model.defense_ids}
        self.time = 0
        self.cost = 0
        self.steps: list[RunStep] = []
        self.record = record

    def valuation(self) -> ClockValuation:
        return ClockValuation(dict(self.attack_clocks), dict(self.defense_clocks), self.time)

    def do_action(self, label: ActionLabel) -> None:
        prev_loc = self.loc
        prev_clocks = self.valuation() if self.record else None
        target = self.tables.target(prev_loc, label)
        kind, subject = label.kind, label.subject
        if kind is ActionKind.ACTIVATE:
            self.attack_clocks[subject] = 0
            self.cost += self.model.attacks[subject].activation_cost
        elif kind is ActionKind.DEFENSE_SUCCESS or kind is ActionKind.DEFENSE_FAIL:
            self.defense_clocks[subject] = 0
        else:
            self.attack_clocks.pop(subject, None)
        if target is not prev_loc and target.activated != prev_loc.activated:
            active = target.activated_set
            for a in [a for a in self.attack_clocks if a not in active]:
                del self.attack_clocks[a]
        self.loc = target
        if self.record:
            self.steps.append(
                RunStep(prev_loc, prev_clocks, label, self.time, self.cost, target, self.valuation())
            )

    def do_delay(self, delay: int) -> None:
        prev_clocks = self.valuation() if self.record else None
        self.time += delay
        self.cost += delay * self.tables.rate(self.loc)
        for a in self.attack_clocks:
            self.attack_clocks[a] += delay
        for d in self.defense_clocks:
            self.defense_clocks[d] += delay
        if self.record:
            self.steps.append(
                RunStep(self.loc, prev_clocks, delay, self.time, self.cost, self.loc, self.valuation())
            )

    def next_deadline(self) -> tuple[Optional[int], list[tuple[bool, str]]]:
        """(delay to next deadline, events due then) with follower suppression.

        Events are (is_attack, subject) pairs sorted for a deterministic
        uniform draw.
        """
        attacks = self.model.attacks
        defenses = self.model.defenses
        b: Optional[int] = None
        for a, x in self.attack_clocks.items():
            r = attacks[a].completion_time - x
            if b is None or r < b:
                b = r
        for d, x in self.defense_clocks.items():
            r = defenses[d].period - x
            if b is None or r < b:
                b = r
        if b is None:
            return None, []
        due_a = [a for a, x in self.attack_clocks.items() if x + b == attacks[a].completion_time]
        due_d = {d for d, x in self.defense_clocks.items() if x + b == defenses[d].period}
        followers = self.model.followers
        kept = [d for d in due_d if not (followers[d] & due_d)]
        events = [(True, a) for a in sorted(due_a)] + [(False, d) for d in sorted(kept)]
        return b, events


def simulate_run(
    model: AmgModel,
    strategy: Strategy,
    rng: RngStream,
    horizon: Optional[int] = None,
    record: bool = True,
    tables: Optional[TransitionTables] = None,
) -> RunTrace:
    """Simulate one seeded run until goal entry or the time horizon.

    Deterministic in (model, strategy, rng, horizon).  Activation requests
    from the strategy are applied in sorted order and re-consulted until the
    strategy asks for nothing new.
    """
    if horizon is None:
        horizon = default_horizon(model)
    if tables is None:
        tables = TransitionTables(model)
    gen = rng.generator()
    run = _RunState(model, tables, record)
    goal = tables.goal

    def consult() -> None:
        while True:
            want = strategy.decide(run.loc, run.valuation())
            want = frozenset(want) & tables.available(run.loc)
            if not want:
                return
            for a in sorted(want):
                run.do_action(ActionLabel(ActionKind.ACTIVATE, a))

    consult()
    while True:
        b, events = run.next_deadline()
        if b is None:
            # No active attacks and no defenses: nothing will ever happen.
            return RunTrace(tuple(run.steps), False, None, None)
        if b == 0:
            k = len(events)
            is_attack, subject = events[int(gen.integers(k))] if k > 1 else events[0]
            p = model.attacks[subject].success_prob if is_attack \
                else model.defenses[subject].success_prob
            success = gen.random() < float(p)
            if is_attack:
                kind = ActionKind.COMPLETE_SUCCESS if success else ActionKind.COMPLETE_FAIL
            else:
                kind = ActionKind.DEFENSE_SUCCESS if success else ActionKind.DEFENSE_FAIL
            run.do_action(ActionLabel(kind, subject))
            if run.loc == goal:
                return RunTrace(tuple(run.steps), True, run.time, run.cost)
            consult()
            continue
        if run.time + b > horizon:
            return RunTrace(tuple(run.steps), False, None, None)
        run.do_delay(b)


@dataclass(frozen=True)
class Estimate:
    """Sample mean with its standard error over n qualifying runs."""

    value: float
    stderr: float
    n: int


def _estimate(values: list[float]) -> Optional[Estimate]:
    if not values:
        return None
    n = len(values)
    mean = math.fsum(values) / n
    if n > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = 0.0
    return Estimate(mean, se, n)


@dataclass(frozen=True)
class EvalStats:
    """Monte Carlo summary of attack time/cost over seeded runs.

    Conditional estimates are None when no run satisfies the condition.
    ``reach_prob`` is the fraction of runs whose attack time is strictly
    below ``t_max`` (the horizon when no explicit bound was given).
    """

    n_runs: int
    t_max: int
    c_max: Optional[int]
    reach_prob: float
    reach_prob_stderr: float
    time_given_time: Optional[Estimate]
    cost_given_time: Optional[Estimate]
    time_given_cost: Optional[Estimate]
    cost_given_cost: Optional[Estimate]
    uncond_time: Optional[Estimate]
    uncond_cost: Optional[Estimate]
    goal_runs: int = 0
    samples: tuple[tuple[int, int], ...] = field(default=(), repr=False)


def stats_from_outcomes(
    outcomes: list[tuple[bool, int, int]],
    t_max: int,
    c_max: Optional[int],
    keep_samples: bool = False,
) -> EvalStats:
    """Aggregate (reached, time, cost) run outcomes into EvalStats."""
    n = len(outcomes)
    reached = [(t, c) for ok, t, c in outcomes if ok]
    within_t = [(t, c) for t, c in reached if t < t_max]
    p = len(within_t) / n if n else 0.0
    p_se = math.sqrt(p * (1 - p) / n) if n else 0.0
    within_c = [(t, c) for t, c in reached if c_max is not None and c < c_max]
    return EvalStats(
        n_runs=n,
        t_max=t_max,
        c_max=c_max,
        reach_prob=p,
        reach_prob_stderr=p_se,
        time_given_time=_estimate([float(t) for t, _ in within_t]),
        cost_given_time=_estimate([float(c) for _, c in within_t]),
        time_given_cost=_estimate([float(t) for t, _ in within_c]) if c_max is not None else None,
        cost_given_cost=_estimate([float(c) for _, c in within_c]) if c_max is not None else None,
        uncond_time=_estimate([float(t) for t, _ in reached]),
        uncond_cost=_estimate([float(c) for _, c in reached]),
        goal_runs=len(reached),
        samples=tuple(reached) if keep_samples else (),
    )


def evaluate(
    model: AmgModel,
    strategy: Strategy,
    n_runs: int,
    master_seed: int,
    t_max: Optional[int] = None,
    c_max: Optional[int] = None,
    keep_samples: bool = False,
) -> EvalStats:
    """Run ``n_runs`` independent seeded simulations and aggregate statistics.

    Streams are indexed 0..n_runs-1 and aggregated in stream order, so the
    output is bit-identical for identical inputs regardless of scheduling.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    horizon = t_max if t_max is not None else default_horizon(model)
    tables = TransitionTables(model)
    outcomes: list[tuple[bool, int, int]] = []
    for i in range(n_runs):
        trace = simulate_run(
            model, strategy, RngStream(master_seed, i), horizon, record=False, tables=tables
        )
        if trace.reached_goal:
            outcomes.append((True, int(trace.attack_time), int(trace.attack_cost)))
        else:
            outcomes.append((False, 0, 0))
    return stats_from_outcomes(outcomes, horizon, c_max, keep_samples)
