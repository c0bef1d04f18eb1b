"""Explicit priced timed MDP built from an attack model.

Locations are canonical attack states, closed under five transition kinds:
attacker activations (controllable) plus defense success/failure and attack
completion success/failure (environment).  The environment's timing is
deterministic — Dirac masses at clock deadlines — with a uniform draw among
events due at the same instant; probabilities stay out of the graph and live
in the engine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from . import ops
from .model import AmgModel, AttackState, EMPTY_STATE


class ExplorationLimitExceeded(RuntimeError):
    """State-space closure hit the configured location cap."""

    def __init__(self, limit: int, explored: int, frontier: int):
        super().__init__(
            f"state space exceeds {limit} locations "
            f"(explored {explored}, frontier {frontier})"
        )
        self.limit = limit
        self.explored = explored
        self.frontier = frontier


class ActionKind(str, enum.Enum):
    ACTIVATE = "activate"
    DEFENSE_SUCCESS = "defense_success"
    DEFENSE_FAIL = "defense_fail"
    COMPLETE_SUCCESS = "complete_success"
    COMPLETE_FAIL = "complete_fail"


# Deterministic transition ordering within one source location.
_KIND_ORDER = {
    ActionKind.ACTIVATE: 0,
    ActionKind.DEFENSE_SUCCESS: 1,
    ActionKind.DEFENSE_FAIL: 2,
    ActionKind.COMPLETE_SUCCESS: 3,
    ActionKind.COMPLETE_FAIL: 4,
}


@dataclass(frozen=True, order=True)
class ActionLabel:
    """One labelled move: an activation, or a resolved environment event."""

    kind: ActionKind
    subject: str

    @property
    def controllable(self) -> bool:
        return self.kind is ActionKind.ACTIVATE

    def __str__(self) -> str:
        return f"{self.kind.value}({self.subject})"


@dataclass(frozen=True, order=True)
class PendingEvent:
    """An unresolved deadline event: an attack completion or a defense firing."""

    kind: str  # "complete" | "defense"
    subject: str

    def resolve(self, success: bool) -> ActionLabel:
        if self.kind == "complete":
            return ActionLabel(
                ActionKind.COMPLETE_SUCCESS if success else ActionKind.COMPLETE_FAIL, self.subject
            )
        return ActionLabel(
            ActionKind.DEFENSE_SUCCESS if success else ActionKind.DEFENSE_FAIL, self.subject
        )


@dataclass(frozen=True)
class Transition:
    source: AttackState
    label: ActionLabel
    target: AttackState
    cost: int
    resets: tuple[str, ...]  # clock owner ids


@dataclass(frozen=True)
class ClockValuation:
    """Integer clock values: one per active attack, one per defense.

    ``attack_clocks`` is keyed exactly by the activated attacks of the current
    location; defense clocks always exist and always run.
    """

    attack_clocks: Mapping[str, int]
    defense_clocks: Mapping[str, int]
    global_time: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "attack_clocks", dict(self.attack_clocks))
        object.__setattr__(self, "defense_clocks", dict(self.defense_clocks))

    @staticmethod
    def initial(model: AmgModel) -> "ClockValuation":
        return ClockValuation({}, {d: 0 for d in model.defense_ids}, 0)

    def advanced(self, delay: int) -> "ClockValuation":
        return ClockValuation(
            {a: x + delay for a, x in self.attack_clocks.items()},
            {d: x + delay for d, x in self.defense_clocks.items()},
            self.global_time + delay,
        )

    def satisfies_invariant(self, model: AmgModel, location: AttackState) -> bool:
        if set(self.attack_clocks) != set(location.activated):
            return False
        for a, x in self.attack_clocks.items():
            if not (0 <= x <= model.attacks[a].completion_time):
                return False
        for d, x in self.defense_clocks.items():
            if not (0 <= x <= model.defenses[d].period):
                return False
        return True


@dataclass(frozen=True)
class Ptmdp:
    """Materialized location/transition graph with price annotations."""

    model: AmgModel
    locations: tuple[AttackState, ...]
    initial: AttackState
    goal: AttackState
    transitions: Mapping[AttackState, tuple[Transition, ...]]

    @cached_property
    def index(self) -> dict[AttackState, int]:
        return {loc: i for i, loc in enumerate(self.locations)}

    def cost_rate(self, location: AttackState) -> int:
        """Cost accrued per time unit spent in a location."""
        return sum(self.model.attacks[a].cost_rate for a in location.activated)

    def invariant(self, location: AttackState) -> tuple[tuple[str, int], ...]:
        """Clock upper bounds (owner id, bound) that must hold in a location."""
        bounds = [(a, self.model.attacks[a].completion_time) for a in location.activated]
        bounds += [(d, self.model.defenses[d].period) for d in self.model.defense_ids]
        return tuple(bounds)

    def outgoing(self, location: AttackState) -> tuple[Transition, ...]:
        return self.transitions[location]


def _location_transitions(model: AmgModel, loc: AttackState) -> list[Transition]:
    out: list[Transition] = []
    for a in sorted(ops.available_activations(model, loc)):
        target = ops.simple_state(model, loc.activated_set | {a}, loc.completed_set)
        out.append(
            Transition(loc, ActionLabel(ActionKind.ACTIVATE, a), target,
                       model.attacks[a].activation_cost, (a,))
        )
    for d in model.defense_ids:
        target = ops.apply_defense(model, loc, d)
        out.append(Transition(loc, ActionLabel(ActionKind.DEFENSE_SUCCESS, d), target, 0, (d,)))
        out.append(Transition(loc, ActionLabel(ActionKind.DEFENSE_FAIL, d), loc, 0, (d,)))
    for a in loc.activated:
        succ = ops.apply_completion(model, loc, a, success=True)
        fail = ops.apply_completion(model, loc, a, success=False)
        out.append(Transition(loc, ActionLabel(ActionKind.COMPLETE_SUCCESS, a), succ, 0, (a,)))
        out.append(Transition(loc, ActionLabel(ActionKind.COMPLETE_FAIL, a), fail, 0, (a,)))
    out.sort(key=lambda t: (_KIND_ORDER[t.label.kind], t.label.subject))
    return out


def build_ptmdp(model: AmgModel, limit_states: int = 10**6) -> Ptmdp:
    """Transitive closure of all transition kinds from the empty state.

    Deterministic: locations come out sorted by their canonical id lists and
    transitions in a fixed kind/subject order, so two builds of the same model
    are structurally identical.
    """
    initial = EMPTY_STATE
    goal = ops.goal_state(model)
    seen: set[AttackState] = {initial}
    frontier: list[AttackState] = [initial]
    transitions: dict[AttackState, tuple[Transition, ...]] = {}
    while frontier:
        frontier.sort()
        loc = frontier.pop(0)
        trans = _location_transitions(model, loc)
        transitions[loc] = tuple(trans)
        for t in trans:
            if t.target not in seen:
                seen.add(t.target)
                if len(seen) > limit_states:
                    raise ExplorationLimitExceeded(limit_states, len(transitions), len(frontier) + 1)
                frontier.append(t.target)
    locations = tuple(sorted(seen))
    return Ptmdp(model, locations, initial, goal, transitions)


def eligible_events(
    model: AmgModel, location: AttackState, valuation: ClockValuation
) -> tuple[int | None, tuple[PendingEvent, ...], Fraction]:
    """Next environment move: (delay, events due then, uniform weight).

    The delay is the minimal time until some clock hits its deadline (None
    when there are no clocks at all).  A defense due at that instant is
    suppressed while one of its followers is due at the same instant; the
    follower must resolve first.
    """
    delays: list[int] = []
    for a, x in valuation.attack_clocks.items():
        delays.append(model.attacks[a].completion_time - x)
    for d, x in valuation.defense_clocks.items():
        delays.append(model.defenses[d].period - x)
    if not delays:
        return None, (), Fraction(0)
    b = min(delays)
    due_attacks = [
        a for a, x in valuation.attack_clocks.items()
        if x + b == model.attacks[a].completion_time
    ]
    due_defenses = {
        d for d, x in valuation.defense_clocks.items() if x + b == model.defenses[d].period
    }
    followers = model.followers
    kept = [d for d in due_defenses if not (followers[d] & due_defenses)]
    events = tuple(sorted(
        [PendingEvent("complete", a) for a in due_attacks]
        + [PendingEvent("defense", d) for d in kept]
    ))
    kappa = Fraction(1, len(events)) if events else Fraction(0)
    return b, events, kappa


def fire(
    model: AmgModel,
    location: AttackState,
    valuation: ClockValuation,
    label: ActionLabel,
) -> tuple[AttackState, ClockValuation]:
    """Apply one enabled labelled move instantaneously.

    Activations require availability; environment labels require the named
    clock to sit exactly at its deadline.  Clocks of attacks deactivated by
    the move are dropped; the fired clock resets; global time is unchanged.
    """
    attack_clocks = dict(valuation.attack_clocks)
    defense_clocks = dict(valuation.defense_clocks)
    kind, subject = label.kind, label.subject

    if kind is ActionKind.ACTIVATE:
        if subject not in ops.available_activations(model, location):
            raise ValueError(f"activation of {subject!r} not enabled in {location}")
        target = ops.simple_state(model, location.activated_set | {subject}, location.completed_set)
        attack_clocks[subject] = 0
    elif kind in (ActionKind.DEFENSE_SUCCESS, ActionKind.DEFENSE_FAIL):
        if defense_clocks.get(subject) != model.defenses[subject].period:
            raise ValueError(f"defense {subject!r} is not at its deadline")
        target = ops.apply_defense(model, location, subject) if kind is ActionKind.DEFENSE_SUCCESS else location
        defense_clocks[subject] = 0
    elif kind in (ActionKind.COMPLETE_SUCCESS, ActionKind.COMPLETE_FAIL):
        if attack_clocks.get(subject) != model.attacks[subject].completion_time:
            raise ValueError(f"attack {subject!r} is not at its deadline")
        target = ops.apply_completion(model, location, subject, kind is ActionKind.COMPLETE_SUCCESS)
        attack_clocks.pop(subject, None)
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown action kind {kind}")

    kept = {a: x for a, x in attack_clocks.items() if a in target.activated_set}
    return target, ClockValuation(kept, defense_clocks, valuation.global_time)
