"""Set-operator algebra on attack states.

All operators are pure functions of (model, sets); canonicalization is the
composition ``prune . propagate`` and is idempotent, so canonical states can
be compared structurally.
"""

from __future__ import annotations

from typing import AbstractSet, Iterable

from .model import AmgModel, AttackState, Refinement


class DefenseOrderError(ValueError):
    """Raised when the defense 'follows' relation cannot be serialized."""


def children(model: AmgModel, node: str) -> frozenset[str]:
    """Children of ``node``; raises KeyError for unknown ids."""
    return frozenset(model.children(node))


def propagate(model: AmgModel, completed: Iterable[str]) -> frozenset[str]:
    """Least fixed point above ``completed`` of upward completion.

    A subgoal joins the set once all (AND) or at least one (OR) of its
    children are in it.  Iterates until stabilization; at most one subgoal is
    missing per round, so |subgoals| rounds suffice.
    """
    done = set(completed)
    pending = [g for g in model.subgoal_ids if g not in done]
    changed = True
    while changed and pending:
        changed = False
        still = []
        for g in pending:
            ch = model.children_map[g]
            if model.refinements[g] is Refinement.AND:
                ok = all(c in done for c in ch)
            else:
                ok = any(c in done for c in ch)
            if ok:
                done.add(g)
                changed = True
            else:
                still.append(g)
        pending = still
    return frozenset(done)


def completed_descendants(model: AmgModel, completed: Iterable[str]) -> frozenset[str]:
    """Nodes whose every path from the root passes through ``completed``.

    Equivalently the complement of what a root traversal reaches when it
    refuses to walk out of completed nodes.  The root itself never qualifies.
    """
    blocked = set(completed)
    seen = {model.root}
    stack = [] if model.root in blocked else [model.root]
    while stack:
        n = stack.pop()
        for c in model.children_map[n]:
            if c not in seen:
                seen.add(c)
                if c not in blocked:
                    stack.append(c)
    return frozenset(model.nodes - seen)


def prune(
    model: AmgModel, activated: Iterable[str], completed: Iterable[str]
) -> tuple[frozenset[str], frozenset[str]]:
    """Drop state made irrelevant by checkpoints.

    Checkpoints are completed nodes with no defense: their completion is
    permanent, so everything below them (on all root paths) can be forgotten,
    and completed attacks need not stay activated.
    """
    a = frozenset(activated)
    c = frozenset(completed)
    checkpoints = c & model.undefended
    shadow = completed_descendants(model, checkpoints)
    return a - (shadow | c), c - shadow


def simple_state(model: AmgModel, activated: Iterable[str], completed: Iterable[str]) -> AttackState:
    """Canonical representative of a raw (activated, completed) pair."""
    prop = propagate(model, completed)
    a, c = prune(model, activated, prop)
    return AttackState.of(a, c)


def apply_defense(model: AmgModel, state: AttackState, defense_id: str) -> AttackState:
    """State after a successful firing of one defense."""
    try:
        d = model.defenses[defense_id]
    except KeyError:
        raise KeyError(f"unknown defense id: {defense_id!r}") from None
    return simple_state(model, state.activated_set - d.defends, state.completed_set - d.defends)


def apply_completion(model: AmgModel, state: AttackState, attack: str, success: bool) -> AttackState:
    """State after an activated attack hits its deadline and resolves."""
    if attack not in state.activated_set:
        raise ValueError(f"attack {attack!r} is not activated in {state}")
    if success:
        return simple_state(model, state.activated_set, state.completed_set | {attack})
    return simple_state(model, state.activated_set - {attack}, state.completed_set)


def available_activations(model: AmgModel, state: AttackState) -> frozenset[str]:
    """Attacks that may be activated now: neither running, completed, nor moot."""
    shadow = completed_descendants(model, state.completed_set & model.undefended)
    return frozenset(model.attacks) - (state.activated_set | state.completed_set | shadow)


def goal_state(model: AmgModel) -> AttackState:
    return AttackState((), (model.root,))


def is_goal(model: AmgModel, state: AttackState) -> bool:
    return not state.activated and state.completed == (model.root,)


def defense_relation(model: AmgModel) -> frozenset[tuple[str, str]]:
    """All pairs (d1, d2) where d2 'follows' d1.

    d2 follows d1 when d2 defends a child of a d1-defended node and d1 does
    not defend that child itself.
    """
    return frozenset((d1, d2) for d1, d2s in model.followers.items() for d2 in d2s)


def defense_order(model: AmgModel, defense_ids: AbstractSet[str] | Iterable[str]) -> tuple[str, ...]:
    """Serialize a set of simultaneously firing defenses.

    Returns an order where followers fire before the defenses they follow;
    applying the defenses one at a time in this order yields the same state
    as applying them all at once.  Ties break lexicographically.
    """
    pending = set(defense_ids)
    for d in pending:
        if d not in model.defenses:
            raise KeyError(f"unknown defense id: {d!r}")
    rel = defense_relation(model)
    # d1 may only be placed after every follower d2 (d1 |> d2) in the set.
    deps: dict[str, set[str]] = {d: set() for d in pending}
    for d1, d2 in rel:
        if d1 in pending and d2 in pending:
            deps[d1].add(d2)
    order: list[str] = []
    placed: set[str] = set()
    while pending:
        ready = sorted(d for d in pending if deps[d] <= placed)
        if not ready:
            raise DefenseOrderError(
                f"defense 'follows' relation cyclic on {sorted(pending)}; cannot serialize"
            )
        d = ready[0]
        order.append(d)
        placed.add(d)
        pending.remove(d)
    return tuple(order)


def apply_defense_set(model: AmgModel, state: AttackState, defense_ids: Iterable[str]) -> AttackState:
    """Simultaneous successful firing of several defenses (single set removal)."""
    wiped: set[str] = set()
    for d in defense_ids:
        wiped |= model.defenses[d].defends
    return simple_state(model, state.activated_set - wiped, state.completed_set - wiped)
