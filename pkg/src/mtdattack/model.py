"""Core data model: attack DAGs annotated with moving target defenses.

An :class:`AmgModel` is a rooted DAG whose inner nodes (subgoals) carry an
AND/OR refinement and whose leaves (atomic attacks) carry timing, cost, and
probability attributes.  Moving target defenses (MTDs) fire periodically and,
on success, wipe the progress of every node they defend.

Everything here is immutable and hashable; derived structure (children maps,
topological data, the "follows" relation between defenses) is computed lazily
and cached on the model instance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Union

ProbLike = Union[int, float, str, Fraction]


def as_probability(value: ProbLike) -> Fraction:
    """Convert a user-supplied probability to an exact Fraction.

    Floats go through their shortest decimal repr, so ``0.3`` becomes the
    exact rational 3/10 rather than the binary float it round-trips to.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


class Refinement(enum.Enum):
    """How a subgoal combines its children."""

    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class AtomicAttack:
    """Attributes of a leaf attack step.

    completion_time: time units from activation until the success/failure
        draw; activation_cost is paid once per activation; cost_rate accrues
        per time unit while the attack is active.
    """

    completion_time: int
    success_prob: Fraction
    activation_cost: int = 0
    cost_rate: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "success_prob", as_probability(self.success_prob))


@dataclass(frozen=True)
class Defense:
    """A periodic moving target defense.

    Every ``period`` time units the defense fires; with ``success_prob`` it
    un-completes and deactivates every node in ``defends``.
    """

    period: int
    success_prob: Fraction
    defends: frozenset[str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "success_prob", as_probability(self.success_prob))
        object.__setattr__(self, "defends", frozenset(self.defends))


@dataclass(frozen=True)
class AttackState:
    """Canonical quotient state: sorted activated attacks and completed nodes.

    Instances are only meaningful when produced by ``ops.simple_state`` (or
    built from already-canonical data); structural equality then coincides
    with semantic state equivalence.
    """

    activated: tuple[str, ...]
    completed: tuple[str, ...]

    @staticmethod
    def of(activated: Iterable[str], completed: Iterable[str]) -> "AttackState":
        return AttackState(tuple(sorted(set(activated))), tuple(sorted(set(completed))))

    @cached_property
    def activated_set(self) -> frozenset[str]:
        return frozenset(self.activated)

    @cached_property
    def completed_set(self) -> frozenset[str]:
        return frozenset(self.completed)

    def __lt__(self, other: "AttackState") -> bool:
        return (self.activated, self.completed) < (other.activated, other.completed)

    def __str__(self) -> str:
        return "[{%s}, {%s}]" % (",".join(self.activated), ",".join(self.completed))


EMPTY_STATE = AttackState((), ())


@dataclass(frozen=True)
class ValidationIssue:
    """One violated model invariant."""

    code: str
    message: str
    subjects: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.subjects:
            return f"{self.code}: {self.message} [{', '.join(self.subjects)}]"
        return f"{self.code}: {self.message}"


@dataclass(frozen=True)
class AmgModel:
    """Rooted attack DAG with MTD annotations.

    The node set is the union of ``refinements`` (subgoals) and ``attacks``
    (leaves).  ``edges`` are (parent, child) pairs.  Use :func:`validate`
    before trusting a model built from external input.
    """

    root: str
    edges: tuple[tuple[str, str], ...]
    refinements: Mapping[str, Refinement]
    attacks: Mapping[str, AtomicAttack]
    defenses: Mapping[str, Defense] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple((p, c) for p, c in self.edges))
        object.__setattr__(self, "refinements", dict(self.refinements))
        object.__setattr__(self, "attacks", dict(self.attacks))
        object.__setattr__(self, "defenses", dict(self.defenses))

    def __hash__(self) -> int:
        return hash((self.root, self.edges, tuple(sorted(self.defenses))))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AmgModel):
            return NotImplemented
        return (
            self.root == other.root
            and self.edges == other.edges
            and self.refinements == other.refinements
            and self.attacks == other.attacks
            and self.defenses == other.defenses
        )

    # -- derived structure -------------------------------------------------

    @cached_property
    def nodes(self) -> frozenset[str]:
        return frozenset(self.refinements) | frozenset(self.attacks)

    @cached_property
    def attack_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.attacks))

    @cached_property
    def subgoal_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.refinements))

    @cached_property
    def defense_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.defenses))

    @cached_property
    def children_map(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for parent, child in self.edges:
            if parent in out and child not in out[parent]:
                out[parent].append(child)
        return {n: tuple(sorted(cs)) for n, cs in out.items()}

    @cached_property
    def parents_map(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {n: [] for n in self.nodes}
        for parent, child in self.edges:
            if child in out and parent not in out[child]:
                out[child].append(parent)
        return {n: tuple(sorted(ps)) for n, ps in out.items()}

    def children(self, node: str) -> tuple[str, ...]:
        try:
            return self.children_map[node]
        except KeyError:
            raise KeyError(f"unknown node id: {node!r}") from None

    @cached_property
    def defended_by(self) -> dict[str, frozenset[str]]:
        """Map node -> ids of defenses covering it."""
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for did, d in self.defenses.items():
            for n in d.defends:
                if n in out:
                    out[n].add(did)
        return {n: frozenset(s) for n, s in out.items()}

    @cached_property
    def undefended(self) -> frozenset[str]:
        return frozenset(n for n, ds in self.defended_by.items() if not ds)

    @cached_property
    def followers(self) -> dict[str, frozenset[str]]:
        """For each defense d1, the defenses d2 that 'follow' it.

        d2 follows d1 when d2 defends a child of a d1-defended node that d1
        does not defend itself.
        """
        out: dict[str, frozenset[str]] = {}
        for d1, dd1 in self.defenses.items():
            acc: set[str] = set()
            for d2, dd2 in self.defenses.items():
                if d1 == d2:
                    continue
                for n1 in dd1.defends:
                    if n1 not in self.nodes:
                        continue
                    if any(c not in dd1.defends and c in dd2.defends for c in self.children_map[n1]):
                        acc.add(d2)
                        break
            out[d1] = frozenset(acc)
        return out

    @cached_property
    def max_time_attr(self) -> int:
        times = [a.completion_time for a in self.attacks.values()]
        times += [d.period for d in self.defenses.values()]
        return max(times, default=1)

    def with_defense_periods(self, periods: Mapping[str, int]) -> "AmgModel":
        """Copy of the model with some defense periods replaced."""
        new = dict(self.defenses)
        for did, t in periods.items():
            if did not in new:
                raise KeyError(f"unknown defense id: {did!r}")
            old = new[did]
            new[did] = Defense(period=int(t), success_prob=old.success_prob, defends=old.defends)
        return AmgModel(self.root, self.edges, self.refinements, self.attacks, new)


def _cycle_nodes(adjacency: Mapping[str, Iterable[str]]) -> tuple[str, ...]:
    """Return the nodes of some directed cycle, or () when acyclic."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in adjacency}
    stack_path: list[str] = []

    def visit(n: str) -> tuple[str, ...]:
        color[n] = GRAY
        stack_path.append(n)
        for m in adjacency.get(n, ()):
            if m not in color:
                continue
            if color[m] == GRAY:
                i = stack_path.index(m)
                return tuple(stack_path[i:])
            if color[m] == WHITE:
                found = visit(m)
                if found:
                    return found
        stack_path.pop()
        color[n] = BLACK
        return ()

    for n in sorted(adjacency):
        if color[n] == WHITE:
            found = visit(n)
            if found:
                return found
    return ()


def validate(model: AmgModel) -> list[ValidationIssue]:
    """Check every model invariant; an empty report means the model is valid.

    Violations are report entries, never exceptions, so arbitrary parsed
    input can be inspected.
    """
    issues: list[ValidationIssue] = []
    nodes = frozenset(model.refinements) | frozenset(model.attacks)

    overlap = sorted(frozenset(model.refinements) & frozenset(model.attacks))
    if overlap:
        issues.append(
            ValidationIssue("duplicate-node", "node is both subgoal and attack", tuple(overlap))
        )
    clash = sorted(nodes & frozenset(model.defenses))
    if clash:
        issues.append(
            ValidationIssue("id-clash", "defense id collides with a node id", tuple(clash))
        )

    if model.root not in nodes:
        issues.append(ValidationIssue("unknown-root", "root is not a declared node", (model.root,)))
    elif model.root in model.attacks:
        issues.append(
            ValidationIssue("leaf-root", "root must be a subgoal, not an atomic attack", (model.root,))
        )

    seen_edges: set[tuple[str, str]] = set()
    for parent, child in model.edges:
        for endpoint in (parent, child):
            if endpoint not in nodes:
                issues.append(
                    ValidationIssue("unknown-edge-endpoint", "edge references unknown node", (endpoint,))
                )
        if (parent, child) in seen_edges:
            issues.append(ValidationIssue("duplicate-edge", "edge listed twice", (parent, child)))
        seen_edges.add((parent, child))
        if parent in model.attacks:
            issues.append(
                ValidationIssue("attack-with-child", "atomic attack has an outgoing edge", (parent,))
            )

    adjacency = {n: [c for p, c in model.edges if p == n and c in nodes] for n in nodes}
    cycle = _cycle_nodes(adjacency)
    if cycle:
        issues.append(ValidationIssue("directed-cycle", "node graph has a directed cycle", cycle))

    if model.root in nodes and not cycle:
        reachable = set()
        stack = [model.root]
        while stack:
            n = stack.pop()
            if n in reachable:
                continue
            reachable.add(n)
            stack.extend(adjacency.get(n, ()))
        orphans = sorted(nodes - reachable)
        if orphans:
            issues.append(
                ValidationIssue("unreachable-node", "node not reachable from the root", tuple(orphans))
            )

    for g in sorted(model.refinements):
        if not adjacency.get(g):
            issues.append(ValidationIssue("childless-subgoal", "subgoal has no children", (g,)))

    for a, attrs in sorted(model.attacks.items()):
        if not isinstance(attrs.completion_time, int) or attrs.completion_time < 1:
            issues.append(
                ValidationIssue("bad-completion-time", "completion time must be an integer >= 1", (a,))
            )
        if not (0 <= attrs.success_prob <= 1):
            issues.append(ValidationIssue("bad-probability", "success probability outside [0,1]", (a,)))
        if not isinstance(attrs.activation_cost, int) or attrs.activation_cost < 0:
            issues.append(
                ValidationIssue("bad-activation-cost", "activation cost must be an integer >= 0", (a,))
            )
        if not isinstance(attrs.cost_rate, int) or attrs.cost_rate < 0:
            issues.append(ValidationIssue("bad-cost-rate", "cost rate must be an integer >= 0", (a,)))

    for did, d in sorted(model.defenses.items()):
        if not isinstance(d.period, int) or d.period < 1:
            issues.append(
                ValidationIssue("bad-period", "activation period must be an integer >= 1", (did,))
            )
        if not (0 <= d.success_prob <= 1):
            issues.append(ValidationIssue("bad-probability", "success probability outside [0,1]", (did,)))
        if not d.defends:
            issues.append(ValidationIssue("empty-defense", "defense protects no nodes", (did,)))
        unknown = sorted(d.defends - nodes)
        if unknown:
            issues.append(
                ValidationIssue("unknown-defended-node", "defense protects unknown nodes", (did, *unknown))
            )
        if model.root in d.defends:
            issues.append(
                ValidationIssue("defended-root", "the root goal must not be defended", (did, model.root))
            )

    # "follows" relation between defenses must be acyclic so that
    # simultaneous defense firings can be serialized.
    dcycle = _cycle_nodes({d: sorted(fs) for d, fs in model.followers.items()})
    if dcycle:
        issues.append(
            ValidationIssue(
                "defense-relation-cycle",
                "the defense 'follows' relation has a cycle (▷ cycle)",
                dcycle,
            )
        )

    return issues
