"""Shared fixtures and the seeded random-model generator."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from mtdattack import catalog, ops, validate
from mtdattack.model import AmgModel, AtomicAttack, Defense, Refinement

PROBS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))


@pytest.fixture
def simple_model() -> AmgModel:
    return catalog.simple_model()


@pytest.fixture
def meter_model() -> AmgModel:
    return catalog.electricity_meter_model()


def _random_model_once(rng: random.Random, max_nodes: int, max_defenses: int) -> AmgModel:
    n_inner = rng.randint(1, 4)
    n_leaves = rng.randint(2, max(2, max_nodes - n_inner))
    inner = [f"g{i}" for i in range(n_inner)]
    leaves = [f"a{i}" for i in range(n_leaves)]
    edges: set[tuple[str, str]] = set()
    # Parent indices below child indices keep the node graph acyclic.
    for j in range(1, n_inner):
        edges.add((inner[rng.randrange(j)], inner[j]))
    for leaf in leaves:
        edges.add((inner[rng.randrange(n_inner)], leaf))
    for _ in range(rng.randint(0, 4)):
        i = rng.randrange(n_inner)
        if rng.random() < 0.5 and i + 1 < n_inner:
            j = rng.randrange(i + 1, n_inner)
            edges.add((inner[i], inner[j]))
        else:
            edges.add((inner[i], rng.choice(leaves)))

    child_count = {g: 0 for g in inner}
    for parent, _ in edges:
        child_count[parent] += 1
    for g in inner:
        if child_count[g] == 0:
            edges.add((g, rng.choice(leaves)))

    refinements = {g: rng.choice((Refinement.AND, Refinement.OR)) for g in inner}
    attacks = {
        a: AtomicAttack(
            completion_time=rng.randint(1, 6),
            success_prob=rng.choice(PROBS),
            activation_cost=rng.randint(0, 4),
            cost_rate=rng.randint(0, 3),
        )
        for a in leaves
    }
    non_root = [n for n in inner + leaves if n != inner[0]]
    defenses = {}
    for k in range(rng.randint(0, max_defenses)):
        size = rng.randint(1, min(3, len(non_root)))
        defenses[f"d{k}"] = Defense(
            period=rng.randint(1, 6),
            success_prob=rng.choice(PROBS),
            defends=frozenset(rng.sample(non_root, size)),
        )
    return AmgModel(
        root=inner[0],
        edges=tuple(sorted(edges)),
        refinements=refinements,
        attacks=attacks,
        defenses=defenses,
    )


def random_model(seed: int, max_nodes: int = 12, max_defenses: int = 4) -> AmgModel:
    """Deterministic random valid model; defense sets are thinned until the
    'follows' relation is acyclic."""
    rng = random.Random(seed)
    model = _random_model_once(rng, max_nodes, max_defenses)
    for _ in range(10):
        if not validate(model):
            return model
        # Only the defense-relation cycle check can fail by construction.
        defenses = dict(model.defenses)
        if not defenses:
            break
        defenses.pop(sorted(defenses)[-1])
        model = AmgModel(model.root, model.edges, model.refinements, model.attacks, defenses)
    assert not validate(model), f"generator produced an invalid model for seed {seed}"
    return model


def random_state(model: AmgModel, seed: int):
    """A random canonical attack state of the model."""
    rng = random.Random(seed ^ 0x5EED)
    leaves = sorted(model.attacks)
    nodes = sorted(model.nodes)
    a = {x for x in leaves if rng.random() < 0.4}
    c = {x for x in nodes if rng.random() < 0.3}
    return ops.simple_state(model, a, c)
