"""Operator algebra: worked examples plus property tests against oracles."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_model, random_state
from mtdattack import catalog, ops
from mtdattack.model import AmgModel, AtomicAttack, AttackState, Defense, Refinement
from oracles import (
    completed_descendants_oracle,
    propagate_oracle,
    simple_state_oracle,
)

seeds = st.integers(min_value=0, max_value=2_000)


def conj_model():
    return AmgModel(
        root="g_0",
        edges=(("g_0", "a_0"), ("g_0", "a_1")),
        refinements={"g_0": Refinement.AND},
        attacks={"a_0": AtomicAttack(2, Fraction(1)), "a_1": AtomicAttack(3, Fraction(1))},
        defenses={},
    )


# -- children ---------------------------------------------------------------


def test_children_examples(simple_model, meter_model):
    assert ops.children(simple_model, "g_0") == {"a_0", "a_1"}
    assert ops.children(simple_model, "a_0") == frozenset()
    assert ops.children(meter_model, "g_ac") == {"a_bf", "a_ss"}
    with pytest.raises(KeyError):
        ops.children(simple_model, "missing")


# -- defense relation and ordering -------------------------------------------


def test_defense_relation_meter_empty(meter_model):
    assert ops.defense_relation(meter_model) == frozenset()


def follows_model():
    # d2 defends a child (a_1) of a d1-defended node (g_1) with a_1 not in d1.
    return AmgModel(
        root="g_0",
        edges=(("g_0", "g_1"), ("g_1", "a_1"), ("g_0", "a_2")),
        refinements={"g_0": Refinement.OR, "g_1": Refinement.OR},
        attacks={"a_1": AtomicAttack(2, Fraction(1, 2)), "a_2": AtomicAttack(2, Fraction(1, 2))},
        defenses={
            "d1": Defense(4, Fraction(1), frozenset({"g_1"})),
            "d2": Defense(4, Fraction(1), frozenset({"a_1"})),
        },
    )


def test_defense_relation_single_pair():
    assert ops.defense_relation(follows_model()) == {("d1", "d2")}


def test_defense_relation_single_defense_never_self(simple_model):
    assert ops.defense_relation(simple_model) == frozenset()


def test_defense_order_unrelated_is_lexicographic(meter_model):
    assert ops.defense_order(meter_model, {"d_dk", "d_cp"}) == ("d_cp", "d_dk")


def test_defense_order_follower_first():
    assert ops.defense_order(follows_model(), {"d1", "d2"}) == ("d2", "d1")


def test_defense_order_empty(simple_model):
    assert ops.defense_order(simple_model, set()) == ()


@given(seeds, seeds)
@settings(max_examples=60, deadline=None)
def test_defense_order_satisfies_condition(seed, subset_seed):
    model = random_model(seed)
    import random

    rng = random.Random(subset_seed)
    chosen = {d for d in model.defense_ids if rng.random() < 0.6}
    order = ops.defense_order(model, chosen)
    assert set(order) == chosen
    rel = ops.defense_relation(model)
    for i, di in enumerate(order):
        for dj in order[:i]:
            assert (dj, di) not in rel, (order, rel)


# -- propagation --------------------------------------------------------------


def test_propagate_examples(simple_model):
    assert ops.propagate(simple_model, set()) == frozenset()
    assert ops.propagate(simple_model, {"a_1"}) == {"a_1", "g_0"}
    m = conj_model()
    assert ops.propagate(m, {"a_0"}) == {"a_0"}
    assert ops.propagate(m, {"a_0", "a_1"}) == {"a_0", "a_1", "g_0"}


@given(seeds, seeds)
@settings(max_examples=120, deadline=None)
def test_propagate_matches_oracle_and_props(seed, state_seed):
    model = random_model(seed)
    import random

    rng = random.Random(state_seed)
    c1 = {n for n in model.nodes if rng.random() < 0.3}
    c2 = c1 | {n for n in model.nodes if rng.random() < 0.2}
    p1 = ops.propagate(model, c1)
    assert p1 == propagate_oracle(model, c1)
    # containment, monotonicity, projection
    assert c1 <= p1
    assert p1 <= ops.propagate(model, c2)
    assert ops.propagate(model, p1) == p1


# -- completed descendants -----------------------------------------------------


def test_completed_descendants_examples(simple_model, meter_model):
    assert ops.completed_descendants(simple_model, {"g_0"}) == simple_model.nodes - {"g_0"}
    assert ops.completed_descendants(meter_model, {"g_0"}) == meter_model.nodes - {"g_0"}
    assert ops.completed_descendants(simple_model, set()) == frozenset()
    assert ops.completed_descendants(simple_model, {"a_0"}) == frozenset()


@given(seeds, seeds)
@settings(max_examples=120, deadline=None)
def test_completed_descendants_matches_oracle(seed, state_seed):
    model = random_model(seed)
    import random

    rng = random.Random(state_seed)
    c = {n for n in model.nodes if rng.random() < 0.3}
    got = ops.completed_descendants(model, c)
    assert got == completed_descendants_oracle(model, c)
    # monotone
    bigger = c | {n for n in model.nodes if rng.random() < 0.2}
    assert got <= ops.completed_descendants(model, bigger)
    # dropping the shadowed part changes nothing
    assert ops.completed_descendants(model, set(c) - set(got)) == got


# -- pruning and the simple state ---------------------------------------------


def test_prune_examples(simple_model):
    assert ops.prune(simple_model, set(), set()) == (frozenset(), frozenset())
    assert ops.prune(simple_model, {"a_0"}, {"a_1", "g_0"}) == (frozenset(), {"g_0"})


def test_prune_checkpoint_case():
    m = catalog.expressivity_model("c")
    a, c = ops.prune(m, set(), {"g", "a_1"})
    assert (a, c) == (frozenset(), {"g"})


def test_simple_state_examples(simple_model):
    assert ops.simple_state(simple_model, set(), set()) == AttackState((), ())
    assert ops.simple_state(simple_model, {"a_0"}, {"a_1"}) == AttackState((), ("g_0",))


def figure_model():
    """The worked canonicalization scenario: two defenses, one deep OR chain."""
    return AmgModel(
        root="g0",
        edges=(
            ("g0", "g1"), ("g0", "g2"), ("g0", "g3"),
            ("g1", "g5"), ("g1", "a0"), ("g1", "a1"),
            ("g5", "a7"),
            ("g2", "a2"), ("g2", "a3"), ("g2", "a4"),
            ("g3", "a4"), ("g3", "a5"), ("g3", "g4"),
            ("g4", "a6"),
        ),
        refinements={
            "g0": Refinement.AND, "g1": Refinement.OR, "g2": Refinement.AND,
            "g3": Refinement.OR, "g4": Refinement.AND, "g5": Refinement.OR,
        },
        attacks={a: AtomicAttack(2, Fraction(1, 2)) for a in
                 ("a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7")},
        defenses={
            "d1": Defense(5, Fraction(1), frozenset({"g1", "a0", "a1"})),
            "d2": Defense(5, Fraction(1), frozenset({"g4", "a6"})),
        },
    )


def test_simple_state_figure_scenario():
    model = figure_model()
    state = ops.simple_state(
        model, {"a1", "a2", "a4", "a5"}, {"g5", "a7", "a0", "a2", "a6"}
    )
    assert state == AttackState.of({"a1", "a4"}, {"a0", "a2", "g1", "g3", "g5"})


@given(seeds, seeds)
@settings(max_examples=120, deadline=None)
def test_simple_state_matches_oracle_and_is_projection(seed, state_seed):
    model = random_model(seed)
    import random

    rng = random.Random(state_seed)
    a = {x for x in model.attacks if rng.random() < 0.4}
    c = {n for n in model.nodes if rng.random() < 0.3}
    got = ops.simple_state(model, a, c)
    assert (got.activated, got.completed) == simple_state_oracle(model, a, c)
    again = ops.simple_state(model, got.activated_set, got.completed_set)
    assert again == got


@given(seeds, seeds)
@settings(max_examples=100, deadline=None)
def test_shadow_unaffected_by_defense_removal(seed, state_seed):
    """For canonical states, wiping defended nodes does not change the
    checkpoint shadow after re-propagation."""
    model = random_model(seed)
    state = random_state(model, state_seed)
    c = state.completed_set
    lhs = ops.completed_descendants(model, ops.propagate(model, c) & model.undefended)
    import random

    rng = random.Random(state_seed ^ 0xD)
    chosen = [d for d in model.defense_ids if rng.random() < 0.5]
    wiped = set()
    for d in chosen:
        wiped |= model.defenses[d].defends
    rhs = ops.completed_descendants(model, ops.propagate(model, c - wiped) & model.undefended)
    assert lhs == rhs


# -- defense application --------------------------------------------------------


def test_apply_defense_examples(simple_model):
    s = AttackState.of({"a_0"}, set())
    assert ops.apply_defense(simple_model, s, "d_0") == AttackState((), ())
    with pytest.raises(KeyError):
        ops.apply_defense(simple_model, s, "zzz")


def test_expressivity_case_full_reset():
    m = catalog.expressivity_model("a")
    s = AttackState.of(set(), {"g", "a_1", "a_2"})
    assert ops.apply_defense(m, s, "d") == AttackState((), ())


def test_expressivity_case_partial_keeps_other_leaf():
    m = catalog.expressivity_model("b")
    s = AttackState.of(set(), {"g", "a_1", "a_2"})
    # a_2 is untouched by the defense; g loses support and a_1 is wiped.
    assert ops.apply_defense(m, s, "d") == AttackState.of(set(), {"a_2"})


def test_expressivity_case_checkpoint_survives():
    m = catalog.expressivity_model("c")
    s = AttackState.of(set(), {"g"})
    assert ops.apply_defense(m, s, "d") == s


# -- completion -----------------------------------------------------------------


def test_apply_completion_examples(simple_model):
    s = AttackState.of({"a_1"}, set())
    assert ops.apply_completion(simple_model, s, "a_1", True) == AttackState((), ("g_0",))
    assert ops.apply_completion(simple_model, s, "a_1", False) == AttackState((), ())
    m = conj_model()
    both = AttackState.of({"a_0", "a_1"}, set())
    assert ops.apply_completion(m, both, "a_0", True) == AttackState.of({"a_1"}, {"a_0"})
    with pytest.raises(ValueError):
        ops.apply_completion(simple_model, AttackState((), ()), "a_1", True)


# -- availability and goal -------------------------------------------------------


def test_available_activations_examples(simple_model):
    assert ops.available_activations(simple_model, AttackState((), ())) == {"a_0", "a_1"}
    assert ops.available_activations(simple_model, AttackState((), ("g_0",))) == frozenset()
    assert ops.available_activations(simple_model, AttackState.of({"a_0"}, set())) == {"a_1"}


def test_is_goal_examples(simple_model):
    assert ops.is_goal(simple_model, AttackState((), ("g_0",)))
    assert not ops.is_goal(simple_model, AttackState((), ()))
    assert ops.is_goal(simple_model, ops.simple_state(simple_model, set(), {"a_1"}))


# -- sequential vs simultaneous defense application -------------------------------


@given(seeds, seeds)
@settings(max_examples=100, deadline=None)
def test_defense_triangle(seed, state_seed):
    """If d2 does not follow d1, applying {d1, d2} at once equals d1 then d2."""
    model = random_model(seed)
    rel = ops.defense_relation(model)
    state = random_state(model, state_seed)
    for d1 in model.defense_ids:
        for d2 in model.defense_ids:
            if d1 == d2 or (d1, d2) in rel:
                continue
            together = ops.apply_defense_set(model, state, [d1, d2])
            spread = ops.apply_defense(model, ops.apply_defense(model, state, d1), d2)
            assert together == spread, (d1, d2, state)


@given(seeds, seeds, seeds)
@settings(max_examples=100, deadline=None)
def test_defense_chain(seed, state_seed, subset_seed):
    """Simultaneous application equals sequential application in serialization order."""
    model = random_model(seed)
    import random

    rng = random.Random(subset_seed)
    chosen = [d for d in model.defense_ids if rng.random() < 0.7]
    state = random_state(model, state_seed)
    order = ops.defense_order(model, chosen)
    sequential = state
    for d in order:
        sequential = ops.apply_defense(model, sequential, d)
    assert sequential == ops.apply_defense_set(model, state, chosen)


def test_operators_are_pure(simple_model):
    c = {"a_1"}
    first = ops.propagate(simple_model, c)
    second = ops.propagate(simple_model, c)
    assert first == second
    assert c == {"a_1"}
    s = AttackState.of({"a_0"}, set())
    assert ops.apply_defense(simple_model, s, "d_0") == ops.apply_defense(simple_model, s, "d_0")
    assert s == AttackState.of({"a_0"}, set())
