"""Location-graph construction, eligibility, and firing semantics."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_model
from mtdattack import catalog, ops
from mtdattack.model import AmgModel, AtomicAttack, AttackState, Defense, Refinement
from mtdattack.state_space import (
    ActionKind,
    ActionLabel,
    ClockValuation,
    ExplorationLimitExceeded,
    PendingEvent,
    build_ptmdp,
    eligible_events,
    fire,
)

seeds = st.integers(min_value=0, max_value=1_000)


def test_simple_model_locations(simple_model):
    p = build_ptmdp(simple_model)
    expect = {
        AttackState((), ()),
        AttackState.of({"a_0"}, set()),
        AttackState.of({"a_1"}, set()),
        AttackState.of({"a_0", "a_1"}, set()),
        AttackState((), ("g_0",)),
    }
    assert set(p.locations) == expect
    assert len(p.locations) == 5
    assert p.initial == AttackState((), ())
    assert p.goal == AttackState((), ("g_0",))


def test_single_attack_locations():
    p = build_ptmdp(catalog.single_attack_model())
    assert len(p.locations) == 3


def test_meter_location_count_regression(meter_model):
    # Golden number from the first correct build of the case-study model.
    p = build_ptmdp(meter_model)
    assert len(p.locations) == 1505


def test_exploration_cap(meter_model):
    with pytest.raises(ExplorationLimitExceeded) as err:
        build_ptmdp(meter_model, limit_states=100)
    assert err.value.limit == 100
    assert err.value.frontier > 0


def test_transition_targets_match_ops(simple_model, meter_model):
    for model in (simple_model, meter_model):
        p = build_ptmdp(model)
        for loc in p.locations:
            for tr in p.outgoing(loc):
                k, subj = tr.label.kind, tr.label.subject
                if k is ActionKind.ACTIVATE:
                    want = ops.simple_state(model, loc.activated_set | {subj}, loc.completed_set)
                    assert tr.cost == model.attacks[subj].activation_cost
                elif k is ActionKind.DEFENSE_SUCCESS:
                    want = ops.apply_defense(model, loc, subj)
                    assert tr.cost == 0
                elif k is ActionKind.DEFENSE_FAIL:
                    want = loc
                    assert tr.cost == 0
                elif k is ActionKind.COMPLETE_SUCCESS:
                    want = ops.apply_completion(model, loc, subj, True)
                    assert tr.cost == 0
                else:
                    want = ops.apply_completion(model, loc, subj, False)
                    assert tr.cost == 0
                assert tr.target == want
                assert tr.resets == (subj,)


def test_cost_rates_and_invariants(simple_model):
    p = build_ptmdp(simple_model)
    loc = AttackState.of({"a_1"}, set())
    assert p.cost_rate(loc) == 2
    assert p.cost_rate(p.initial) == 0
    assert p.invariant(loc) == (("a_1", 10), ("d_0", 10))


@given(seeds)
@settings(max_examples=40, deadline=None)
def test_locations_are_canonical_and_reachable(seed):
    model = random_model(seed, max_nodes=8, max_defenses=2)
    try:
        p = build_ptmdp(model, limit_states=20_000)
    except ExplorationLimitExceeded:
        return
    for loc in p.locations:
        assert ops.simple_state(model, loc.activated_set, loc.completed_set) == loc
    # reachability from the initial location over built transitions
    seen = {p.initial}
    frontier = [p.initial]
    while frontier:
        loc = frontier.pop()
        for tr in p.outgoing(loc):
            if tr.target not in seen:
                seen.add(tr.target)
                frontier.append(tr.target)
    assert seen == set(p.locations)


def test_build_is_deterministic(meter_model):
    p1 = build_ptmdp(meter_model)
    p2 = build_ptmdp(meter_model)
    assert p1.locations == p2.locations
    for loc in p1.locations:
        assert p1.outgoing(loc) == p2.outgoing(loc)


def test_goal_is_absorbing(simple_model, meter_model):
    for model in (simple_model, meter_model):
        p = build_ptmdp(model)
        for tr in p.outgoing(p.goal):
            assert not tr.label.controllable
            assert tr.target == p.goal


# -- eligible_events -----------------------------------------------------------


def test_eligible_events_defense_only(simple_model):
    loc = AttackState.of({"a_0"}, set())
    v = ClockValuation({"a_0": 0}, {"d_0": 0})
    b, events, kappa = eligible_events(simple_model, loc, v)
    assert b == 10
    assert events == (PendingEvent("defense", "d_0"),)
    assert kappa == 1


def test_eligible_events_tie():
    m = AmgModel(
        root="g",
        edges=(("g", "a"),),
        refinements={"g": Refinement.OR},
        attacks={"a": AtomicAttack(10, Fraction(1, 2))},
        defenses={"d": Defense(10, Fraction(1), frozenset({"a"}))},
    )
    v = ClockValuation({"a": 0}, {"d": 0})
    b, events, kappa = eligible_events(m, AttackState.of({"a"}, set()), v)
    assert b == 10
    assert events == (PendingEvent("complete", "a"), PendingEvent("defense", "d"))
    assert kappa == Fraction(1, 2)


def test_eligible_events_follower_suppression():
    m = AmgModel(
        root="g_0",
        edges=(("g_0", "g_1"), ("g_1", "a_1"), ("g_0", "a_2")),
        refinements={"g_0": Refinement.OR, "g_1": Refinement.OR},
        attacks={"a_1": AtomicAttack(99, Fraction(1, 2)), "a_2": AtomicAttack(99, Fraction(1, 2))},
        defenses={
            "d1": Defense(10, Fraction(1), frozenset({"g_1"})),
            "d2": Defense(10, Fraction(1), frozenset({"a_1"})),
        },
    )
    v = ClockValuation({}, {"d1": 0, "d2": 0})
    b, events, kappa = eligible_events(m, AttackState((), ()), v)
    assert b == 10
    assert events == (PendingEvent("defense", "d2"),)
    assert kappa == 1
    # once d2 has fired, d1 becomes eligible at zero delay
    v2 = ClockValuation({}, {"d1": 10, "d2": 0})
    b2, events2, _ = eligible_events(m, AttackState((), ()), v2)
    assert b2 == 0
    assert events2 == (PendingEvent("defense", "d1"),)


def test_eligible_events_no_clocks():
    m = catalog.single_attack_model()
    b, events, kappa = eligible_events(m, AttackState((), ()), ClockValuation({}, {}))
    assert b is None and events == () and kappa == 0


# -- fire -----------------------------------------------------------------------


def test_fire_defense_success(simple_model):
    loc = AttackState.of({"a_0"}, set())
    v = ClockValuation({"a_0": 10}, {"d_0": 10}, 10)
    loc2, v2 = fire(simple_model, loc, v, ActionLabel(ActionKind.DEFENSE_SUCCESS, "d_0"))
    assert loc2 == AttackState((), ())
    assert v2.defense_clocks == {"d_0": 0}
    assert v2.attack_clocks == {}
    assert v2.global_time == 10


def test_fire_defense_fail_is_reset_self_loop(simple_model):
    loc = AttackState.of({"a_1"}, set())
    v = ClockValuation({"a_1": 3}, {"d_0": 10}, 3)
    loc2, v2 = fire(simple_model, loc, v, ActionLabel(ActionKind.DEFENSE_FAIL, "d_0"))
    assert loc2 == loc
    assert v2.defense_clocks == {"d_0": 0}
    assert v2.attack_clocks == {"a_1": 3}


def test_fire_completion_reaches_goal(simple_model):
    loc = AttackState.of({"a_1"}, set())
    v = ClockValuation({"a_1": 10}, {"d_0": 0}, 10)
    loc2, v2 = fire(simple_model, loc, v, ActionLabel(ActionKind.COMPLETE_SUCCESS, "a_1"))
    assert loc2 == AttackState((), ("g_0",))
    assert v2.attack_clocks == {}


def test_fire_requires_enabledness(simple_model):
    loc = AttackState.of({"a_1"}, set())
    v = ClockValuation({"a_1": 3}, {"d_0": 0}, 3)
    with pytest.raises(ValueError):
        fire(simple_model, loc, v, ActionLabel(ActionKind.COMPLETE_SUCCESS, "a_1"))
    with pytest.raises(ValueError):
        fire(simple_model, loc, v, ActionLabel(ActionKind.DEFENSE_SUCCESS, "d_0"))
    with pytest.raises(ValueError):
        fire(simple_model, loc, v, ActionLabel(ActionKind.ACTIVATE, "a_1"))


def test_fire_activation(simple_model):
    loc = AttackState((), ())
    v = ClockValuation({}, {"d_0": 4}, 4)
    loc2, v2 = fire(simple_model, loc, v, ActionLabel(ActionKind.ACTIVATE, "a_0"))
    assert loc2 == AttackState.of({"a_0"}, set())
    assert v2.attack_clocks == {"a_0": 0}
    assert v2.satisfies_invariant(simple_model, loc2)
