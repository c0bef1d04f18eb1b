"""Built-in example models used by the docs, tests, and experiment scripts."""

from __future__ import annotations

from fractions import Fraction

from .model import AmgModel, AtomicAttack, Defense, Refinement
from .optimizer import BudgetConstraint


def simple_model() -> AmgModel:
    """Two-leaf disjunction: a slow sure attack under an MTD, and a cheap coin-flip retry."""
    return AmgModel(
        root="g_0",
        edges=(("g_0", "a_0"), ("g_0", "a_1")),
        refinements={"g_0": Refinement.OR},
        attacks={
            "a_0": AtomicAttack(20, Fraction(1), 10, 0),
            "a_1": AtomicAttack(10, Fraction(1, 2), 0, 2),
        },
        defenses={"d_0": Defense(10, Fraction(1), frozenset({"a_0"}))},
    )


def single_attack_model(
    t: int = 5, p=Fraction(1), c: int = 3, cp: int = 2
) -> AmgModel:
    """One subgoal over one attack; handy for closed-form identities."""
    return AmgModel(
        root="g_0",
        edges=(("g_0", "a"),),
        refinements={"g_0": Refinement.OR},
        attacks={"a": AtomicAttack(t, p, c, cp)},
        defenses={},
    )


def conjunction_model() -> AmgModel:
    """Root AND over two attacks."""
    return AmgModel(
        root="g_0",
        edges=(("g_0", "a_0"), ("g_0", "a_1")),
        refinements={"g_0": Refinement.AND},
        attacks={
            "a_0": AtomicAttack(5, Fraction(1), 1, 0),
            "a_1": AtomicAttack(3, Fraction(1), 0, 1),
        },
        defenses={},
    )


def expressivity_model(case: str) -> AmgModel:
    """AND of two attacks under one defense, with the defended set varied.

    case "a": the defense covers the subgoal and both attacks (full reset);
    case "b": it covers the subgoal and a_1 only (a_2 untouched);
    case "c": it covers both attacks but not the subgoal (the subgoal is a
    permanent checkpoint once completed).
    """
    defended = {
        "a": frozenset({"g", "a_1", "a_2"}),
        "b": frozenset({"g", "a_1"}),
        "c": frozenset({"a_1", "a_2"}),
    }[case]
    # A conjunctive root with an extra leaf keeps g's completion from
    # cascading upward, so the fragment's states stay observable.
    return AmgModel(
        root="g_root",
        edges=(("g_root", "g"), ("g_root", "a_other"), ("g", "a_1"), ("g", "a_2")),
        refinements={"g_root": Refinement.AND, "g": Refinement.AND},
        attacks={
            "a_1": AtomicAttack(2, Fraction(1, 2), 1, 1),
            "a_2": AtomicAttack(3, Fraction(1, 2), 1, 1),
            "a_other": AtomicAttack(4, Fraction(1, 2), 1, 1),
        },
        defenses={"d": Defense(5, Fraction(1), defended)},
    )


METER_BASE_PERIODS = {"d_dk": 5, "d_cp": 100, "d_cc": 20, "d_dsr": 230}


def electricity_meter_model(
    ic_cost_rate: int = 5,
    periods: dict[str, int] | None = None,
) -> AmgModel:
    """Electricity-meter case study: fake a consumption report.

    Three strategies for the attacker: tamper with the communication (fast,
    expensive, protected by key rotation), with the device hardware (medium,
    protocol study protected by protocol changes), or with its software
    (slow, cheap, protected by software rotation).  The intercept-connection
    cost rate is configurable because two published readings of it exist; 5
    is the default and 50 the alternative.
    """
    p = dict(METER_BASE_PERIODS)
    if periods:
        p.update(periods)
    return AmgModel(
        root="g_0",
        edges=(
            ("g_0", "g_tc"),
            ("g_0", "g_th"),
            ("g_0", "g_ts"),
            ("g_tc", "a_ad"),
            ("g_tc", "a_ic"),
            ("g_th", "g_up"),
            ("g_th", "a_p"),
            ("g_th", "g_ac"),
            ("g_up", "a_sp"),
            ("g_ts", "g_ac"),
            ("g_ts", "g_hs"),
            ("g_ac", "a_bf"),
            ("g_ac", "a_ss"),
            ("g_hs", "a_fue"),
        ),
        refinements={
            "g_0": Refinement.OR,
            "g_tc": Refinement.AND,
            "g_th": Refinement.AND,
            "g_ts": Refinement.AND,
            "g_up": Refinement.AND,
            "g_ac": Refinement.OR,
            "g_hs": Refinement.AND,
        },
        attacks={
            "a_ad": AtomicAttack(8, Fraction(1, 2), 10, 20),
            "a_ic": AtomicAttack(4, Fraction(3, 10), 0, ic_cost_rate),
            "a_sp": AtomicAttack(440, Fraction(4, 5), 20, 0),
            "a_p": AtomicAttack(1, Fraction(1), 0, 100),
            "a_bf": AtomicAttack(1, Fraction(1, 1000), 0, 1),
            "a_ss": AtomicAttack(30, Fraction(1, 5), 10, 0),
            "a_fue": AtomicAttack(720, Fraction(4, 5), 10, 0),
        },
        defenses={
            "d_dk": Defense(p["d_dk"], Fraction(1), frozenset({"a_ad"})),
            "d_cp": Defense(p["d_cp"], Fraction(1, 2), frozenset({"a_sp", "g_up"})),
            "d_cc": Defense(p["d_cc"], Fraction(1), frozenset({"a_bf", "a_ss", "g_ac"})),
            "d_dsr": Defense(p["d_dsr"], Fraction(1), frozenset({"a_fue"})),
        },
    )


def meter_budget_b8() -> BudgetConstraint:
    """The defensive budget sweep used in the case study: radix 3, budget 8."""
    return BudgetConstraint(bases=METER_BASE_PERIODS, radix=3, budget=8)
