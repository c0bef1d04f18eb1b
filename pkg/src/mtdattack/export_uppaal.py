"""Uppaal Stratego 4.x export of the built location graph.

The tool's strategy space is limited to memoryless non-lazy controllers and
its hybrid cost clock cannot be incremented on edges, so the export differs
from the native semantics in four deliberate ways:

1. every location gets a NO_ACTIVATION twin reached by an explicit
   "activate nothing" edge, and all environment edges leave from the twin;
2. a nonzero activation cost is charged by holding an intermediate
   ACTIVATION_COST location for exactly one time unit (clock ``xcost``,
   invariant ``xcost <= 1``, guard ``xcost >= 1``) whose cost rate is the
   activation cost while every other clock rate is frozen at zero — the
   native engine charges the cost instantaneously instead;
3. environment edges carry their deadline guards (``x_d >= t_d`` or
   ``x_a >= t_a``) and split on a branchpoint weighted p : 1-p;
4. a defense edge additionally requires ``x_d2 < t_d2`` for every defense d2
   that follows it, forcing followers to resolve first.
"""

from __future__ import annotations

from fractions import Fraction
from xml.sax.saxutils import escape

from . import ops
from .model import AmgModel, AttackState
from .state_space import Ptmdp

_HEADER = (
    '<?xml version="1.0" encoding="utf-8"?>\n'
    "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
    "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_1.dtd'>\n"
)


def _loc_name(state: AttackState, type_part: str) -> str:
    return f"{'_'.join(state.activated)}__{'_'.join(state.completed)}__{type_part}"


def _prob_weights(p: Fraction) -> tuple[int, int]:
    return p.numerator, p.denominator - p.numerator


class _Doc:
    def __init__(self) -> None:
        self.parts: list[str] = []
        self._ids = 0

    def fresh_id(self) -> str:
        self._ids += 1
        return f"id{self._ids - 1}"

    def add(self, text: str) -> None:
        self.parts.append(text)


def export_uppaal(ptmdp: Ptmdp, max_locations: int = 2000) -> str:
    """Render the location graph as an Uppaal Stratego XML document."""
    if len(ptmdp.locations) > max_locations:
        raise ValueError(
            f"location graph has {len(ptmdp.locations)} locations; cap is {max_locations}"
        )
    model = ptmdp.model
    doc = _Doc()

    clock_decls = ["hybrid clock cost;", "clock xcost;", "clock x0;"]
    clock_decls += [f"clock x_{a};" for a in model.attack_ids]
    clock_decls += [f"clock x_{d};" for d in model.defense_ids]
    declaration = (
        "// Exported from the attack/MTD model.\n"
        "// Activation costs are charged by a one-time-unit stay in an\n"
        "// ACTIVATION_COST location (hybrid clocks cannot be incremented on\n"
        "// edges); the native engine charges them instantaneously, so cost\n"
        "// traces differ by that bookkeeping time unit per costly activation.\n"
        + "\n".join(clock_decls)
    )

    # Location ids and coordinates, deterministic in ptmdp order.
    loc_id: dict[str, str] = {}
    loc_xml: list[str] = []
    col = {}

    def add_location(name: str, invariant: str, x: int, y: int) -> str:
        lid = doc.fresh_id()
        loc_id[name] = lid
        inv = (
            f'\n      <label kind="invariant" x="{x}" y="{y + 18}">{escape(invariant)}</label>'
            if invariant
            else ""
        )
        loc_xml.append(
            f'    <location id="{lid}" x="{x}" y="{y}">\n'
            f'      <name x="{x}" y="{y - 28}">{escape(name)}</name>{inv}\n'
            "    </location>"
        )
        return lid

    def invariant_of(state: AttackState) -> str:
        parts = [f"x_{a} <= {model.attacks[a].completion_time}" for a in state.activated]
        parts += [f"x_{d} <= {model.defenses[d].period}" for d in model.defense_ids]
        return " && ".join(parts)

    for i, state in enumerate(ptmdp.locations):
        col[state] = i
        x = 400 * i
        inv = invariant_of(state)
        add_location(_loc_name(state, "NORMAL"), inv, x, 0)
        add_location(_loc_name(state, "NO_ACTIVATION"), inv, x, 200)
        k = 0
        for a in sorted(ops.available_activations(model, state)):
            if model.attacks[a].activation_cost != 0:
                freeze = ["x0' == 0"]
                freeze += [f"x_{b}' == 0" for b in model.attack_ids]
                freeze += [f"x_{d}' == 0" for d in model.defense_ids]
                inv_cost = f"xcost <= 1 && cost' == {model.attacks[a].activation_cost} && " + \
                    " && ".join(freeze)
                add_location(_loc_name(state, f"ACTIVATION_COST_{a}"), inv_cost, x, -200 - 150 * k)
                k += 1

    branch_xml: list[str] = []
    trans_xml: list[str] = []

    def add_branchpoint(x: int, y: int) -> str:
        bid = doc.fresh_id()
        branch_xml.append(f'    <branchpoint id="{bid}" x="{x}" y="{y}"/>')
        return bid

    def add_transition(
        source: str,
        target: str,
        guard: str = "",
        assignment: str = "",
        weight: int | None = None,
        controllable: bool = True,
        x: int = 0,
        y: int = 0,
    ) -> None:
        attrs = "" if controllable else ' controllable="false"'
        labels = ""
        if guard:
            labels += f'\n      <label kind="guard" x="{x}" y="{y}">{escape(guard)}</label>'
        if weight is not None:
            labels += (
                f'\n      <label kind="probability" x="{x}" y="{y + 18}">{weight}</label>'
            )
        if assignment:
            labels += (
                f'\n      <label kind="assignment" x="{x}" y="{y + 36}">{escape(assignment)}</label>'
            )
        trans_xml.append(
            f'    <transition{attrs}>\n'
            f'      <source ref="{loc_id.get(source, source)}"/>\n'
            f'      <target ref="{loc_id.get(target, target)}"/>{labels}\n'
            "    </transition>"
        )

    for state in ptmdp.locations:
        x = 400 * col[state]
        normal = _loc_name(state, "NORMAL")
        noact = _loc_name(state, "NO_ACTIVATION")

        # Attacker activations; zero-cost ones skip the cost location.
        for a in sorted(ops.available_activations(model, state)):
            target = ops.simple_state(model, state.activated_set | {a}, state.completed_set)
            target_normal = _loc_name(target, "NORMAL")
            if model.attacks[a].activation_cost == 0:
                add_transition(normal, target_normal, assignment=f"x_{a} = 0", x=x, y=-40)
            else:
                cost_loc = _loc_name(state, f"ACTIVATION_COST_{a}")
                add_transition(normal, cost_loc, assignment="xcost = 0", x=x, y=-60)
                add_transition(
                    cost_loc, target_normal, guard="xcost >= 1",
                    assignment=f"x_{a} = 0", x=x, y=-80,
                )
        # The explicit "no more activations" move.
        add_transition(normal, noact, x=x, y=100)

        # Defense firings, followers constrained to resolve first.
        for d in model.defense_ids:
            dd = model.defenses[d]
            guard = f"x_{d} >= {dd.period}"
            for d2 in sorted(model.followers[d]):
                guard += f" && x_{d2} < {model.defenses[d2].period}"
            succ = ops.apply_defense(model, state, d)
            succ_normal = _loc_name(succ, "NORMAL")
            w_succ, w_fail = _prob_weights(dd.success_prob)
            if w_fail == 0:
                add_transition(noact, succ_normal, guard=guard, assignment=f"x_{d} = 0",
                               controllable=False, x=x, y=260)
            elif w_succ == 0:
                add_transition(noact, normal, guard=guard, assignment=f"x_{d} = 0",
                               controllable=False, x=x, y=260)
            else:
                bp = add_branchpoint(x, 320)
                add_transition(noact, bp, guard=guard, controllable=False, x=x, y=260)
                add_transition(bp, succ_normal, assignment=f"x_{d} = 0", weight=w_succ,
                               controllable=False, x=x, y=340)
                add_transition(bp, normal, assignment=f"x_{d} = 0", weight=w_fail,
                               controllable=False, x=x, y=360)

        # Attack completions.
        for a in state.activated:
            at = model.attacks[a]
            guard = f"x_{a} >= {at.completion_time}"
            succ = ops.apply_completion(model, state, a, success=True)
            fail = ops.apply_completion(model, state, a, success=False)
            w_succ, w_fail = _prob_weights(at.success_prob)
            if w_fail == 0:
                add_transition(noact, _loc_name(succ, "NORMAL"), guard=guard,
                               assignment=f"x_{a} = 0", controllable=False, x=x, y=400)
            elif w_succ == 0:
                add_transition(noact, _loc_name(fail, "NORMAL"), guard=guard,
                               assignment=f"x_{a} = 0", controllable=False, x=x, y=400)
            else:
                bp = add_branchpoint(x, 440)
                add_transition(noact, bp, guard=guard, controllable=False, x=x, y=400)
                add_transition(bp, _loc_name(succ, "NORMAL"), assignment=f"x_{a} = 0",
                               weight=w_succ, controllable=False, x=x, y=460)
                add_transition(bp, _loc_name(fail, "NORMAL"), assignment=f"x_{a} = 0",
                               weight=w_fail, controllable=False, x=x, y=480)

    init_id = loc_id[_loc_name(ptmdp.initial, "NORMAL")]
    body = [
        _HEADER + "<nta>",
        f"  <declaration>{escape(declaration)}</declaration>",
        "  <template>",
        '    <name x="0" y="-60">Attacker</name>',
        *loc_xml,
        *branch_xml,
        f'    <init ref="{init_id}"/>',
        *trans_xml,
        "  </template>",
        "  <system>Process = Attacker();\nsystem Process;</system>",
        "  <queries/>",
        "</nta>",
    ]
    return "\n".join(body) + "\n"


def export_uppaal_model(model: AmgModel, limit_states: int = 2000) -> str:
    from .state_space import build_ptmdp

    return export_uppaal(build_ptmdp(model, limit_states), max_locations=limit_states)
