"""Textual attacker strategies: builtins and first-match rule files.

A rule file is JSON:

    {
      "rules": [
        {"if": {"completed": ["g_ac"], "not_activated": ["a_fue"]},
         "activate": ["a_fue"]}
      ],
      "default": ["a_ss"]
    }

Patterns test membership of node ids in the activated/completed sets; the
first matching rule wins, otherwise the default applies.  The returned set is
always clipped to the currently available activations.
"""

from __future__ import annotations

import json
from typing import Any

from . import ops
from .engine import GreedyAllStrategy, NeverStrategy
from .model import AmgModel, AttackState
from .state_space import ClockValuation

BUILTIN_STRATEGIES = ("greedy-all", "none")

_PATTERN_KEYS = {"activated", "not_activated", "completed", "not_completed"}


class StrategyFormatError(ValueError):
    pass


class _Rule:
    def __init__(self, pattern: dict[str, frozenset[str]], activate: frozenset[str]):
        self.pattern = pattern
        self.activate = activate

    def matches(self, state: AttackState) -> bool:
        a, c = state.activated_set, state.completed_set
        pat = self.pattern
        return (
            pat.get("activated", frozenset()) <= a
            and not (pat.get("not_activated", frozenset()) & a)
            and pat.get("completed", frozenset()) <= c
            and not (pat.get("not_completed", frozenset()) & c)
        )


class RuleStrategy:
    """Deterministic memoryless strategy from an ordered rule list."""

    def __init__(self, model: AmgModel, rules: list[_Rule], default: frozenset[str]):
        self._model = model
        self._rules = rules
        self._default = default

    def decide(self, state: AttackState, clocks: ClockValuation) -> frozenset[str]:
        for rule in self._rules:
            if rule.matches(state):
                chosen = rule.activate
                break
        else:
            chosen = self._default
        return chosen & ops.available_activations(self._model, state)


def _id_list(value: Any, where: str, allowed: frozenset[str]) -> frozenset[str]:
    if not isinstance(value, list) or not all(isinstance(x, str) for x in value):
        raise StrategyFormatError(f"{where}: expected a list of id strings")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise StrategyFormatError(f"{where}: unknown ids {unknown}")
    return frozenset(value)


def loads_strategy(text: str, model: AmgModel) -> RuleStrategy:
    doc = json.loads(text)
    if not isinstance(doc, dict) or not set(doc) <= {"rules", "default"}:
        raise StrategyFormatError("strategy file must be an object with 'rules' and/or 'default'")
    node_ids = frozenset(model.nodes)
    attack_ids = frozenset(model.attacks)
    rules: list[_Rule] = []
    for i, rule_doc in enumerate(doc.get("rules", [])):
        where = f"rules[{i}]"
        if not isinstance(rule_doc, dict) or not set(rule_doc) <= {"if", "activate"}:
            raise StrategyFormatError(f"{where}: expected keys 'if' and 'activate'")
        pat_doc = rule_doc.get("if", {})
        if not isinstance(pat_doc, dict) or not set(pat_doc) <= _PATTERN_KEYS:
            raise StrategyFormatError(f"{where}.if: allowed keys are {sorted(_PATTERN_KEYS)}")
        pattern = {
            key: _id_list(val, f"{where}.if.{key}", node_ids) for key, val in pat_doc.items()
        }
        activate = _id_list(rule_doc.get("activate", []), f"{where}.activate", attack_ids)
        rules.append(_Rule(pattern, activate))
    default = _id_list(doc.get("default", []), "default", attack_ids)
    return RuleStrategy(model, rules, default)


def load_strategy(name_or_path: str, model: AmgModel):
    """Resolve a builtin name or load a rule file."""
    if name_or_path == "greedy-all":
        return GreedyAllStrategy(model)
    if name_or_path == "none":
        return NeverStrategy()
    try:
        with open(name_or_path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise StrategyFormatError(
            f"unknown strategy {name_or_path!r}: not a builtin "
            f"({', '.join(BUILTIN_STRATEGIES)}) and not a readable file"
        ) from None
    return loads_strategy(text, model)
