"""JSON model files (.amg.json): strict schema, exact decimal probabilities.

Schema (UTF-8 JSON):

    {
      "nodes": [
        {"id": "g_0", "kind": "subgoal", "refinement": "or"},
        {"id": "a_0", "kind": "attack", "t": 20, "p": 1, "c": 10, "cp": 0}
      ],
      "edges": [["g_0", "a_0"]],
      "root": "g_0",
      "defenses": [{"id": "d_0", "t": 10, "p": 1, "defends": ["a_0"]}]
    }

Probabilities are decimal numbers parsed exactly (0.3 means 3/10); times and
costs must be integers.  Unknown keys are rejected with their JSON path.
Parse -> serialize -> parse is the identity on valid files.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .model import AmgModel, AtomicAttack, Defense, Refinement

MODEL_FILE_EXTENSION = ".amg.json"

_TOP_KEYS = {"nodes", "edges", "root", "defenses"}
_SUBGOAL_KEYS = {"id", "kind", "refinement"}
_ATTACK_KEYS = {"id", "kind", "t", "p", "c", "cp"}
_DEFENSE_KEYS = {"id", "t", "p", "defends"}


class ModelFormatError(ValueError):
    """Structural problem in a model document; carries the JSON path."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _require(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise ModelFormatError(where, message)


def _expect_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelFormatError(where, f"expected an integer, got {value!r}")
    return value


def _expect_prob(value: Any, where: str) -> Fraction:
    if isinstance(value, bool):
        raise ModelFormatError(where, f"expected a probability, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Fraction):
        return value
    raise ModelFormatError(where, f"expected a decimal probability, got {value!r}")


def _expect_str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise ModelFormatError(where, f"expected a string, got {value!r}")
    return value


def loads_model(text: str) -> AmgModel:
    """Parse a model document; raises json.JSONDecodeError or ModelFormatError."""
    doc = json.loads(text, parse_float=Fraction)
    _require(isinstance(doc, dict), "$", "top level must be an object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    _require(not unknown, "$", f"unknown keys: {unknown}")
    for key in ("nodes", "edges", "root"):
        _require(key in doc, "$", f"missing required key {key!r}")

    refinements: dict[str, Refinement] = {}
    attacks: dict[str, AtomicAttack] = {}
    seen_ids: set[str] = set()

    nodes = doc["nodes"]
    _require(isinstance(nodes, list), "$.nodes", "must be a list")
    for i, node in enumerate(nodes):
        where = f"$.nodes[{i}]"
        _require(isinstance(node, dict), where, "must be an object")
        nid = _expect_str(node.get("id"), f"{where}.id")
        _require(nid not in seen_ids, f"{where}.id", f"duplicate node id {nid!r}")
        seen_ids.add(nid)
        kind = _expect_str(node.get("kind"), f"{where}.kind")
        if kind == "subgoal":
            unknown = sorted(set(node) - _SUBGOAL_KEYS)
            _require(not unknown, where, f"unknown keys for subgoal: {unknown}")
            ref = _expect_str(node.get("refinement"), f"{where}.refinement")
            _require(ref in ("and", "or"), f"{where}.refinement", "must be 'and' or 'or'")
            refinements[nid] = Refinement(ref)
        elif kind == "attack":
            unknown = sorted(set(node) - _ATTACK_KEYS)
            _require(not unknown, where, f"unknown keys for attack: {unknown}")
            _require("t" in node, where, "attack requires completion time 't'")
            _require("p" in node, where, "attack requires success probability 'p'")
            attacks[nid] = AtomicAttack(
                completion_time=_expect_int(node["t"], f"{where}.t"),
                success_prob=_expect_prob(node["p"], f"{where}.p"),
                activation_cost=_expect_int(node.get("c", 0), f"{where}.c"),
                cost_rate=_expect_int(node.get("cp", 0), f"{where}.cp"),
            )
        else:
            raise ModelFormatError(f"{where}.kind", f"must be 'subgoal' or 'attack', got {kind!r}")

    edges_doc = doc["edges"]
    _require(isinstance(edges_doc, list), "$.edges", "must be a list")
    edges: list[tuple[str, str]] = []
    for i, e in enumerate(edges_doc):
        where = f"$.edges[{i}]"
        _require(isinstance(e, list) and len(e) == 2, where, "must be a [parent, child] pair")
        edges.append((_expect_str(e[0], f"{where}[0]"), _expect_str(e[1], f"{where}[1]")))

    root = _expect_str(doc["root"], "$.root")

    defenses: dict[str, Defense] = {}
    for i, d in enumerate(doc.get("defenses", [])):
        where = f"$.defenses[{i}]"
        _require(isinstance(d, dict), where, "must be an object")
        unknown = sorted(set(d) - _DEFENSE_KEYS)
        _require(not unknown, where, f"unknown keys for defense: {unknown}")
        did = _expect_str(d.get("id"), f"{where}.id")
        _require(did not in defenses and did not in seen_ids, f"{where}.id", f"duplicate id {did!r}")
        for key in ("t", "p", "defends"):
            _require(key in d, where, f"defense requires {key!r}")
        defends = d["defends"]
        _require(isinstance(defends, list), f"{where}.defends", "must be a list of node ids")
        defenses[did] = Defense(
            period=_expect_int(d["t"], f"{where}.t"),
            success_prob=_expect_prob(d["p"], f"{where}.p"),
            defends=frozenset(_expect_str(n, f"{where}.defends[{k}]") for k, n in enumerate(defends)),
        )

    return AmgModel(root=root, edges=tuple(edges), refinements=refinements,
                    attacks=attacks, defenses=defenses)


def load_model(path: str) -> AmgModel:
    with open(path, encoding="utf-8") as fh:
        return loads_model(fh.read())


def _prob_str(p: Fraction) -> str:
    """Exact decimal rendering when the denominator is 2^a * 5^b."""
    num, den = p.numerator, p.denominator
    if den == 1:
        return str(num)
    d, twos, fives = den, 0, 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:  # not a finite decimal; nearest float repr (documented lossy case)
        return repr(float(p))
    k = max(twos, fives)
    scaled = num * 10**k // den
    text = str(scaled).rjust(k + 1, "0")
    return f"{text[:-k]}.{text[-k:]}"


def dumps_model(model: AmgModel) -> str:
    """Deterministic serialization: sorted nodes/defenses, exact decimals."""
    lines: list[str] = ["{", '  "nodes": [']
    node_rows = []
    for g in sorted(model.refinements):
        node_rows.append(
            f'    {{"id": {json.dumps(g)}, "kind": "subgoal", '
            f'"refinement": {json.dumps(model.refinements[g].value)}}}'
        )
    for a in sorted(model.attacks):
        at = model.attacks[a]
        node_rows.append(
            f'    {{"id": {json.dumps(a)}, "kind": "attack", "t": {at.completion_time}, '
            f'"p": {_prob_str(at.success_prob)}, "c": {at.activation_cost}, "cp": {at.cost_rate}}}'
        )
    lines.append(",\n".join(node_rows))
    lines.append("  ],")
    lines.append('  "edges": [')
    edge_rows = [f"    [{json.dumps(p)}, {json.dumps(c)}]" for p, c in model.edges]
    lines.append(",\n".join(edge_rows))
    lines.append("  ],")
    lines.append(f'  "root": {json.dumps(model.root)},')
    lines.append('  "defenses": [')
    defense_rows = []
    for did in sorted(model.defenses):
        d = model.defenses[did]
        defends = ", ".join(json.dumps(n) for n in sorted(d.defends))
        defense_rows.append(
            f'    {{"id": {json.dumps(did)}, "t": {d.period}, "p": {_prob_str(d.success_prob)}, '
            f'"defends": [{defends}]}}'
        )
    lines.append(",\n".join(defense_rows))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_model(model: AmgModel, path: str) -> None:
    from .shellio import atomic_write

    atomic_write(path, dumps_model(model))
