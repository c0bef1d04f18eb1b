"""Graphviz views: the attack model and the built location graph."""

from __future__ import annotations

from .model import AmgModel
from .state_space import Ptmdp

_REF_MARK = {"and": "AND", "or": "OR"}


def model_to_dot(model: AmgModel) -> str:
    """Attack DAG rendering: subgoals boxed, attacks octagonal, defenses dashed."""
    lines = ["digraph attack_model {", "  rankdir=TB;", '  node [fontname="Helvetica"];']
    for g in sorted(model.refinements):
        mark = _REF_MARK[model.refinements[g].value]
        shape = "box"
        extra = " penwidth=2" if g == model.root else ""
        lines.append(f'  "{g}" [shape={shape} label="{g}\\n[{mark}]"{extra}];')
    for a in sorted(model.attacks):
        at = model.attacks[a]
        label = f"{a}\\nt={at.completion_time} p={float(at.success_prob):g}"
        lines.append(f'  "{a}" [shape=octagon label="{label}"];')
    for d in sorted(model.defenses):
        dd = model.defenses[d]
        label = f"{d}\\nt={dd.period} p={float(dd.success_prob):g}"
        lines.append(f'  "{d}" [shape=diamond style=dashed label="{label}"];')
    for parent, child in model.edges:
        lines.append(f'  "{parent}" -> "{child}";')
    for d in sorted(model.defenses):
        for n in sorted(model.defenses[d].defends):
            lines.append(f'  "{d}" -> "{n}" [style=dashed dir=none];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def ptmdp_to_dot(ptmdp: Ptmdp, max_locations: int = 2000) -> str:
    """Location graph rendering with canonical (activated | completed) labels."""
    if len(ptmdp.locations) > max_locations:
        raise ValueError(
            f"location graph has {len(ptmdp.locations)} locations; cap is {max_locations}"
        )
    lines = ["digraph location_graph {", "  rankdir=LR;", '  node [fontname="Helvetica" shape=ellipse];']
    for i, loc in enumerate(ptmdp.locations):
        label = "{%s | %s}" % (",".join(loc.activated) or "-", ",".join(loc.completed) or "-")
        extra = ""
        if loc == ptmdp.initial:
            extra = " penwidth=2"
        if loc == ptmdp.goal:
            extra = " shape=doublecircle"
        rate = ptmdp.cost_rate(loc)
        rate_part = f"\\nrate={rate}" if rate else ""
        lines.append(f'  n{i} [label="{label}{rate_part}"{extra}];')
    for i, loc in enumerate(ptmdp.locations):
        for tr in ptmdp.outgoing(loc):
            j = ptmdp.index[tr.target]
            style = "" if tr.label.controllable else " style=dashed"
            cost = f" +{tr.cost}" if tr.cost else ""
            lines.append(f'  n{i} -> n{j} [label="{tr.label}{cost}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
