"""Tiny shared helpers for shell-level tests."""

import json


def two_defense_cycle_text() -> str:
    """Model document whose defenses follow each other cyclically."""
    return json.dumps(
        {
            "nodes": [
                {"id": "g_0", "kind": "subgoal", "refinement": "or"},
                {"id": "g1", "kind": "subgoal", "refinement": "or"},
                {"id": "g2", "kind": "subgoal", "refinement": "or"},
                {"id": "a_1", "kind": "attack", "t": 2, "p": 0.5},
                {"id": "a_2", "kind": "attack", "t": 2, "p": 0.5},
            ],
            "edges": [["g_0", "g1"], ["g_0", "g2"], ["g1", "a_1"], ["g2", "a_2"]],
            "root": "g_0",
            "defenses": [
                {"id": "d1", "t": 3, "p": 1, "defends": ["g1", "a_2"]},
                {"id": "d2", "t": 3, "p": 1, "defends": ["g2", "a_1"]},
            ],
        }
    )
