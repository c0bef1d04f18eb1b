"""Table-compiled Monte Carlo kernel for location-table strategies.

The explicit location graph is flattened into integer arrays so a whole run
is a tight loop over scalar state: location index, per-attack absolute
deadlines, per-defense next firing times.  Semantics mirror ``engine``
exactly (consultation points, follower suppression, uniform tie-breaks,
horizon handling); only the random number generator differs, so agreement
with the generic engine is statistical, not bit-level.

The kernel compiles with numba when available and otherwise runs as plain
Python with identical results.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np

from .engine import EvalStats, stats_from_outcomes
from .model import AmgModel, AttackState
from .state_space import Ptmdp

try:  # pragma: no cover - exercised implicitly
    from numba import njit as _njit

    def _jit(f):
        return _njit(cache=True, nogil=True)(f)

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    def _jit(f):
        return f

    HAVE_NUMBA = False

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_FAR = np.int64(2**62)


@dataclass
class SimTables:
    """Flattened location graph plus attribute arrays for the kernel."""

    model: AmgModel
    locations: tuple[AttackState, ...]
    attack_ids: tuple[str, ...]
    defense_ids: tuple[str, ...]
    init_idx: int
    goal_idx: int
    att_t: np.ndarray
    att_p: np.ndarray
    att_c: np.ndarray
    def_t: np.ndarray
    def_p: np.ndarray
    rate: np.ndarray
    active_mask: np.ndarray
    avail_mask: np.ndarray
    act_target: np.ndarray
    cmp_succ: np.ndarray
    cmp_fail: np.ndarray
    mtd_succ: np.ndarray
    follow_mask: np.ndarray

    def policy_mask(self, by_location: Mapping[AttackState, frozenset[str]]) -> np.ndarray:
        """Activation bitmask per location for a location-table policy."""
        aidx = {a: i for i, a in enumerate(self.attack_ids)}
        mask = np.zeros(len(self.locations), dtype=np.int64)
        for loc, wanted in by_location.items():
            i = self.loc_index.get(loc)
            if i is None:
                continue
            m = 0
            for a in wanted:
                m |= 1 << aidx[a]
            mask[i] = m
        return mask

    @property
    def loc_index(self) -> dict[AttackState, int]:
        if not hasattr(self, "_loc_index"):
            self._loc_index = {loc: i for i, loc in enumerate(self.locations)}
        return self._loc_index


def compile_tables(ptmdp: Ptmdp) -> SimTables:
    model = ptmdp.model
    attack_ids = model.attack_ids
    defense_ids = model.defense_ids
    if len(attack_ids) > 62:
        raise ValueError("fast kernel supports at most 62 attacks")
    aidx = {a: i for i, a in enumerate(attack_ids)}
    locs = ptmdp.locations
    lidx = ptmdp.index
    n_loc, n_att, n_def = len(locs), len(attack_ids), len(defense_ids)

    att_t = np.array([model.attacks[a].completion_time for a in attack_ids], dtype=np.int64)
    att_p = np.array([float(model.attacks[a].success_prob) for a in attack_ids])
    att_c = np.array([model.attacks[a].activation_cost for a in attack_ids], dtype=np.int64)
    def_t = np.array([model.defenses[d].period for d in defense_ids], dtype=np.int64)
    def_p = np.array([float(model.defenses[d].success_prob) for d in defense_ids])

    rate = np.zeros(n_loc, dtype=np.int64)
    active_mask = np.zeros(n_loc, dtype=np.int64)
    avail_mask = np.zeros(n_loc, dtype=np.int64)
    act_target = np.full((n_loc, n_att), -1, dtype=np.int32)
    cmp_succ = np.full((n_loc, n_att), -1, dtype=np.int32)
    cmp_fail = np.full((n_loc, n_att), -1, dtype=np.int32)
    mtd_succ = np.full((n_loc, max(1, n_def)), -1, dtype=np.int32)

    from .state_space import ActionKind

    for i, loc in enumerate(locs):
        rate[i] = ptmdp.cost_rate(loc)
        for a in loc.activated:
            active_mask[i] |= 1 << aidx[a]
        for tr in ptmdp.outgoing(loc):
            j = lidx[tr.target]
            k = tr.label.kind
            if k is ActionKind.ACTIVATE:
                ai = aidx[tr.label.subject]
                act_target[i, ai] = j
                avail_mask[i] |= 1 << ai
            elif k is ActionKind.COMPLETE_SUCCESS:
                cmp_succ[i, aidx[tr.label.subject]] = j
            elif k is ActionKind.COMPLETE_FAIL:
                cmp_fail[i, aidx[tr.label.subject]] = j
            elif k is ActionKind.DEFENSE_SUCCESS:
                mtd_succ[i, defense_ids.index(tr.label.subject)] = j

    follow_mask = np.zeros(max(1, n_def), dtype=np.int64)
    for di, d in enumerate(defense_ids):
        for d2 in ptmdp.model.followers[d]:
            follow_mask[di] |= 1 << defense_ids.index(d2)

    return SimTables(
        model=model,
        locations=locs,
        attack_ids=attack_ids,
        defense_ids=defense_ids,
        init_idx=lidx[ptmdp.initial],
        goal_idx=lidx[ptmdp.goal],
        att_t=att_t,
        att_p=att_p,
        att_c=att_c,
        def_t=def_t,
        def_p=def_p,
        rate=rate,
        active_mask=active_mask,
        avail_mask=avail_mask,
        act_target=act_target,
        cmp_succ=cmp_succ,
        cmp_fail=cmp_fail,
        mtd_succ=mtd_succ,
        follow_mask=follow_mask,
    )


def _kernel(
    n_runs,
    master_seed,
    horizon,
    init_idx,
    goal_idx,
    att_t,
    att_p,
    att_c,
    def_t,
    def_p,
    rate,
    active_mask,
    avail_mask,
    act_target,
    cmp_succ,
    cmp_fail,
    mtd_succ,
    follow_mask,
    policy_mask,
    out_reached,
    out_time,
    out_cost,
):
    n_att = att_t.shape[0]
    n_def = def_t.shape[0]
    far = np.int64(2**62)
    golden = _U64(0x9E3779B97F4A7C15)
    mix1 = _U64(0xBF58476D1CE4E5B9)
    mix2 = _U64(0x94D049BB133111EB)
    inv53 = 1.0 / 9007199254740992.0  # 2**-53

    for run in range(n_runs):
        # splitmix64 stream seeded from (master_seed, run)
        s = (_U64(master_seed) + _U64(run + 1) * golden)

        loc = init_idx
        t = np.int64(0)
        cost = np.int64(0)
        att_deadline = np.full(n_att, far, dtype=np.int64)
        def_next = def_t.copy()

        reached = False
        # initial consultation, then the event loop
        for _consult in range(2 * n_att + 2):
            m = policy_mask[loc] & avail_mask[loc]
            if m == 0:
                break
            for a in range(n_att):
                if (m >> a) & 1:
                    cost += att_c[a]
                    att_deadline[a] = t + att_t[a]
                    loc = act_target[loc, a]

        while True:
            tn = far
            for a in range(n_att):
                if att_deadline[a] < tn:
                    tn = att_deadline[a]
            for d in range(n_def):
                if def_next[d] < tn:
                    tn = def_next[d]
            if tn >= far:
                break
            if tn > horizon:
                break
            if tn > t:
                cost += (tn - t) * rate[loc]
                t = tn

            # due events: attacks then unsuppressed defenses
            due_def_bits = np.int64(0)
            for d in range(n_def):
                if def_next[d] == t:
                    due_def_bits |= np.int64(1) << d
            k = 0
            for a in range(n_att):
                if att_deadline[a] == t:
                    k += 1
            kept_bits = np.int64(0)
            for d in range(n_def):
                if (due_def_bits >> d) & 1:
                    if (follow_mask[d] & due_def_bits) == 0:
                        kept_bits |= np.int64(1) << d
                        k += 1
            # uniform pick among the k due events
            s += golden
            z = s
            z = (z ^ (z >> _U64(30))) * mix1
            z = (z ^ (z >> _U64(27))) * mix2
            z = z ^ (z >> _U64(31))
            pick = np.int64(z % _U64(k))
            s += golden
            z = s
            z = (z ^ (z >> _U64(30))) * mix1
            z = (z ^ (z >> _U64(27))) * mix2
            z = z ^ (z >> _U64(31))
            u = np.float64(z >> _U64(11)) * inv53

            idx = np.int64(-1)
            is_attack = True
            c = np.int64(0)
            for a in range(n_att):
                if att_deadline[a] == t:
                    if c == pick:
                        idx = a
                        is_attack = True
                        break
                    c += 1
            if idx < 0:
                for d in range(n_def):
                    if (kept_bits >> d) & 1:
                        if c == pick:
                            idx = d
                            is_attack = False
                            break
                        c += 1

            new_loc = loc
            if is_attack:
                att_deadline[idx] = far
                if u < att_p[idx]:
                    new_loc = cmp_succ[loc, idx]
                else:
                    new_loc = cmp_fail[loc, idx]
            else:
                def_next[idx] += def_t[idx]
                if u < def_p[idx]:
                    new_loc = mtd_succ[loc, idx]
            if new_loc != loc:
                dropped = active_mask[loc] & ~active_mask[new_loc]
                if dropped != 0:
                    for a in range(n_att):
                        if (dropped >> a) & 1:
                            att_deadline[a] = far
                loc = new_loc
            if loc == goal_idx:
                reached = True
                break

            for _consult in range(2 * n_att + 2):
                m = policy_mask[loc] & avail_mask[loc]
                if m == 0:
                    break
                for a in range(n_att):
                    if (m >> a) & 1:
                        cost += att_c[a]
                        att_deadline[a] = t + att_t[a]
                        loc = act_target[loc, a]

        if reached:
            out_reached[run] = 1
            out_time[run] = t
            out_cost[run] = cost
        else:
            out_reached[run] = 0
            out_time[run] = 0
            out_cost[run] = 0


_kernel_jit = _jit(_kernel)


def run_batch(
    tables: SimTables,
    policy_mask: np.ndarray,
    n_runs: int,
    master_seed: int,
    horizon: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Simulate n_runs seeded runs; returns (reached, time, cost) arrays."""
    out_reached = np.zeros(n_runs, dtype=np.uint8)
    out_time = np.zeros(n_runs, dtype=np.int64)
    out_cost = np.zeros(n_runs, dtype=np.int64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # uint64 wraparound is intended
        _kernel_jit(
            n_runs,
            np.int64(master_seed & (2**63 - 1)),
            np.int64(horizon),
            np.int64(tables.init_idx),
            np.int64(tables.goal_idx),
            tables.att_t,
            tables.att_p,
            tables.att_c,
            tables.def_t,
            tables.def_p,
            tables.rate,
            tables.active_mask,
            tables.avail_mask,
            tables.act_target,
            tables.cmp_succ,
            tables.cmp_fail,
            tables.mtd_succ,
            tables.follow_mask,
            policy_mask,
            out_reached,
            out_time,
            out_cost,
        )
    return out_reached, out_time, out_cost


def fast_evaluate(
    tables: SimTables,
    by_location: Mapping[AttackState, frozenset[str]],
    n_runs: int,
    master_seed: int,
    horizon: int,
    c_max: Optional[int] = None,
) -> EvalStats:
    """EvalStats for a location-table policy using the compiled kernel."""
    mask = tables.policy_mask(by_location)
    reached, times, costs = run_batch(tables, mask, n_runs, master_seed, horizon)
    outcomes = [
        (bool(reached[i]), int(times[i]), int(costs[i])) for i in range(n_runs)
    ]
    return stats_from_outcomes(outcomes, horizon, c_max)
