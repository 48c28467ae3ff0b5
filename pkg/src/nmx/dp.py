"""Worst-case dynamic program over the last subsystem's information states.

The decision variable at each step is the complete action: prescriptions
telling every better-informed subsystem how to turn its information states
into a partial action, plus the deciding subsystem's own partial action. The
backup is

    V_t(P) = min over complete actions of
             max over realizable new information of V_{t+1}(successor),

with V_T the worst member's terminal cost. Complete actions are enumerated
per connected component of the choice-point graph: choices whose members can
never share an observation realization influence disjoint fibers, so the
min-max splits exactly across components. That split is what keeps the
desk-scale examples enumerable; a raw cross product over all points is
astronomically larger.

Ties in the min are broken by the lexicographically smallest canonical
encoding (prescription points in canonical order, then the own partial
action), applied per component after the global optimum is known.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import ResourceLimitError
from .infostate import (
    CompleteAction,
    InfoState,
    Workspace,
    curried_action,
    decision_components,
    evolve_infostate,
    encode_infostate,
    feasible_new_information,
    initial_infostate,
    materialize_action,
    observation_read_points,
)
from .model import (
    InfoStructure,
    ModelError,
    Strategy,
    SystemModel,
    enumerate_primitives,
    simulate,
    validate,
)
from .nested import HatModel, build_hat_model


@dataclass
class Caps:
    """Enumeration limits; defaults sized so the pursuit example passes."""

    max_infostates: int = 2_000_000
    max_candidates: int = 5_000_000
    max_profiles: int = 2_000_000
    max_augmented: int = 100_000

    @classmethod
    def from_env(cls) -> "Caps":
        def get(name, default):
            raw = os.environ.get(name)
            return int(raw) if raw else default

        base = cls()
        return cls(
            max_infostates=get("NMX_MAX_INFOSTATES", base.max_infostates),
            max_candidates=get("NMX_MAX_CANDIDATES", base.max_candidates),
            max_profiles=get("NMX_MAX_PROFILES", base.max_profiles),
            max_augmented=get("NMX_MAX_AUGMENTED", base.max_augmented),
        )


def terminal_value(ws: Workspace, state: InfoState) -> Fraction:
    """Worst terminal cost over the realization's members."""
    if not state.members:
        raise ModelError("empty information state")
    return max(ws.hm.terminal_cost(ws.hat_val(m[0])) for m in state.members)


def feasible_observations(ws: Workspace, state: InfoState, theta: CompleteAction):
    """New-information values realizable under a complete action."""
    return feasible_new_information(ws, ws.model.num_subsystems, state, theta, ())


class Solver:
    """Memoized top-down realization of the backup recursion."""

    def __init__(self, ws: Workspace, caps: Caps):
        self.ws = ws
        self.caps = caps
        self.horizon = ws.model.horizon
        self.level = ws.model.num_subsystems
        self.table: dict = {}  # (t, uid) -> (value, CompleteAction | None)
        self.candidates = 0
        self.backups = 0

    def value(self, t: int, state: InfoState) -> Fraction:
        key = (t, state.uid)
        got = self.table.get(key)
        if got is not None:
            return got[0]
        if t == self.horizon:
            entry = (terminal_value(self.ws, state), None)
        else:
            entry = self.backup(t, state)
        self.table[key] = entry
        if self.ws.num_states() > self.caps.max_infostates:
            raise ResourceLimitError(
                "information-state realizations", self.ws.num_states(), self.caps.max_infostates
            )
        return entry[0]

    def backup(self, t: int, state: InfoState):
        """One exact min-max step; returns (value, tie-broken argmin)."""
        ws = self.ws
        n = self.level
        self.backups += 1
        comps, points, member_points = decision_components(ws, n, state)
        zread = observation_read_points(ws, n, state)

        comp_results = []
        for comp in comps:
            count = 1
            for sp in comp.spaces:
                count *= len(sp)
            self.candidates += count
            if self.candidates > self.caps.max_candidates:
                raise ResourceLimitError(
                    "backup candidates", self.candidates, self.caps.max_candidates
                )
            comp_results.append(self._component_min(t, state, comp, member_points, zread))

        value = max(v for v, _ in comp_results)

        assignment: dict = {}
        for comp, (v, combo) in zip(comps, comp_results):
            if v < value:
                combo = self._component_first_under(
                    t, state, comp, member_points, zread, value
                )
            assignment.update(zip(comp.points, combo))
        theta, _ = materialize_action(ws, n, t, assignment)
        return value, theta

    # -- per-component enumeration -----------------------------------------

    def _fiber_plan(self, state: InfoState, comp, member_points, zread):
        """Static data for one component: z-read slots and relevant points."""
        pos = {pt: i for i, pt in enumerate(comp.points)}
        plan = []
        for idx in comp.member_indices:
            slots = []
            for (pt, var) in zread[idx]:
                slots.append((pos[pt], self.ws.hm.agent_index[(var.agent, var.subsystem)]))
            rel = tuple(sorted((pos[pt] for pt in member_points[idx])))
            plan.append((idx, tuple(slots), rel))
        return plan

    def _component_min(self, t, state, comp, member_points, zread):
        """min over the component's assignments of max over its fibers."""
        plan = self._fiber_plan(state, comp, member_points, zread)
        succ_memo: dict = {}
        best = None
        best_combo = None
        for combo in product(*[sp.elements for sp in comp.spaces]):
            # abort once the running max reaches the incumbent: the max over
            # the remaining fibers can only grow, and the earlier achiever
            # is the lexicographically smaller one
            val = self._eval_combo(t, state, comp, plan, succ_memo, combo, best, True)
            if val is not None and (best is None or val < best):
                best, best_combo = val, combo
        return best, best_combo

    def _component_first_under(self, t, state, comp, member_points, zread, threshold):
        """Lexicographically first assignment whose value is <= threshold."""
        plan = self._fiber_plan(state, comp, member_points, zread)
        succ_memo: dict = {}
        for combo in product(*[sp.elements for sp in comp.spaces]):
            val = self._eval_combo(
                t, state, comp, plan, succ_memo, combo, threshold, False
            )
            if val is not None:
                return combo
        raise AssertionError("no admissible assignment below established optimum")

    def _eval_combo(self, t, state, comp, plan, succ_memo, combo, cutoff, strict):
        """Value of one assignment, or None once it provably reaches cutoff."""
        ws = self.ws
        n = self.level
        n_agents = len(ws.hm.agents)
        fibers: dict = {}
        for idx, slots, rel in plan:
            member = state.members[idx]
            us = [None] * n_agents
            for ppos, aidx in slots:
                us[aidx] = combo[ppos]
            z = ws.observe_z(n, t, member[0], tuple(us))
            entry = fibers.setdefault(z, ([], set()))
            entry[0].append(member)
            entry[1].update(rel)
        val = None
        for z in sorted(fibers, key=repr):
            members, rel = fibers[z]
            rel_key = tuple(sorted(rel))
            skey = (z, tuple(members), tuple(combo[i] for i in rel_key))
            sval = succ_memo.get(skey)
            if sval is None:
                assignment = {comp.points[i]: combo[i] for i in rel_key}
                theta, higher = materialize_action(ws, n, t, assignment)
                sub = ws.intern_state(n, t, members)
                succ = evolve_infostate(ws, n, sub, theta, higher, z)
                sval = self.value(t + 1, succ)
                succ_memo[skey] = sval
            val = sval if val is None else max(val, sval)
            if cutoff is not None and (val >= cutoff if strict else val > cutoff):
                return None
        return val


def bellman_backup(ws: Workspace, t: int, state: InfoState, caps: Caps | None = None):
    """One-off backup against a fresh memo (shared workspace)."""
    solver = Solver(ws, caps or Caps())
    return solver.backup(t, state)


@dataclass
class ValueTable:
    """Values and argmins per (t, realization) the solve touched."""

    ws: Workspace
    entries: dict  # (t, uid) -> (Fraction, CompleteAction | None)

    def value(self, t: int, state: InfoState) -> Fraction:
        return self.entries[(t, state.uid)][0]

    def action(self, t: int, state: InfoState):
        return self.entries[(t, state.uid)][1]

    def counts_per_time(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (t, _), _entry in self.entries.items():
            out[t] = out.get(t, 0) + 1
        return out


@dataclass
class StrategyProfile:
    """Solved prescription laws keyed by the deciding subsystem's states."""

    ws: Workspace
    hm: HatModel
    horizon: int
    decisions: dict  # (t, uid) -> CompleteAction

    def complete_action(self, t: int, state: InfoState) -> CompleteAction:
        return self.decisions[(t, state.uid)]

    def partial_action(self, n: int, t: int, states: dict):
        """Subsystem n's partial action given its realized states n..N."""
        N = self.ws.model.num_subsystems
        theta = self.complete_action(t, states[N])
        if n == N:
            return theta.own
        args = tuple(states[m].uid for m in range(n, N))
        return theta.prescription(n, args)


@dataclass
class SolveResult:
    value: Fraction
    initial_state: InfoState
    profile: StrategyProfile
    table: ValueTable
    ws: Workspace
    model: SystemModel
    info: InfoStructure
    stats: dict


def solve(
    model: SystemModel,
    info: InfoStructure,
    caps: Caps | None = None,
) -> SolveResult:
    """Exact optimal worst-case value plus an optimal strategy profile.

    Additive-cost instances are transformed to terminal-cost form first
    (the optimal value is unchanged by the transform).
    """
    caps = caps or Caps()
    violations = validate(model, info)
    if violations:
        raise ModelError("invalid instance: " + "; ".join(violations[:5]))
    if model.has_stage_costs:
        from .costs import to_terminal

        model, info = to_terminal(model, info, caps.max_augmented)
    hm = build_hat_model(model, info)
    ws = Workspace(hm)
    p0 = initial_infostate(ws, model.num_subsystems)
    solver = Solver(ws, caps)
    value = solver.value(0, p0)
    decisions = {
        key: theta for key, (_, theta) in solver.table.items() if theta is not None
    }
    profile = StrategyProfile(
        ws=ws, hm=hm, horizon=model.horizon, decisions=decisions
    )
    table = ValueTable(ws=ws, entries=dict(solver.table))
    stats = {
        "reachable_per_t": table.counts_per_time(),
        "candidates": solver.candidates,
        "backups": solver.backups,
        "interned_states": ws.num_states(),
    }
    return SolveResult(
        value=value,
        initial_state=p0,
        profile=profile,
        table=table,
        ws=ws,
        model=model,
        info=info,
        stats=stats,
    )


class ExtractedStrategy(Strategy):
    """Agent-level control laws unwound from a solved profile.

    Each agent replays the realized information states of its own and all
    later subsystems from its common information, reads off the prescribed
    partial action, and applies it to its current observation and private
    memory. The laws therefore depend on the history only through
    (observation, private values, realized states).
    """

    def __init__(self, profile: StrategyProfile):
        self.profile = profile
        self.ws = profile.ws
        self.hm = profile.hm
        self._replay_memo: dict = {}

    def action(self, k, n, t, y, l_vals, c_vals):
        model = self.ws.model
        if t >= self.profile.horizon:
            # no decision at the horizon: any action is cost-free
            return model.action_spaces[(k, n, t)].elements[0]
        states = self._replay(n, t, c_vals)
        rules = self.profile.partial_action(n, t, states)
        return rules[k - 1].get(y, l_vals)

    def _replay(self, n: int, t: int, c_vals: tuple) -> dict:
        key = (n, t, c_vals)
        got = self._replay_memo.get(key)
        if got is not None:
            return got
        ws = self.ws
        hm = self.hm
        N = ws.model.num_subsystems
        var_map = dict(zip(hm.common_ids[(n, t)], c_vals))
        states = {m: initial_infostate(ws, m) for m in range(n, N + 1)}
        for s in range(t):
            theta = self.profile.complete_action(s, states[N])
            placeholder = [None] * (N - 1)
            for m in range(n, N):
                placeholder[m - 1] = states[m].uid
            member = (None, tuple(placeholder))
            realized = {}
            for j in range(n, N):
                realized[j] = theta.prescription(
                    j, tuple(states[m].uid for m in range(j, N))
                )
            realized[N] = theta.own
            nxt = {}
            for m in range(n, N + 1):
                z_m = tuple(var_map[v] for v in hm.z_ids[(m, s + 1)])
                theta_m = theta if m == N else curried_action(ws, N, member, theta, m)
                higher_m = tuple(realized[j] for j in range(m + 1, N + 1))
                nxt[m] = evolve_infostate(ws, m, states[m], theta_m, higher_m, z_m)
            states = nxt
        self._replay_memo[key] = states
        return states


def extract_agent_strategies(profile: StrategyProfile) -> ExtractedStrategy:
    return ExtractedStrategy(profile)


def evaluate_strategy(
    model: SystemModel, info: InfoStructure, strategy: Strategy
) -> Fraction:
    """Exact worst case of an agent-level strategy over admissible primitives."""
    worst = None
    for prim in enumerate_primitives(model, info):
        cost = simulate(model, info, strategy, prim).cost
        if worst is None or cost > worst:
            worst = cost
    if worst is None:
        raise ModelError("no admissible primitive realizations")
    return worst


# ---------------------------------------------------------------------------
# deterministic exports


def _encode_rules(rules) -> str:
    parts = []
    for rule in rules:
        entries = ";".join(
            f"{repr(yl).replace(' ', '')}->{repr(u).replace(' ', '')}"
            for (yl, u) in rule.entries
        )
        parts.append("[" + entries + "]")
    return "(" + ",".join(parts) + ")"


def encode_complete_action(ws: Workspace, theta: CompleteAction) -> str:
    parts = []
    for m, entries in enumerate(theta.prescriptions, start=1):
        for args, rules in entries:
            args_text = "|".join(encode_infostate(ws, ws.state(a)) for a in args)
            parts.append(f"p{m}{{{args_text}}}={_encode_rules(rules)}")
    parts.append("own=" + _encode_rules(theta.own))
    return " ".join(parts)


def export_strategy(result: SolveResult) -> str:
    """Canonical text export of the solved prescription laws."""
    lines = ["nmx-strategy v1"]
    for (t, sid) in sorted(result.profile.decisions):
        theta = result.profile.decisions[(t, sid)]
        state_text = encode_infostate(result.ws, result.ws.state(sid))
        lines.append(f"t={t} state={state_text}")
        lines.append("  " + encode_complete_action(result.ws, theta))
    return "\n".join(lines) + "\n"


def export_values(result: SolveResult) -> str:
    """Canonical text export of the value table."""
    lines = ["nmx-values v1"]
    for (t, sid) in sorted(result.table.entries):
        value, _ = result.table.entries[(t, sid)]
        state_text = encode_infostate(result.ws, result.ws.state(sid))
        lines.append(f"t={t} value={value} state={state_text}")
    return "\n".join(lines) + "\n"
