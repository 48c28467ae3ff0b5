"""Ground-truth verification: exhaustive search and a history-based check.

Two verifiers live here:

* `brute_force_minimax` — enumerate every agent-level strategy profile over
  reachable argument realizations and take the exact min over profiles of
  the exact max over primitive realizations. The instance is first flattened
  into an integer-indexed decision DAG so the per-profile evaluation is a
  plain table walk (see `engine`); profiles are restricted to choice points
  at t <= T-1 because later decisions cannot affect the cost.
* `history_minimax` — backward induction over realized coordinator
  histories of the equivalent nested system, carrying feasible sets as
  primitive path sets grouped definitionally (no information-state
  recursion anywhere). This is the tractable cross-check for instances
  whose profile count is astronomical.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import lcm

import numpy as np

from . import engine
from .errors import ResourceLimitError
from .infostate import (
    Workspace,
    _advance_paths,
    _group_states,
    _initial_paths,
    decision_components,
    materialize_action,
    member_rules,
)
from .model import InfoStructure, ModelError, Strategy, SystemModel
from .nested import build_hat_model


@dataclass
class EncodedGame:
    """Integer-indexed decision DAG of one instance.

    Nodes at time t are distinct (state, joint memory realization) pairs;
    observation combos, joint actions and disturbances index transitions.
    Costs are scaled to a shared denominator so the hot loops stay in int64.
    """

    model: SystemModel
    info: InfoStructure
    agents: tuple
    horizon: int
    obs_counts: list
    w_counts: list
    ja_strides: list
    ja_counts: list
    arg_ids: list  # per t<T: int32 [nodes, O_t, A]
    next_node: list  # per t<T: int32 [nodes, O_t, JA_t, W_t]
    stage_scaled: list  # per t<T: int64 [nodes, JA_t]
    term_scaled: np.ndarray  # int64 [nodes_T]
    roots: np.ndarray  # int32 [R, 2] -> (node, obs combo)
    scale: int
    search_args: list  # per search arg id: (k, n, t, y, l_vals, c_vals)
    search_action_spaces: list
    horizon_arg_count_by_agent: dict  # (k, n): #args at t == T
    lane_nodes0: np.ndarray
    lane_obs: np.ndarray  # [T+1, L]
    lane_w: np.ndarray  # [T, L]


def _scale_costs(model: SystemModel) -> int:
    denoms = [c.denominator for c in model.terminal_cost.values()]
    if model.stage_costs is not None:
        for table in model.stage_costs.values():
            denoms.extend(c.denominator for c in table.values())
    scale = 1
    for d in denoms:
        scale = lcm(scale, d)
    top = max(
        [abs(c) for c in model.terminal_cost.values()] + [Fraction(0)]
    ) * scale + 1
    if model.stage_costs is not None:
        for table in model.stage_costs.values():
            top += max(abs(c) for c in table.values()) * scale + 1
    if top * (model.horizon + 2) >= 2**62:
        raise ResourceLimitError("cost scaling magnitude", int(top), 2**62)
    return scale


def encode_game(model: SystemModel, info: InfoStructure) -> EncodedGame:
    """Flatten an instance into the integer decision DAG."""
    T = model.horizon
    agents = model.agents()
    A = len(agents)
    scale = _scale_costs(model)

    mem_ids = {
        (k, n, t): info.memory_ids(k, n, t) for (k, n) in agents for t in range(T + 1)
    }
    priv_pos: dict = {}
    common_pos: dict = {}
    for (k, n) in agents:
        for t in range(T + 1):
            ids = mem_ids[(k, n, t)]
            pos = {v: i for i, v in enumerate(ids)}
            priv_pos[(k, n, t)] = [pos[v] for v in info.private_information(k, n, t, model)]
            common_pos[(k, n, t)] = [pos[v] for v in info.common_information(n, t, model)]

    # successor memory source plan: carried slot, current obs, or current act
    mem_plan: dict = {}
    agent_idx = {kn: i for i, kn in enumerate(agents)}
    for (k, n) in agents:
        for t in range(T):
            old = {v: i for i, v in enumerate(mem_ids[(k, n, t)])}
            plan = []
            for v in mem_ids[(k, n, t + 1)]:
                if v in old:
                    plan.append(("old", old[v]))
                elif v.time == t and v.kind == "y":
                    plan.append(("y", agent_idx[(v.agent, v.subsystem)]))
                elif v.time == t and v.kind == "u":
                    plan.append(("u", agent_idx[(v.agent, v.subsystem)]))
                else:
                    raise ModelError(f"memory {v.token()} not derivable at t={t + 1}")
            mem_plan[(k, n, t)] = plan

    v_spaces = [
        [model.obs_noise_spaces[(k, n, t)] for (k, n) in agents] for t in range(T + 1)
    ]
    obs_combos = [list(product(*vs)) for vs in v_spaces]
    obs_counts = [len(c) for c in obs_combos]
    u_spaces = [
        [model.action_spaces[(k, n, t)] for (k, n) in agents] for t in range(T + 1)
    ]
    ja_combos = [list(product(*[sp.elements for sp in us])) for us in u_spaces]
    ja_counts = [len(c) for c in ja_combos]
    ja_strides = []
    for t in range(T + 1):
        strides = [1] * A
        for i in range(A - 2, -1, -1):
            strides[i] = strides[i + 1] * len(u_spaces[t][i + 1])
        ja_strides.append(np.array(strides, dtype=np.int64))

    # node tables per time
    node_index: list[dict] = [dict() for _ in range(T + 1)]
    node_list: list[list] = [[] for _ in range(T + 1)]

    def node_id(t, x, mems):
        key = (x, mems)
        idx = node_index[t].get(key)
        if idx is None:
            idx = len(node_list[t])
            node_index[t][key] = idx
            node_list[t].append(key)
        return idx

    empty_mems = tuple(() for _ in agents)
    allowed = set(info.initial_common[0])
    for cset in info.initial_common[1:]:
        allowed &= cset
    roots = []
    for x0 in model.state_spaces[0]:
        for oi, vs in enumerate(obs_combos[0]):
            ys = tuple(model.observe(k, n, 0, x0, v) for (k, n), v in zip(agents, vs))
            if (x0, ys) not in allowed:
                continue
            roots.append((node_id(0, x0, empty_mems), oi))
    if not roots:
        raise ModelError("no admissible initial realizations")

    search_args: list = []
    search_arg_index: dict = {}
    search_action_spaces: list = []
    horizon_args: set = set()
    arg_ids = []
    next_node = []
    stage_scaled = []

    # processing t in order keeps node_list[t] complete before it is walked:
    # transitions only ever create nodes at t+1
    for t in range(T + 1):
        args_t = []
        next_t = []
        stage_t = []
        idx = 0
        while idx < len(node_list[t]):
            x, mems = node_list[t][idx]
            idx += 1
            node_args = np.zeros((obs_counts[t], A), dtype=np.int32)
            if t < T:
                node_next = np.zeros(
                    (obs_counts[t], ja_counts[t], len(model.disturbance_spaces[t])),
                    dtype=np.int32,
                )
                node_stage = np.zeros(ja_counts[t], dtype=np.int64)
                if model.stage_costs is not None:
                    for ji, us in enumerate(ja_combos[t]):
                        node_stage[ji] = int(model.stage(t, x, us) * scale)
            for oi, vs in enumerate(obs_combos[t]):
                ys = tuple(
                    model.observe(k, n, t, x, v) for (k, n), v in zip(agents, vs)
                )
                for ai, (k, n) in enumerate(agents):
                    mem = mems[ai]
                    l_vals = tuple(mem[i] for i in priv_pos[(k, n, t)])
                    c_vals = tuple(mem[i] for i in common_pos[(k, n, t)])
                    arg = (k, n, t, ys[ai], l_vals, c_vals)
                    if t == T:
                        horizon_args.add(arg)
                        node_args[oi, ai] = -1
                        continue
                    aid = search_arg_index.get(arg)
                    if aid is None:
                        aid = len(search_args)
                        search_arg_index[arg] = aid
                        search_args.append(arg)
                        search_action_spaces.append(model.action_spaces[(k, n, t)])
                    node_args[oi, ai] = aid
                if t < T:
                    for ji, us in enumerate(ja_combos[t]):
                        mems2 = []
                        for ai, (k, n) in enumerate(agents):
                            vals = []
                            for kind, pos in mem_plan[(k, n, t)]:
                                if kind == "old":
                                    vals.append(mems[ai][pos])
                                elif kind == "y":
                                    vals.append(ys[pos])
                                else:
                                    vals.append(us[pos])
                            mems2.append(tuple(vals))
                        mems2 = tuple(mems2)
                        for wi, w in enumerate(model.disturbance_spaces[t]):
                            x2 = model.step(t, x, us, w)
                            node_next[oi, ji, wi] = node_id(t + 1, x2, mems2)
            args_t.append(node_args)
            if t < T:
                next_t.append(node_next)
                stage_t.append(node_stage)
        if t < T:
            arg_ids.append(np.stack(args_t))
            next_node.append(np.stack(next_t))
            stage_scaled.append(np.stack(stage_t))

    term = np.zeros(len(node_list[T]), dtype=np.int64)
    for idx, (x, _) in enumerate(node_list[T]):
        term[idx] = int(model.terminal_cost[x] * scale)

    horizon_counts: dict = {}
    for (k, n, _t, _y, _l, _c) in horizon_args:
        horizon_counts[(k, n)] = horizon_counts.get((k, n), 0) + 1

    # primitive lanes: every (root, w-seq, v-seq) combination
    lane_parts = [np.arange(len(roots))]
    shapes = [len(roots)]
    for t in range(T):
        shapes.append(len(model.disturbance_spaces[t]))
        shapes.append(obs_counts[t + 1])
    grids = np.meshgrid(*[np.arange(s) for s in shapes], indexing="ij")
    flat = [g.reshape(-1) for g in grids]
    roots_arr = np.array(roots, dtype=np.int32)
    lane_nodes0 = roots_arr[flat[0], 0].astype(np.int32)
    lane_obs = np.zeros((T + 1, flat[0].size), dtype=np.int32)
    lane_obs[0] = roots_arr[flat[0], 1]
    lane_w = np.zeros((T, flat[0].size), dtype=np.int32)
    for t in range(T):
        lane_w[t] = flat[1 + 2 * t]
        lane_obs[t + 1] = flat[2 + 2 * t]

    return EncodedGame(
        model=model,
        info=info,
        agents=agents,
        horizon=T,
        obs_counts=obs_counts,
        w_counts=[len(sp) for sp in model.disturbance_spaces],
        ja_strides=ja_strides,
        ja_counts=ja_counts,
        arg_ids=arg_ids,
        next_node=next_node,
        stage_scaled=stage_scaled,
        term_scaled=term,
        roots=roots_arr,
        scale=scale,
        search_args=search_args,
        search_action_spaces=search_action_spaces,
        horizon_arg_count_by_agent=horizon_counts,
        lane_nodes0=lane_nodes0,
        lane_obs=lane_obs,
        lane_w=lane_w,
    )


class StrategyEnumerator:
    """Reachable choice points and the profile space over them."""

    def __init__(self, enc: EncodedGame):
        self.enc = enc
        order = sorted(
            range(len(enc.search_args)),
            key=lambda i: (
                enc.search_args[i][2],
                enc.search_args[i][1],
                enc.search_args[i][0],
                repr(enc.search_args[i][3:]),
            ),
        )
        self.order = order
        self.counts = [len(enc.search_action_spaces[i]) for i in order]

    @property
    def effective_count(self) -> int:
        total = 1
        for c in self.counts:
            total *= c
        return total

    @property
    def full_count(self) -> int:
        total = self.effective_count
        for (k, n), cnt in sorted(self.enc.horizon_arg_count_by_agent.items()):
            total *= len(self.enc.model.action_spaces[(k, n, self.enc.horizon)]) ** cnt
        return total


def count_strategies(model: SystemModel, info: InfoStructure) -> int:
    """Exact number of distinct profiles over reachable argument realizations
    (all decision times, including the horizon)."""
    return StrategyEnumerator(encode_game(model, info)).full_count


@dataclass
class OracleResult:
    value: Fraction
    strategy: Strategy
    profiles_searched: int
    effective_count: int
    full_count: int


def brute_force_minimax(
    model: SystemModel, info: InfoStructure, cap: int = 200_000
) -> OracleResult:
    """Exact minimax by exhaustive profile search; refuses above the cap."""
    enc = encode_game(model, info)
    enum = StrategyEnumerator(enc)
    if enum.effective_count > cap:
        raise ResourceLimitError("strategy profiles", enum.effective_count, cap)
    best_scaled, best_assign, searched = engine.search_min_profile(enc, enum)
    value = Fraction(int(best_scaled), enc.scale)

    table = {}
    for aid, (k, n, t, y, l_vals, c_vals) in enumerate(enc.search_args):
        space = enc.search_action_spaces[aid]
        table[(k, n, t, y, l_vals, c_vals)] = space.elements[int(best_assign[aid])]
    strategy = _DefaultingStrategy(model, table)
    return OracleResult(
        value=value,
        strategy=strategy,
        profiles_searched=searched,
        effective_count=enum.effective_count,
        full_count=enum.full_count,
    )


class _DefaultingStrategy(Strategy):
    """Table strategy that falls back to the first action at the horizon
    (those decisions cannot affect the cost)."""

    def __init__(self, model: SystemModel, table: dict):
        self.model = model
        self.table = table

    def action(self, k, n, t, y, l_vals, c_vals):
        if t >= self.model.horizon:
            return self.model.action_spaces[(k, n, t)].elements[0]
        try:
            return self.table[(k, n, t, y, l_vals, c_vals)]
        except KeyError:
            from .model import StrategyUndefinedError

            raise StrategyUndefinedError(k, n, t) from None


# ---------------------------------------------------------------------------
# history-based exact verification (no information-state recursion)


@dataclass
class HistoryResult:
    value: Fraction
    nodes: int
    candidates: int


def history_minimax(
    model: SystemModel,
    info: InfoStructure,
    max_candidates: int = 50_000_000,
) -> HistoryResult:
    """Backward induction over coordinator histories of the nested system.

    Feasible sets are primitive path sets grouped definitionally; decisions
    are enumerated per independent component exactly as declared, and values
    are memoized on the realized member sets. Shares no state-evolution code
    with the dynamic program.
    """
    if model.has_stage_costs:
        from .costs import to_terminal

        model, info = to_terminal(model, info)
    violations_free = build_hat_model(model, info)
    ws = Workspace(violations_free)
    N = model.num_subsystems
    T = model.horizon
    hm = ws.hm

    memo: dict = {}
    stats = {"nodes": 0, "candidates": 0}

    def rec(t: int, paths: list) -> Fraction:
        members = sorted({(p.hid, tuple(p.states)) for p in paths})
        state = ws.intern_state(N, t, members)
        key = (t, state.uid)
        got = memo.get(key)
        if got is not None:
            return got
        stats["nodes"] += 1
        if t == T:
            value = max(hm.terminal_cost(ws.hat_val(h)) for (h, _) in members)
            memo[key] = value
            return value
        comps, _, _ = decision_components(ws, N, state)
        value = None
        for comp in comps:
            comp_members = {state.members[i] for i in comp.member_indices}
            comp_paths = [
                p for p in paths if (p.hid, tuple(p.states)) in comp_members
            ]
            count = 1
            for sp in comp.spaces:
                count *= len(sp)
            stats["candidates"] += count
            if stats["candidates"] > max_candidates:
                raise ResourceLimitError(
                    "history candidates", stats["candidates"], max_candidates
                )
            best = None
            for combo in product(*[sp.elements for sp in comp.spaces]):
                assignment = dict(zip(comp.points, combo))
                theta, higher = materialize_action(ws, N, t, assignment)

                def decide(p, _theta=theta, _higher=higher):
                    member = (None, tuple(p.states))
                    try:
                        return member_rules(ws, N, member, _theta, _higher)
                    except ModelError:
                        return None

                advanced = _advance_paths(ws, comp_paths, N, t, decide)
                fibers: dict = {}
                for p in advanced:
                    fibers.setdefault(p.digests[N - 1][1], []).append(p)
                worst = None
                for z in sorted(fibers, key=repr):
                    grouped = _group_states(ws, fibers[z], N, t + 1)
                    if not grouped:
                        continue
                    v = rec(t + 1, grouped)
                    worst = v if worst is None else max(worst, v)
                    if best is not None and worst >= best:
                        break
                else:
                    if worst is not None and (best is None or worst < best):
                        best = worst
            if best is None:
                raise ModelError("component admits no feasible decision")
            value = best if value is None else max(value, best)
        memo[key] = value
        return value

    paths0 = _group_states(ws, _initial_paths(ws, N), N, 0)
    if not paths0:
        raise ModelError("no admissible initial realizations")
    value = rec(0, paths0)
    return HistoryResult(value=value, nodes=stats["nodes"], candidates=stats["candidates"])
