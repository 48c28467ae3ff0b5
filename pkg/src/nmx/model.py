"""Finite decentralized worst-case control instances.

An instance couples a tabulated plant (`SystemModel`) with an information
structure (`InfoStructure`). The plant is fully dense: dynamics, observation
rules and costs are total lookup tables over declared finite spaces, so every
downstream computation can enumerate exactly. The information structure lists,
per agent and per time, which past observation/action variables sit in that
agent's memory; common, private and new information are derived set
operations on those identifier lists.

Conventions used throughout the package:

* subsystems are numbered n = 1..N, agents inside a subsystem k = 1..K^n;
  the canonical agent order is (n ascending, k ascending);
* memory holds only variables with time index s <= t-1 (memory is updated
  before the current observation is realized); the current observation is a
  separate argument of every control law;
* a "realization" of an identifier list is the tuple of values ordered by
  the canonical identifier sort.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Any, Callable, Iterator, Mapping

Element = Any  # space elements are opaque hashable tokens


class ModelError(Exception):
    """Raised for structurally unusable instances (distinct from validation)."""


class StrategyUndefinedError(Exception):
    """A strategy was queried at a realized history it does not cover."""

    def __init__(self, agent: int, subsystem: int, time: int):
        self.agent, self.subsystem, self.time = agent, subsystem, time
        super().__init__(
            f"strategy undefined for agent ({agent},{subsystem}) at t={time}"
        )


@dataclass(frozen=True)
class VarId:
    """Identifier of a past observation or action variable.

    kind is "y" or "u"; (agent, subsystem) names the owner; time is the step
    the variable was realized at.
    """

    kind: str
    agent: int
    subsystem: int
    time: int

    def sort_key(self):
        return (self.time, self.subsystem, self.agent, 0 if self.kind == "y" else 1)

    def token(self) -> str:
        return f"{self.kind}[{self.agent},{self.subsystem}]@{self.time}"


def yid(agent: int, subsystem: int, time: int) -> VarId:
    return VarId("y", agent, subsystem, time)


def uid(agent: int, subsystem: int, time: int) -> VarId:
    return VarId("u", agent, subsystem, time)


def sorted_ids(ids) -> tuple[VarId, ...]:
    return tuple(sorted(ids, key=VarId.sort_key))


class FiniteSpace:
    """Ordered finite set of distinct opaque elements."""

    __slots__ = ("elements", "_index")

    def __init__(self, elements):
        self.elements = tuple(elements)
        if not self.elements:
            raise ModelError("empty space")
        self._index = {e: i for i, e in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise ModelError("duplicate elements in space")

    def index(self, element) -> int:
        return self._index[element]

    def __contains__(self, element) -> bool:
        return element in self._index

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        return isinstance(other, FiniteSpace) and self.elements == other.elements

    def __hash__(self):
        return hash(self.elements)

    def __repr__(self):
        return f"FiniteSpace({list(self.elements)!r})"


@dataclass(frozen=True)
class SystemModel:
    """Dense tabulated plant.

    dynamics[t] maps (x, u_tuple, w) -> x' where u_tuple is ordered by the
    canonical agent order. observation[(k, n, t)] maps (x, v) -> y.
    Costs are nonnegative rationals (exact arithmetic end to end).
    """

    horizon: int
    agents_per_subsystem: tuple[int, ...]
    state_spaces: tuple[FiniteSpace, ...]
    action_spaces: Mapping[tuple[int, int, int], FiniteSpace]
    disturbance_spaces: tuple[FiniteSpace, ...]
    obs_noise_spaces: Mapping[tuple[int, int, int], FiniteSpace]
    obs_spaces: Mapping[tuple[int, int, int], FiniteSpace]
    dynamics: Mapping[int, Mapping[tuple, Element]]
    observation: Mapping[tuple[int, int, int], Mapping[tuple, Element]]
    terminal_cost: Mapping[Element, Fraction]
    stage_costs: Mapping[int, Mapping[tuple, Fraction]] | None = None

    @property
    def num_subsystems(self) -> int:
        return len(self.agents_per_subsystem)

    def agents(self) -> tuple[tuple[int, int], ...]:
        """Canonical agent order: (k, n) with n ascending, k ascending."""
        out = []
        for n, kn in enumerate(self.agents_per_subsystem, start=1):
            out.extend((k, n) for k in range(1, kn + 1))
        return tuple(out)

    def subsystem_agents(self, n: int) -> tuple[int, ...]:
        return tuple(range(1, self.agents_per_subsystem[n - 1] + 1))

    def step(self, t: int, x, u_tuple: tuple, w):
        return self.dynamics[t][(x, u_tuple, w)]

    def observe(self, k: int, n: int, t: int, x, v):
        return self.observation[(k, n, t)][(x, v)]

    def terminal(self, x) -> Fraction:
        return self.terminal_cost[x]

    def stage(self, t: int, x, u_tuple: tuple) -> Fraction:
        if self.stage_costs is None:
            return Fraction(0)
        return self.stage_costs[t][(x, u_tuple)]

    @property
    def has_stage_costs(self) -> bool:
        return self.stage_costs is not None


# An initial hat realization: (x0, (y0 per agent in canonical order)).
# Private memories at t=0 are always empty (memory may only hold s <= -1).
InitialRealization = tuple


def feasible_initial_realizations(model: SystemModel) -> tuple[InitialRealization, ...]:
    """All (x0, y0-tuple) pairs realizable by some (x0, v0)."""
    agents = model.agents()
    out = []
    seen = set()
    for x0 in model.state_spaces[0]:
        v_spaces = [model.obs_noise_spaces[(k, n, 0)] for (k, n) in agents]
        for vs in product(*v_spaces):
            ys = tuple(
                model.observe(k, n, 0, x0, v) for (k, n), v in zip(agents, vs)
            )
            real = (x0, ys)
            if real not in seen:
                seen.add(real)
                out.append(real)
    return tuple(out)


@dataclass(frozen=True)
class InfoStructure:
    """Per-agent memory contents plus initial common constraints.

    memory[(k, n, t)] is the set of identifiers in that agent's memory.
    initial_common[n-1] is the set of initial realizations subsystem n's
    common information at t=0 admits (must be a subset of the feasible ones
    and nested: earlier subsystems know at least as much).
    """

    memory: Mapping[tuple[int, int, int], frozenset]
    initial_common: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "_common_cache", {})

    def memory_ids(self, k: int, n: int, t: int) -> tuple[VarId, ...]:
        return sorted_ids(self.memory[(k, n, t)])

    def common_information(self, n: int, t: int, model: SystemModel) -> tuple[VarId, ...]:
        """Intersection of the subsystem's agents' memories, sorted."""
        key = (n, t)
        cache = self._common_cache
        if key not in cache:
            ks = model.subsystem_agents(n)
            if not ks:
                raise ModelError(f"subsystem {n} has no agents")
            common = frozenset(self.memory[(ks[0], n, t)])
            for k in ks[1:]:
                common &= self.memory[(k, n, t)]
            cache[key] = sorted_ids(common)
        return cache[key]

    def private_information(self, k: int, n: int, t: int, model: SystemModel) -> tuple[VarId, ...]:
        common = set(self.common_information(n, t, model))
        return sorted_ids(v for v in self.memory[(k, n, t)] if v not in common)

    def new_information(self, n: int, t: int, model: SystemModel) -> tuple[VarId, ...]:
        now = set(self.common_information(n, t, model))
        before = set(self.common_information(n, t - 1, model)) if t > 0 else set()
        return sorted_ids(now - before)


def validate(model: SystemModel, info: InfoStructure) -> list[str]:
    """Check every structural invariant; returns violations (empty iff valid)."""
    bad: list[str] = []
    T = model.horizon
    N = model.num_subsystems
    agents = model.agents()

    if T < 0:
        bad.append("horizon must be >= 0")
        return bad
    if len(model.state_spaces) != T + 1:
        bad.append("need one state space per t = 0..T")
        return bad
    if len(model.disturbance_spaces) != T:
        bad.append("need one disturbance space per t = 0..T-1")
        return bad

    # dynamics totality and codomain
    for t in range(T):
        table = model.dynamics.get(t)
        if table is None:
            bad.append(f"dynamics table missing for t={t}")
            continue
        u_spaces = [model.action_spaces[(k, n, t)] for (k, n) in agents]
        for x in model.state_spaces[t]:
            for us in product(*u_spaces):
                for w in model.disturbance_spaces[t]:
                    nxt = table.get((x, us, w))
                    if nxt is None:
                        bad.append(f"dynamics t={t} undefined at ({x!r},{us!r},{w!r})")
                    elif nxt not in model.state_spaces[t + 1]:
                        bad.append(f"dynamics t={t} output {nxt!r} outside state space")

    # observation totality and codomain
    for (k, n) in agents:
        for t in range(T + 1):
            table = model.observation.get((k, n, t))
            if table is None:
                bad.append(f"observation table missing for agent ({k},{n}) t={t}")
                continue
            for x in model.state_spaces[t]:
                for v in model.obs_noise_spaces[(k, n, t)]:
                    y = table.get((x, v))
                    if y is None:
                        bad.append(
                            f"observation ({k},{n}) t={t} undefined at ({x!r},{v!r})"
                        )
                    elif y not in model.obs_spaces[(k, n, t)]:
                        bad.append(
                            f"observation ({k},{n}) t={t} output {y!r} outside obs space"
                        )

    # costs
    for x in model.state_spaces[T]:
        c = model.terminal_cost.get(x)
        if c is None:
            bad.append(f"terminal cost undefined at {x!r}")
        elif c < 0:
            bad.append(f"terminal cost negative at {x!r}")
    if model.stage_costs is not None:
        for t in range(T):
            u_spaces = [model.action_spaces[(k, n, t)] for (k, n) in agents]
            table = model.stage_costs.get(t, {})
            for x in model.state_spaces[t]:
                for us in product(*u_spaces):
                    c = table.get((x, us))
                    if c is None:
                        bad.append(f"stage cost t={t} undefined at ({x!r},{us!r})")
                    elif c < 0:
                        bad.append(f"stage cost t={t} negative at ({x!r},{us!r})")

    # memory identifier discipline
    valid_agents = set(agents)
    for (k, n) in agents:
        for t in range(T + 1):
            mem = info.memory.get((k, n, t))
            if mem is None:
                bad.append(f"memory missing for agent ({k},{n}) t={t}")
                continue
            for v in mem:
                if v.kind not in ("y", "u"):
                    bad.append(f"agent ({k},{n}) t={t}: bad identifier kind {v.kind!r}")
                if (v.agent, v.subsystem) not in valid_agents:
                    bad.append(f"agent ({k},{n}) t={t}: {v.token()} names no agent")
                if v.time > t - 1:
                    bad.append(
                        f"agent ({k},{n}) t={t}: {v.token()} not strictly past"
                    )
                if v.subsystem < n:
                    bad.append(
                        f"agent ({k},{n}) t={t}: {v.token()} from a preceding subsystem"
                    )

    # perfect recall of memories
    for (k, n) in agents:
        for t in range(T):
            m0 = info.memory.get((k, n, t))
            m1 = info.memory.get((k, n, t + 1))
            if m0 is not None and m1 is not None and not m0 <= m1:
                bad.append(f"agent ({k},{n}): memory not perfectly recalled at t={t}")

    if any("memory missing" in b for b in bad):
        return bad

    # nestedness of common information and of its increments
    for t in range(T + 1):
        commons = [set(info.common_information(n, t, model)) for n in range(1, N + 1)]
        for n in range(1, N):
            if not commons[n] <= commons[n - 1]:
                bad.append(
                    f"common information not nested: C^{n + 1} !<= C^{n} at t={t}"
                )

    # perfect recall of common information
    for n in range(1, N + 1):
        for t in range(T):
            c0 = set(info.common_information(n, t, model))
            c1 = set(info.common_information(n, t + 1, model))
            if not c0 <= c1:
                bad.append(f"common information of subsystem {n} shrinks at t={t}")

    # privacy: a later subsystem's private info is invisible to earlier commons
    for (k, m) in agents:
        for t in range(T + 1):
            priv = set(info.private_information(k, m, t, model))
            for n in range(1, m):
                leak = priv & set(info.common_information(n, t, model))
                if leak:
                    ids = ", ".join(v.token() for v in sorted_ids(leak))
                    bad.append(
                        f"privacy violation: agent ({k},{m}) t={t} holds {ids} "
                        f"which is common to subsystem {n}"
                    )

    # initial common constraints
    if len(info.initial_common) != N:
        bad.append("need one initial common constraint per subsystem")
    else:
        feas = set(feasible_initial_realizations(model))
        for n in range(1, N + 1):
            cset = info.initial_common[n - 1]
            if not cset:
                bad.append(f"initial common constraint of subsystem {n} is empty")
            for real in cset:
                if real not in feas:
                    bad.append(
                        f"initial constraint of subsystem {n} admits infeasible {real!r}"
                    )
        for n in range(1, N):
            if not info.initial_common[n - 1] <= info.initial_common[n]:
                bad.append(
                    f"initial constraints not nested: subsystem {n} !<= {n + 1}"
                )

    return bad


@dataclass(frozen=True)
class Primitives:
    """One realization of all primitive variables.

    w is a tuple of length T; v[t] is the per-agent noise tuple (canonical
    agent order) for t = 0..T.
    """

    x0: Element
    w: tuple
    v: tuple


def enumerate_primitives(
    model: SystemModel, info: InfoStructure | None = None
) -> Iterator[Primitives]:
    """All primitive realizations, filtered by the initial constraints if given.

    The filter keeps realizations whose induced initial realization lies in
    every subsystem's constraint (reality is consistent with all signals).
    """
    agents = model.agents()
    T = model.horizon
    allowed = None
    if info is not None:
        allowed = set(info.initial_common[0])
        for cset in info.initial_common[1:]:
            allowed &= cset
    w_spaces = [model.disturbance_spaces[t] for t in range(T)]
    v_spaces = [
        [model.obs_noise_spaces[(k, n, t)] for (k, n) in agents] for t in range(T + 1)
    ]
    tail_v = [list(product(*v_spaces[t])) for t in range(1, T + 1)]
    for x0 in model.state_spaces[0]:
        for v0 in product(*v_spaces[0]):
            if allowed is not None:
                ys = tuple(
                    model.observe(k, n, 0, x0, v) for (k, n), v in zip(agents, v0)
                )
                if (x0, ys) not in allowed:
                    continue
            for ws in product(*w_spaces):
                for rest in product(*tail_v):
                    yield Primitives(x0=x0, w=ws, v=(v0,) + tuple(rest))


@dataclass
class Trajectory:
    """A rolled-out realization: states, actions, observations, cost."""

    states: tuple
    actions: tuple  # per t=0..T, tuple over canonical agent order
    observations: tuple  # per t=0..T, tuple over canonical agent order
    var_values: dict  # VarId -> realized value
    cost: Fraction

    def memory_realization(
        self, k: int, n: int, t: int, info: InfoStructure
    ) -> tuple:
        return tuple(self.var_values[v] for v in info.memory_ids(k, n, t))


def realization_of(ids: tuple[VarId, ...], var_values: Mapping) -> tuple:
    return tuple(var_values[v] for v in ids)


class Strategy:
    """Agent-level strategy protocol: action(k, n, t, y, l_vals, c_vals)."""

    def action(self, k: int, n: int, t: int, y, l_vals: tuple, c_vals: tuple):
        raise NotImplementedError


class DictStrategy(Strategy):
    """Strategy backed by an explicit table keyed by realized arguments."""

    def __init__(self, table: Mapping):
        self.table = table

    def action(self, k, n, t, y, l_vals, c_vals):
        try:
            return self.table[(k, n, t, y, l_vals, c_vals)]
        except KeyError:
            raise StrategyUndefinedError(k, n, t) from None


class FnStrategy(Strategy):
    """Strategy backed by a callable (used for hand-written test policies)."""

    def __init__(self, fn: Callable):
        self.fn = fn

    def action(self, k, n, t, y, l_vals, c_vals):
        return self.fn(k, n, t, y, l_vals, c_vals)


def simulate(
    model: SystemModel,
    info: InfoStructure,
    strategy: Strategy,
    primitives: Primitives,
) -> Trajectory:
    """Deterministic rollout of one primitive realization under a strategy.

    Queries the strategy at every t = 0..T (the action at T is recorded but
    cannot affect the cost). Realized cost is the terminal cost plus stage
    costs when the model declares them.
    """
    agents = model.agents()
    T = model.horizon
    var_values: dict = {}
    states = [primitives.x0]
    actions = []
    observations = []
    cost = Fraction(0)
    x = primitives.x0
    for t in range(T + 1):
        ys = tuple(
            model.observe(k, n, t, x, primitives.v[t][i])
            for i, (k, n) in enumerate(agents)
        )
        observations.append(ys)
        us = []
        for i, (k, n) in enumerate(agents):
            l_vals = realization_of(info.private_information(k, n, t, model), var_values)
            c_vals = realization_of(info.common_information(n, t, model), var_values)
            us.append(strategy.action(k, n, t, ys[i], l_vals, c_vals))
        us = tuple(us)
        actions.append(us)
        for i, (k, n) in enumerate(agents):
            var_values[yid(k, n, t)] = ys[i]
            var_values[uid(k, n, t)] = us[i]
        if t < T:
            cost += model.stage(t, x, us)
            x = model.step(t, x, us, primitives.w[t])
            states.append(x)
    cost += model.terminal(x)
    return Trajectory(
        states=tuple(states),
        actions=tuple(actions),
        observations=tuple(observations),
        var_values=var_values,
        cost=cost,
    )
