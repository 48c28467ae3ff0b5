"""Equivalent centralized-per-subsystem reformulation of an instance.

The hat state bundles the plant state with every agent's current observation
and private memory values, so that per-subsystem partial actions (maps from
an agent's (observation, private memory) to an action) drive it. The step
and observation rules below are total table-free constructions: each new
component is resolved from the current hat state, the applied actions and
the fresh primitives, which is checked once at build time.

Hat states are plain nested tuples:

    (x, ((y_agent, l_tuple_agent), ...))   # agents in canonical order

where l_tuple is ordered by the agent's sorted private identifier list.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Mapping

from .model import (
    InfoStructure,
    ModelError,
    Primitives,
    Strategy,
    SystemModel,
    VarId,
    realization_of,
    uid,
    yid,
)


class HatConstructionError(ModelError):
    """An identifier required by the information structure is not
    reconstructible from the hat state, the applied actions and fresh
    primitives."""

    def __init__(self, var: VarId, where: str):
        self.var = var
        super().__init__(f"{var.token()} not reconstructible ({where})")


class TableRule:
    """Finite (observation, private values) -> action map for one agent."""

    __slots__ = ("entries", "_map")

    def __init__(self, entries):
        self.entries = tuple(sorted(entries, key=lambda e: repr(e[0])))
        self._map = dict(self.entries)

    def get(self, y, l_vals):
        try:
            return self._map[(y, l_vals)]
        except KeyError:
            raise ModelError(f"partial action undefined at ({y!r},{l_vals!r})") from None

    @property
    def domain(self):
        return tuple(k for k, _ in self.entries)

    def __eq__(self, other):
        return isinstance(other, TableRule) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"TableRule({list(self.entries)!r})"


class FnRule:
    """Callable-backed agent rule; used when lifting agent-level strategies."""

    __slots__ = ("fn",)

    def __init__(self, fn: Callable):
        self.fn = fn

    def get(self, y, l_vals):
        return self.fn(y, l_vals)


# A subsystem partial action is a tuple of agent rules (k ascending);
# the system-wide bundle is a tuple of those over subsystems (n ascending).


class HatModel:
    """Derived hat-system tables and shape data for one instance."""

    def __init__(self, model: SystemModel, info: InfoStructure):
        if model.has_stage_costs:
            raise ModelError(
                "hat construction needs a terminal-cost instance; "
                "apply the additive-cost transform first"
            )
        self.model = model
        self.info = info
        T = model.horizon
        agents = model.agents()
        self.agents = agents
        self.agent_index = {kn: i for i, kn in enumerate(agents)}

        self.private_ids: dict[tuple[int, int, int], tuple[VarId, ...]] = {}
        for (k, n) in agents:
            for t in range(T + 1):
                self.private_ids[(k, n, t)] = info.private_information(k, n, t, model)

        self.z_ids: dict[tuple[int, int], tuple[VarId, ...]] = {}
        self.common_ids: dict[tuple[int, int], tuple[VarId, ...]] = {}
        for n in range(1, model.num_subsystems + 1):
            for t in range(T + 1):
                self.z_ids[(n, t)] = info.new_information(n, t, model)
                self.common_ids[(n, t)] = info.common_information(n, t, model)

        # id -> (agent position, slot) for values carried privately at time t
        self._store_index: dict[int, dict[VarId, tuple[int, int]]] = {}
        for t in range(T + 1):
            index: dict[VarId, tuple[int, int]] = {}
            for i, (k, n) in enumerate(agents):
                for slot, var in enumerate(self.private_ids[(k, n, t)]):
                    index.setdefault(var, (i, slot))
            self._store_index[t] = index

        self._check_reconstructible()

    def _check_reconstructible(self):
        T = self.model.horizon
        for t in range(T):
            store = self._store_index[t]
            current = set()
            for (k, n) in self.agents:
                current.add(yid(k, n, t))
                current.add(uid(k, n, t))
            for n in range(1, self.model.num_subsystems + 1):
                for var in self.z_ids[(n, t + 1)]:
                    if var not in current and var not in store:
                        raise HatConstructionError(var, f"new information of {n} at t={t + 1}")
            for (k, n) in self.agents:
                for var in self.private_ids[(k, n, t + 1)]:
                    if var not in current and var not in store:
                        raise HatConstructionError(
                            var, f"private memory of ({k},{n}) at t={t + 1}"
                        )

    # hat state accessors -------------------------------------------------

    def plant_state(self, hat):
        return hat[0]

    def agent_obs(self, hat, i: int):
        return hat[1][i][0]

    def agent_priv(self, hat, i: int):
        return hat[1][i][1]

    def agent_arg(self, hat, i: int):
        """(observation, private values) pair an agent's rule is applied to."""
        return hat[1][i]

    def initial_hat(self, realization) -> tuple:
        x0, ys = realization
        return (x0, tuple((y, ()) for y in ys))

    def terminal_cost(self, hat):
        return self.model.terminal(hat[0])

    # action application ---------------------------------------------------

    def applied_actions(self, hat, partial_actions) -> tuple:
        """Realized action tuple: each agent's rule applied to its hat data."""
        us = []
        for i, (k, n) in enumerate(self.agents):
            rule = partial_actions[n - 1][k - 1]
            y, l_vals = hat[1][i]
            us.append(rule.get(y, l_vals))
        return tuple(us)

    def _resolve(self, var: VarId, t: int, hat, ys, us):
        """Value of a time <= t identifier from the step-t context."""
        if var.time == t:
            i = self.agent_index[(var.agent, var.subsystem)]
            return ys[i] if var.kind == "y" else us[i]
        pos = self._store_index[t].get(var)
        if pos is None:
            raise HatConstructionError(var, f"resolution at t={t}")
        i, slot = pos
        return hat[1][i][1][slot]

    def hat_step(self, t: int, hat, partial_actions, w, v_next: tuple) -> tuple:
        """One hat transition; v_next is the per-agent noise tuple at t+1."""
        us = self.applied_actions(hat, partial_actions)
        ys = tuple(hat[1][i][0] for i in range(len(self.agents)))
        x_next = self.model.step(t, hat[0], us, w)
        comps = []
        for i, (k, n) in enumerate(self.agents):
            y_next = self.model.observe(k, n, t + 1, x_next, v_next[i])
            l_next = tuple(
                self._resolve(var, t, hat, ys, us)
                for var in self.private_ids[(k, n, t + 1)]
            )
            comps.append((y_next, l_next))
        return (x_next, tuple(comps))

    def hat_observe(self, n: int, t: int, hat, partial_actions) -> tuple:
        """Realized new information of subsystem n at t+1 (deterministic)."""
        us = self.applied_actions(hat, partial_actions)
        ys = tuple(hat[1][i][0] for i in range(len(self.agents)))
        return tuple(
            self._resolve(var, t, hat, ys, us) for var in self.z_ids[(n, t + 1)]
        )

    def hat_observe_from_actions(self, n: int, t: int, hat, us: tuple) -> tuple:
        ys = tuple(hat[1][i][0] for i in range(len(self.agents)))
        return tuple(
            self._resolve(var, t, hat, ys, us) for var in self.z_ids[(n, t + 1)]
        )

    # enumeration helpers --------------------------------------------------

    def agent_rules(self, k: int, n: int, t: int, domain):
        """All table rules on the given (y, l) domain, in canonical order."""
        dom = tuple(sorted(set(domain), key=repr))
        space = self.model.action_spaces[(k, n, t)]
        for actions in product(space.elements, repeat=len(dom)):
            yield TableRule(tuple(zip(dom, actions)))

    def debug_text(self) -> str:
        out = ["nmx-hat v1", ""]
        T = self.model.horizon
        for n in range(1, self.model.num_subsystems + 1):
            for t in range(T + 1):
                ids = " ".join(v.token() for v in self.z_ids[(n, t)])
                out.append(f"[new-information n={n} t={t}] {ids}")
        for (k, n) in self.agents:
            for t in range(T + 1):
                ids = " ".join(v.token() for v in self.private_ids[(k, n, t)])
                out.append(f"[private k={k} n={n} t={t}] {ids}")
        return "\n".join(out) + "\n"


def build_hat_model(model: SystemModel, info: InfoStructure) -> HatModel:
    return HatModel(model, info)


def hat_rollout(hm: HatModel, partial_strategy, primitives: Primitives):
    """Roll the hat system forward under a partial strategy.

    partial_strategy(n, t, c_vals) must return the subsystem's agent rules.
    Returns (hat states, realized new information per (n, t), cost).
    """
    model = hm.model
    T = model.horizon
    agents = hm.agents
    ys0 = tuple(
        model.observe(k, n, 0, primitives.x0, primitives.v[0][i])
        for i, (k, n) in enumerate(agents)
    )
    hat = hm.initial_hat((primitives.x0, ys0))
    hats = [hat]
    var_values: dict = {}
    z_real: dict[tuple[int, int], tuple] = {}
    for n in range(1, model.num_subsystems + 1):
        z_real[(n, 0)] = ()
    for t in range(T + 1):
        c_vals = {
            n: realization_of(hm.common_ids[(n, t)], var_values)
            for n in range(1, model.num_subsystems + 1)
        }
        pas = tuple(
            partial_strategy(n, t, c_vals[n])
            for n in range(1, model.num_subsystems + 1)
        )
        us = hm.applied_actions(hat, pas)
        for i, (k, n) in enumerate(agents):
            var_values[yid(k, n, t)] = hat[1][i][0]
            var_values[uid(k, n, t)] = us[i]
        if t == T:
            break
        for n in range(1, model.num_subsystems + 1):
            z_real[(n, t + 1)] = hm.hat_observe(n, t, hat, pas)
        hat = hm.hat_step(t, hat, pas, primitives.w[t], primitives.v[t + 1])
        hats.append(hat)
    return tuple(hats), z_real, hm.terminal_cost(hats[-1])


@dataclass
class LiftedStrategy:
    """Partial strategy induced by an agent-level strategy."""

    model: SystemModel
    info: InfoStructure
    base: Strategy

    def __call__(self, n: int, t: int, c_vals: tuple):
        rules = []
        for k in self.model.subsystem_agents(n):
            def fn(y, l_vals, _k=k, _n=n, _t=t, _c=c_vals):
                return self.base.action(_k, _n, _t, y, l_vals, _c)

            rules.append(FnRule(fn))
        return tuple(rules)


def lift_strategy(model: SystemModel, info: InfoStructure, g: Strategy) -> LiftedStrategy:
    return LiftedStrategy(model, info, g)


class LoweredStrategy(Strategy):
    """Agent-level strategy induced by a partial strategy."""

    def __init__(self, partial_strategy):
        self.partial = partial_strategy

    def action(self, k, n, t, y, l_vals, c_vals):
        rules = self.partial(n, t, c_vals)
        return rules[k - 1].get(y, l_vals)


def lower_strategy(partial_strategy) -> LoweredStrategy:
    return LoweredStrategy(partial_strategy)
