"""Seeded random tiny instances for verification sweeps.

Generation is versioned ("g1"): for a fixed version and seed the emitted
instance is identical across runs and machines, so sweep seeds are stable
references. Sizes are drawn small and then re-drawn with shrunken bounds
until the instance fits the exhaustive-search budgets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .model import (
    FiniteSpace,
    InfoStructure,
    SystemModel,
    feasible_initial_realizations,
    uid,
    validate,
    yid,
)

GEN_VERSION = "g1"


@dataclass(frozen=True)
class GenBounds:
    max_subsystems: int = 2
    max_agents: int = 2
    max_states: int = 3
    max_actions: int = 2
    max_disturbances: int = 2
    max_noises: int = 2
    max_obs: int = 3
    max_horizon: int = 2
    additive: bool = False
    three_level: bool = False
    profile_budget: int = 40_000
    lane_budget: int = 500


def random_instance(
    seed: int, bounds: GenBounds | None = None
) -> tuple[SystemModel, InfoStructure]:
    """Deterministic tiny instance for the given seed."""
    bounds = bounds or GenBounds()
    rng = random.Random(f"nmx-{GEN_VERSION}-{seed}")
    shrink = 0
    while True:
        model, info = _draw(rng, bounds, shrink)
        bad = validate(model, info)
        if bad:
            raise AssertionError(f"generator produced invalid instance: {bad[0]}")
        if _within_budget(model, info, bounds):
            return model, info
        shrink += 1


def _within_budget(model, info, bounds: GenBounds) -> bool:
    from .oracle import StrategyEnumerator, encode_game

    enc = encode_game(model, info)
    if enc.lane_nodes0.shape[0] > bounds.lane_budget:
        return False
    return StrategyEnumerator(enc).effective_count <= bounds.profile_budget


def _draw(rng: random.Random, bounds: GenBounds, shrink: int):
    squeeze = min(shrink, 3)
    if bounds.three_level:
        agents_per = (1, 1, 1)
    else:
        n_sub = rng.randint(1, bounds.max_subsystems)
        agents_per = tuple(
            rng.randint(1, max(1, bounds.max_agents - (1 if squeeze else 0)))
            for _ in range(n_sub)
        )
    N = len(agents_per)
    agent_list = []
    for n, kn in enumerate(agents_per, start=1):
        agent_list.extend((k, n) for k in range(1, kn + 1))

    top_T = max(0, bounds.max_horizon - (1 if squeeze >= 2 else 0))
    T = rng.choice([0] + [t for t in range(1, top_T + 1) for _ in range(4)] or [0])
    nx = rng.randint(2, max(2, bounds.max_states - squeeze // 2))
    states = FiniteSpace([f"s{i}" for i in range(nx)])
    nw = rng.randint(1, 1 if squeeze else bounds.max_disturbances)
    w_space = FiniteSpace(list(range(nw)))

    action_spaces = {}
    obs_noise = {}
    obs_spaces = {}
    observation = {}
    for (k, n) in agent_list:
        # bias toward real decisions and informative observations, else most
        # draws degenerate to single-profile instances
        nu = bounds.max_actions if rng.random() < 0.75 else 1
        nv = 1 if (squeeze or rng.random() < 0.6) else rng.randint(1, bounds.max_noises)
        ny = rng.randint(2, max(2, bounds.max_obs - squeeze))
        u_space = FiniteSpace(list(range(nu)))
        v_space = FiniteSpace(list(range(nv)))
        y_space = FiniteSpace([f"o{i}" for i in range(ny)])
        for t in range(T + 1):
            action_spaces[(k, n, t)] = u_space
            obs_noise[(k, n, t)] = v_space
            obs_spaces[(k, n, t)] = y_space
            observation[(k, n, t)] = {
                (x, v): y_space.elements[rng.randrange(len(y_space))]
                for x in states
                for v in v_space
            }

    dynamics = {}
    for t in range(T):
        table = {}
        for x in states:
            for us in _joint_actions(agent_list, action_spaces, t):
                for w in w_space:
                    table[(x, us, w)] = states.elements[rng.randrange(nx)]
        dynamics[t] = table

    terminal = {x: Fraction(rng.randint(0, 9)) for x in states}
    if rng.random() < 0.2:
        # exercise exact rational arithmetic now and then
        terminal = {x: c + Fraction(rng.randint(0, 1), 2) for x, c in terminal.items()}

    stage_costs = None
    if bounds.additive:
        stage_costs = {}
        for t in range(T):
            stage_costs[t] = {
                (x, us): Fraction(rng.randint(0, 4))
                for x in states
                for us in _joint_actions(agent_list, action_spaces, t)
            }

    # sharing pattern: nested source sets; identifier kinds fixed per source
    sources_by_level = []
    prev: set = set(agent_list)
    for n in range(1, N + 1):
        eligible = [kn for kn in agent_list if kn[1] >= n and kn in prev]
        size = rng.randint(0, len(eligible))
        picked = set(rng.sample(sorted(eligible), size)) if size else set()
        sources_by_level.append(picked)
        prev = picked
    kinds = {kn: rng.choice(("y", "u", "yu")) for kn in agent_list}

    shared_kind_ids = set()
    for n in range(1, N + 1):
        for kn in sources_by_level[n - 1]:
            shared_kind_ids.add((kn, kinds[kn]))

    memory = {}
    for (k, n) in agent_list:
        # a lone agent's whole memory is its common information, so private
        # own-history is only drawn inside multi-agent subsystems
        private_own = (
            agents_per[n - 1] >= 2
            and rng.random() < 0.5
            and all(
                (k, n) not in sources_by_level[m - 1] or "y" not in kinds[(k, n)]
                for m in range(1, n + 1)
            )
        )
        for t in range(T + 1):
            ids = set()
            for src in sources_by_level[n - 1]:
                kk, mm = src
                for s in range(t):
                    if "y" in kinds[src]:
                        ids.add(yid(kk, mm, s))
                    if "u" in kinds[src]:
                        ids.add(uid(kk, mm, s))
            if private_own:
                for s in range(t):
                    ids.add(yid(k, n, s))
            memory[(k, n, t)] = frozenset(ids)

    model = SystemModel(
        horizon=T,
        agents_per_subsystem=agents_per,
        state_spaces=tuple(states for _ in range(T + 1)),
        action_spaces=action_spaces,
        disturbance_spaces=tuple(w_space for _ in range(T)),
        obs_noise_spaces=obs_noise,
        obs_spaces=obs_spaces,
        dynamics=dynamics,
        observation=observation,
        terminal_cost=terminal,
        stage_costs=stage_costs,
    )

    feasible = feasible_initial_realizations(model)
    if len(feasible) > 1 and rng.random() < 0.5:
        count = rng.randint(1, len(feasible))
        chosen = frozenset(rng.sample(sorted(feasible, key=repr), count))
    else:
        chosen = frozenset(feasible)
    info = InfoStructure(
        memory=memory, initial_common=tuple(chosen for _ in range(N))
    )
    return model, info


def _joint_actions(agent_list, action_spaces, t):
    from itertools import product

    return list(
        product(*[action_spaces[(k, n, t)].elements for (k, n) in agent_list])
    )
