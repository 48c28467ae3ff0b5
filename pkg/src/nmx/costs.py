"""Additive-cost to terminal-cost state augmentation.

The state is extended with the cost accumulated so far. Accumulated-cost
sets are built by forward reachability over achievable sums, never as a
grid, which keeps them minimal; they still generally grow with the horizon,
so the construction is capped. The accumulator is globally unobserved:
observation tables ignore it, so the information structure carries over
unchanged.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

from .errors import ResourceLimitError
from .model import FiniteSpace, InfoStructure, ModelError, SystemModel


def to_terminal(
    model: SystemModel, info: InfoStructure, max_augmented: int = 100_000
) -> tuple[SystemModel, InfoStructure]:
    """Fold stage costs into an augmented terminal-cost instance.

    Augmented states are (x, a) pairs with a the cost incurred so far; the
    terminal cost becomes a + d_T(x). Every rollout's augmented terminal
    cost equals its original additive cost exactly.
    """
    if model.stage_costs is None:
        raise ModelError("instance has no stage costs to transform")
    T = model.horizon
    agents = model.agents()

    acc_sets: list[tuple[Fraction, ...]] = [(Fraction(0),)]
    for t in range(T):
        reachable = set()
        u_spaces = [model.action_spaces[(k, n, t)] for (k, n) in agents]
        for x in model.state_spaces[t]:
            for us in product(*u_spaces):
                c = model.stage(t, x, us)
                for a in acc_sets[t]:
                    reachable.add(a + c)
        acc = tuple(sorted(reachable))
        if len(acc) > max_augmented:
            raise ResourceLimitError("accumulated-cost values", len(acc), max_augmented)
        acc_sets.append(acc)

    state_spaces = tuple(
        FiniteSpace(tuple((x, a) for x in model.state_spaces[t] for a in acc_sets[t]))
        for t in range(T + 1)
    )

    dynamics: dict = {}
    for t in range(T):
        table: dict = {}
        u_spaces = [model.action_spaces[(k, n, t)] for (k, n) in agents]
        for (x, a) in state_spaces[t]:
            for us in product(*u_spaces):
                step_cost = model.stage(t, x, us)
                for w in model.disturbance_spaces[t]:
                    table[((x, a), us, w)] = (
                        model.step(t, x, us, w),
                        a + step_cost,
                    )
        dynamics[t] = table

    observation: dict = {}
    for (k, n) in agents:
        for t in range(T + 1):
            table = {}
            base = model.observation[(k, n, t)]
            for (x, a) in state_spaces[t]:
                for v in model.obs_noise_spaces[(k, n, t)]:
                    table[((x, a), v)] = base[(x, v)]
            observation[(k, n, t)] = table

    terminal = {
        (x, a): a + model.terminal_cost[x] for (x, a) in state_spaces[T]
    }

    augmented = SystemModel(
        horizon=T,
        agents_per_subsystem=model.agents_per_subsystem,
        state_spaces=state_spaces,
        action_spaces=model.action_spaces,
        disturbance_spaces=model.disturbance_spaces,
        obs_noise_spaces=model.obs_noise_spaces,
        obs_spaces=model.obs_spaces,
        dynamics=dynamics,
        observation=observation,
        terminal_cost=terminal,
        stage_costs=None,
    )

    zero = Fraction(0)
    initial_common = tuple(
        frozenset(((x0, zero), ys) for (x0, ys) in cset)
        for cset in info.initial_common
    )
    augmented_info = InfoStructure(memory=info.memory, initial_common=initial_common)
    return augmented, augmented_info
