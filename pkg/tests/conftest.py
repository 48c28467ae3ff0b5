"""Shared fixtures and tiny hand-built instances."""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import pytest

from nmx.model import (
    FiniteSpace,
    InfoStructure,
    SystemModel,
    feasible_initial_realizations,
    uid,
    yid,
)


def chain_model(
    horizon=2,
    states=("a", "b"),
    actions=(0, 1),
    step=None,
    terminal=None,
    observed=True,
):
    """Single agent, deterministic single-noise plant, full self-memory."""
    sp = FiniteSpace(states)
    usp = FiniteSpace(actions)
    wsp = FiniteSpace((0,))
    vsp = FiniteSpace((0,))
    ysp = sp if observed else FiniteSpace(("none",))
    if step is None:
        step = lambda x, u, w: x  # identity dynamics
    dynamics = {
        t: {
            (x, (u,), w): step(x, u, w)
            for x in sp
            for u in usp
            for w in wsp
        }
        for t in range(horizon)
    }
    obs = {
        (1, 1, t): {
            (x, 0): (x if observed else "none") for x in sp
        }
        for t in range(horizon + 1)
    }
    if terminal is None:
        terminal = {x: Fraction(i) for i, x in enumerate(sp)}
    model = SystemModel(
        horizon=horizon,
        agents_per_subsystem=(1,),
        state_spaces=tuple(sp for _ in range(horizon + 1)),
        action_spaces={(1, 1, t): usp for t in range(horizon + 1)},
        disturbance_spaces=tuple(wsp for _ in range(horizon)),
        obs_noise_spaces={(1, 1, t): vsp for t in range(horizon + 1)},
        obs_spaces={(1, 1, t): ysp for t in range(horizon + 1)},
        dynamics=dynamics,
        observation=obs,
        terminal_cost=terminal,
        stage_costs=None,
    )
    memory = {
        (1, 1, t): frozenset(
            {yid(1, 1, s) for s in range(t)} | {uid(1, 1, s) for s in range(t)}
        )
        for t in range(horizon + 1)
    }
    info = InfoStructure(
        memory=memory,
        initial_common=(frozenset(feasible_initial_realizations(model)),),
    )
    return model, info


@pytest.fixture
def tiny_chain():
    return chain_model()
