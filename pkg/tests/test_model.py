"""Instance declaration, validation, information splits, simulation."""

from fractions import Fraction

import pytest

from nmx.model import (
    DictStrategy,
    FiniteSpace,
    FnStrategy,
    InfoStructure,
    ModelError,
    Primitives,
    StrategyUndefinedError,
    enumerate_primitives,
    simulate,
    uid,
    validate,
    yid,
)
from nmx.pursuit import PursuitParams, build
from nmx.randgen import GenBounds, random_instance

from conftest import chain_model


def test_space_rejects_duplicates_and_empty():
    with pytest.raises(ModelError):
        FiniteSpace([])
    with pytest.raises(ModelError):
        FiniteSpace(["a", "a"])


def test_full_sharing_single_subsystem_is_valid(tiny_chain):
    model, info = tiny_chain
    assert validate(model, info) == []


def test_privacy_violation_is_reported():
    # agent (1,2) privately holds y[1,2]@0 (its teammate lacks it, so it is
    # not common in subsystem 2) while subsystem 1's common info has it: a
    # variable cannot be both private to a later subsystem and common to an
    # earlier one
    model, _ = chain_model()
    from nmx.model import SystemModel, feasible_initial_realizations

    agents = ((1, 1), (1, 2), (2, 2))
    base_u = model.action_spaces[(1, 1, 0)]
    base_v = model.obs_noise_spaces[(1, 1, 0)]
    base_y = model.obs_spaces[(1, 1, 0)]
    m = SystemModel(
        horizon=1,
        agents_per_subsystem=(1, 2),
        state_spaces=model.state_spaces[:2],
        action_spaces={(k, n, t): base_u for (k, n) in agents for t in (0, 1)},
        disturbance_spaces=model.disturbance_spaces[:1],
        obs_noise_spaces={(k, n, t): base_v for (k, n) in agents for t in (0, 1)},
        obs_spaces={(k, n, t): base_y for (k, n) in agents for t in (0, 1)},
        dynamics={
            0: {
                (x, us, 0): x
                for x in model.state_spaces[0]
                for us in __import__("itertools").product(
                    base_u.elements, repeat=3
                )
            }
        },
        observation={
            (k, n, t): model.observation[(1, 1, 0)]
            for (k, n) in agents
            for t in (0, 1)
        },
        terminal_cost=model.terminal_cost,
        stage_costs=None,
    )
    mem = {
        (1, 1, 0): frozenset(),
        (1, 2, 0): frozenset(),
        (2, 2, 0): frozenset(),
        (1, 1, 1): frozenset({yid(1, 2, 0)}),
        (1, 2, 1): frozenset({yid(1, 2, 0)}),
        (2, 2, 1): frozenset(),
    }
    feas = frozenset(feasible_initial_realizations(m))
    info2 = InfoStructure(memory=mem, initial_common=(feas, feas))
    bad = validate(m, info2)
    assert any("privacy violation" in b for b in bad)
    assert any("(1,2)" in b and "t=1" in b for b in bad)


def test_pursuit_structure_is_valid():
    model, info = build(
        PursuitParams(grid=4, horizon=2, penalty=Fraction(10), x1=1, x2=4, y0=2)
    )
    assert validate(model, info) == []


def test_common_information_equals_shared_memory(tiny_chain):
    model, info = tiny_chain
    t = 2
    assert info.common_information(1, t, model) == info.memory_ids(1, 1, t)
    assert info.private_information(1, 1, t, model) == ()


def test_common_information_empty_when_memories_disjoint():
    model, info = chain_model()
    # two agents in one subsystem remembering disjoint things
    from nmx.model import SystemModel

    base_u = model.action_spaces[(1, 1, 0)]
    base_v = model.obs_noise_spaces[(1, 1, 0)]
    base_y = model.obs_spaces[(1, 1, 0)]
    m = SystemModel(
        horizon=1,
        agents_per_subsystem=(2,),
        state_spaces=model.state_spaces[:2],
        action_spaces={(k, 1, t): base_u for k in (1, 2) for t in (0, 1)},
        disturbance_spaces=model.disturbance_spaces[:1],
        obs_noise_spaces={(k, 1, t): base_v for k in (1, 2) for t in (0, 1)},
        obs_spaces={(k, 1, t): base_y for k in (1, 2) for t in (0, 1)},
        dynamics={
            0: {
                (x, (u1, u2), 0): x
                for x in model.state_spaces[0]
                for u1 in base_u
                for u2 in base_u
            }
        },
        observation={
            (k, 1, t): model.observation[(1, 1, 0)] for k in (1, 2) for t in (0, 1)
        },
        terminal_cost=model.terminal_cost,
        stage_costs=None,
    )
    from nmx.model import feasible_initial_realizations

    mem = {
        (1, 1, 0): frozenset(),
        (2, 1, 0): frozenset(),
        (1, 1, 1): frozenset({yid(1, 1, 0)}),
        (2, 1, 1): frozenset({yid(2, 1, 0)}),
    }
    info2 = InfoStructure(
        memory=mem,
        initial_common=(frozenset(feasible_initial_realizations(m)),),
    )
    assert validate(m, info2) == []
    assert info2.common_information(1, 1, m) == ()
    assert info2.private_information(1, 1, 1, m) == (yid(1, 1, 0),)


def test_new_information_at_zero_is_initial_common(tiny_chain):
    model, info = tiny_chain
    assert info.new_information(1, 0, model) == info.common_information(1, 0, model)
    # full sharing with delay one: increments are exactly the previous step
    assert all(
        v.time == 1 for v in info.new_information(1, 2, model)
    )


def test_pursuit_new_information_content():
    model, info = build(
        PursuitParams(grid=4, horizon=2, penalty=Fraction(10), x1=1, x2=4, y0=2)
    )
    # deciding subsystem learns the sharing agent's previous observation and
    # action, one step delayed
    assert info.new_information(2, 1, model) == (yid(1, 2, 0), uid(1, 2, 0))
    assert info.new_information(2, 2, model) == (yid(1, 2, 1), uid(1, 2, 1))
    # the better-informed subsystem additionally gets its own
    assert set(info.new_information(1, 1, model)) == {
        yid(1, 1, 0),
        uid(1, 1, 0),
        yid(1, 2, 0),
        uid(1, 2, 0),
    }


def test_nested_information_invariants_on_random_instances():
    for seed in range(25):
        model, info = random_instance(seed)
        assert validate(model, info) == []
        N = model.num_subsystems
        for t in range(model.horizon + 1):
            commons = [
                set(info.common_information(n, t, model)) for n in range(1, N + 1)
            ]
            news = [set(info.new_information(n, t, model)) for n in range(1, N + 1)]
            for n in range(1, N):
                assert commons[n] <= commons[n - 1]
                assert news[n] <= news[n - 1]
            for (k, n) in model.agents():
                common = set(info.common_information(n, t, model))
                private = set(info.private_information(k, n, t, model))
                assert common.isdisjoint(private)
                assert common | private == set(info.memory[(k, n, t)])
        for n in range(1, N + 1):
            for t in range(model.horizon):
                assert set(info.common_information(n, t, model)) <= set(
                    info.common_information(n, t + 1, model)
                )


def test_simulate_horizon_zero_costs_terminal():
    model, info = chain_model(horizon=0)
    prim = next(enumerate_primitives(model, info))
    strat = FnStrategy(lambda *a: 0)
    traj = simulate(model, info, strat, prim)
    assert traj.cost == model.terminal_cost[prim.x0]
    assert traj.states == (prim.x0,)


def test_simulate_identity_chain_keeps_state():
    model, info = chain_model(horizon=3)
    prim = Primitives(x0="b", w=(0, 0, 0), v=((0,),) * 4)
    traj = simulate(model, info, FnStrategy(lambda *a: 1), prim)
    assert traj.states == ("b",) * 4
    assert traj.cost == model.terminal_cost["b"]


def test_simulate_is_pure(tiny_chain):
    model, info = tiny_chain
    prim = next(enumerate_primitives(model, info))
    s = FnStrategy(lambda k, n, t, y, l, c: 0)
    t1 = simulate(model, info, s, prim)
    t2 = simulate(model, info, s, prim)
    assert t1.states == t2.states
    assert t1.actions == t2.actions
    assert t1.cost == t2.cost


def test_simulate_undefined_strategy_names_agent_and_time():
    model, info = chain_model(horizon=1)
    strat = DictStrategy({})
    prim = next(enumerate_primitives(model, info))
    with pytest.raises(StrategyUndefinedError) as err:
        simulate(model, info, strat, prim)
    assert err.value.agent == 1
    assert err.value.subsystem == 1
    assert err.value.time == 0


def test_pursuit_stand_still_worst_case_by_enumeration():
    # hold position from (3,3) with the target first seen near 4: the target
    # can walk away to the far edge
    from nmx.dp import evaluate_strategy

    params = PursuitParams(
        grid=8, horizon=3, penalty=Fraction(10), x1=3, x2=3, y0=4
    )
    model, info = build(params)
    stand = FnStrategy(lambda k, n, t, y, l, c: 0)
    value = evaluate_strategy(model, info, stand)

    worst = None
    for prim in enumerate_primitives(model, info):
        cost = simulate(model, info, stand, prim).cost
        worst = cost if worst is None else max(worst, cost)
    assert value == worst
    # hand value: target from 5 runs to 8, both pursuers stuck at 3
    assert value == Fraction(10 + 5 + 5)
