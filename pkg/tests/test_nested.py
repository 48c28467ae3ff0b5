"""Hat-system construction, rollout equivalence, strategy lift/lower."""

import random
from fractions import Fraction
from itertools import product

import pytest

from nmx.dp import evaluate_strategy
from nmx.model import (
    DictStrategy,
    FnStrategy,
    ModelError,
    enumerate_primitives,
    simulate,
    uid,
    yid,
)
from nmx.nested import (
    build_hat_model,
    hat_rollout,
    lift_strategy,
    lower_strategy,
)
from nmx.oracle import encode_game
from nmx.pursuit import PursuitParams, build
from nmx.randgen import GenBounds, random_instance

from conftest import chain_model


def random_agent_strategy(model, info, seed):
    """Uniform random action table over reachable arguments."""
    rng = random.Random(seed)
    enc = encode_game(model, info)
    table = {}
    for aid, arg in enumerate(enc.search_args):
        space = enc.search_action_spaces[aid]
        table[arg] = space.elements[rng.randrange(len(space))]

    class _S(DictStrategy):
        def action(self, k, n, t, y, l_vals, c_vals):
            if t >= model.horizon:
                return model.action_spaces[(k, n, t)].elements[0]
            return super().action(k, n, t, y, l_vals, c_vals)

    return _S(table)


def test_single_agent_full_sharing_hat_is_observed_chain(tiny_chain):
    model, info = tiny_chain
    hm = build_hat_model(model, info)
    prim = next(enumerate_primitives(model, info))
    lifted = lift_strategy(model, info, FnStrategy(lambda *a: 0))
    hats, z_real, cost = hat_rollout(hm, lifted, prim)
    # identity observation, no private memory: hat state is (x, ((y, ()),))
    for hat in hats:
        x, comps = hat
        assert comps[0][0] == x
        assert comps[0][1] == ()


def test_pursuit_hat_state_carries_current_readings():
    params = PursuitParams(grid=3, horizon=1, penalty=Fraction(10), x1=1, x2=3, y0=2)
    model, info = build(params)
    hm = build_hat_model(model, info)
    prim = next(enumerate_primitives(model, info))
    lifted = lift_strategy(model, info, FnStrategy(lambda *a: 0))
    hats, _, _ = hat_rollout(hm, lifted, prim)
    for hat in hats:
        (x0, x1, x2), comps = hat
        y1, l1 = comps[0]
        y2, l2 = comps[1]
        assert l1 == () and l2 == ()
        assert y2 == (x0, x1)
        assert y1 in (max(1, x0 - 1), x0)


@pytest.mark.parametrize("seed", range(12))
def test_hat_rollout_reproduces_original(seed):
    """Exhaustive primitive sweep: states, new information and cost agree."""
    model, info = random_instance(seed)
    if model.has_stage_costs:
        return
    hm = build_hat_model(model, info)
    strat = random_agent_strategy(model, info, seed)
    lifted = lift_strategy(model, info, strat)
    for prim in enumerate_primitives(model, info):
        traj = simulate(model, info, strat, prim)
        hats, z_real, cost = hat_rollout(hm, lifted, prim)
        assert cost == traj.cost
        assert tuple(h[0] for h in hats) == traj.states
        for n in range(1, model.num_subsystems + 1):
            for t in range(1, model.horizon + 1):
                ids = hm.z_ids[(n, t)]
                expect = tuple(traj.var_values[v] for v in ids)
                assert z_real[(n, t)] == expect


def test_hat_observe_returns_recorded_actions():
    # new information made of past actions only: the hat observation is the
    # realized action tuple
    model, info = chain_model(horizon=1)
    from nmx.model import InfoStructure

    mem = {
        (1, 1, 0): frozenset(),
        (1, 1, 1): frozenset({uid(1, 1, 0)}),
    }
    info2 = InfoStructure(memory=mem, initial_common=info.initial_common)
    hm = build_hat_model(model, info2)
    hat = hm.initial_hat(("a", ("a",)))

    class ConstRule:
        def get(self, y, l):
            return 1

    z = hm.hat_observe(1, 0, hat, ((ConstRule(),),))
    assert z == (1,)


def test_unreconstructible_identifier_raises_with_name():
    # agent suddenly remembers an observation from two steps back that no
    # one carried privately
    model, info = chain_model(horizon=2)
    from nmx.model import InfoStructure

    mem = dict(info.memory)
    mem[(1, 1, 2)] = frozenset({yid(1, 1, 0)})
    mem[(1, 1, 1)] = frozenset()
    from nmx.nested import HatConstructionError

    info2 = InfoStructure(memory=mem, initial_common=info.initial_common)
    with pytest.raises(HatConstructionError) as err:
        build_hat_model(model, info2)
    assert "y[1,1]@0" in str(err.value)


def test_lift_constant_strategy_round_trip(tiny_chain):
    model, info = tiny_chain
    const = FnStrategy(lambda *a: 1)
    lifted = lift_strategy(model, info, const)
    lowered = lower_strategy(lifted)
    for prim in enumerate_primitives(model, info):
        t1 = simulate(model, info, const, prim)
        t2 = simulate(model, info, lowered, prim)
        assert t1.actions == t2.actions
        assert t1.cost == t2.cost


@pytest.mark.parametrize("seed", range(10))
def test_lift_lower_round_trip_random(seed):
    model, info = random_instance(seed)
    strat = random_agent_strategy(model, info, seed * 7 + 1)
    lowered = lower_strategy(lift_strategy(model, info, strat))
    for prim in enumerate_primitives(model, info):
        t1 = simulate(model, info, strat, prim)
        t2 = simulate(model, info, lowered, prim)
        assert t1.actions == t2.actions
    assert evaluate_strategy(model, info, strat) == evaluate_strategy(
        model, info, lowered
    )


def test_pursuit_stand_still_round_trip_small():
    params = PursuitParams(grid=4, horizon=2, penalty=Fraction(10), x1=3, x2=3, y0=3)
    model, info = build(params)
    stand = FnStrategy(lambda k, n, t, y, l, c: 0)
    lowered = lower_strategy(lift_strategy(model, info, stand))
    for prim in enumerate_primitives(model, info):
        t1 = simulate(model, info, stand, prim)
        t2 = simulate(model, info, lowered, prim)
        assert t1.actions == t2.actions
        assert t1.cost == t2.cost


def test_hat_model_requires_terminal_cost_form():
    model, info = random_instance(3, GenBounds(additive=True))
    if not model.has_stage_costs:
        return
    with pytest.raises(ModelError):
        build_hat_model(model, info)


def test_hat_debug_text_lists_structure(tiny_chain):
    model, info = tiny_chain
    hm = build_hat_model(model, info)
    text = hm.debug_text()
    assert text.startswith("nmx-hat v1")
    assert "[new-information n=1 t=1]" in text
