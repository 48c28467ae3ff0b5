"""Two pursuers surrounding a drifting target on a line grid.

Both pursuers move one cell per step; the target drifts adversarially by at
most one cell. Positions saturate at the grid ends. Pursuer 2 reads the
target's position exactly and shares everything it knows with pursuer 1 at
a one-step delay; pursuer 1 additionally gets an immediate noisy target
reading (true position or one below) that it cannot transmit. Both see each
other's positions. The terminal cost is the summed distance to the target,
plus a penalty when the target is not between the pursuers.

The builder emits a dense instance wired so that pursuer 1 is the
better-informed subsystem (index 1) and pursuer 2 the deciding one
(index 2), matching the one-directional sharing above.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .dp import Caps, SolveResult, solve
from .model import (
    FiniteSpace,
    InfoStructure,
    ModelError,
    SystemModel,
    feasible_initial_realizations,
    uid,
    yid,
)

MOVES = (-1, 0, 1)


@dataclass(frozen=True)
class PursuitParams:
    grid: int
    horizon: int
    penalty: Fraction
    x1: int
    x2: int
    y0: int
    surround: str = "inclusive"  # "exclusive" is the documented fallback

    def check(self):
        if self.grid < 2:
            raise ModelError("grid must have at least 2 cells")
        if self.horizon < 0:
            raise ModelError("horizon must be nonnegative")
        if self.penalty <= 0:
            raise ModelError("penalty must be positive")
        for name, pos in (("x1", self.x1), ("x2", self.x2), ("y0", self.y0)):
            if not 1 <= pos <= self.grid:
                raise ModelError(f"{name}={pos} outside 1..{self.grid}")
        if self.surround not in ("inclusive", "exclusive"):
            raise ModelError(f"unknown surround mode {self.surround!r}")


def surround_indicator(x0: int, x1: int, x2: int, mode: str = "inclusive") -> int:
    """1 iff the target sits between the pursuers."""
    lo, hi = min(x1, x2), max(x1, x2)
    if mode == "exclusive":
        return 1 if lo < x0 < hi else 0
    return 1 if lo <= x0 <= hi else 0


def _clip(pos: int, grid: int) -> int:
    return max(1, min(grid, pos))


def build(params: PursuitParams) -> tuple[SystemModel, InfoStructure]:
    params.check()
    g = params.grid
    T = params.horizon

    cells = range(1, g + 1)
    states = FiniteSpace([(a, b, c) for a in cells for b in cells for c in cells])
    moves = FiniteSpace(MOVES)
    noise1 = FiniteSpace((-1, 0))
    noise2 = FiniteSpace((0,))
    obs1 = FiniteSpace(cells)
    obs2 = FiniteSpace([(a, b) for a in cells for b in cells])

    dynamics = {}
    for t in range(T):
        table = {}
        for x in states:
            for u1 in MOVES:
                for u2 in MOVES:
                    for w in MOVES:
                        table[(x, (u1, u2), w)] = (
                            _clip(x[0] + w, g),
                            _clip(x[1] + u1, g),
                            _clip(x[2] + u2, g),
                        )
        dynamics[t] = table

    obs_tables_1 = {(x, v): _clip(x[0] + v, g) for x in states for v in noise1}
    obs_tables_2 = {(x, 0): (x[0], x[1]) for x in states}

    terminal = {}
    for x in states:
        dist = Fraction(abs(x[0] - x[1]) + abs(x[0] - x[2]))
        if not surround_indicator(x[0], x[1], x[2], params.surround):
            dist += params.penalty
        terminal[x] = dist

    action_spaces = {}
    obs_noise = {}
    obs_spaces = {}
    observation = {}
    memory = {}
    for t in range(T + 1):
        action_spaces[(1, 1, t)] = moves
        action_spaces[(1, 2, t)] = moves
        obs_noise[(1, 1, t)] = noise1
        obs_noise[(1, 2, t)] = noise2
        obs_spaces[(1, 1, t)] = obs1
        obs_spaces[(1, 2, t)] = obs2
        observation[(1, 1, t)] = obs_tables_1
        observation[(1, 2, t)] = obs_tables_2
        shared = set()
        own = set()
        for s in range(t):
            shared.add(yid(1, 2, s))
            shared.add(uid(1, 2, s))
            own.add(yid(1, 1, s))
            own.add(uid(1, 1, s))
        memory[(1, 1, t)] = frozenset(shared | own)
        memory[(1, 2, t)] = frozenset(shared)

    model = SystemModel(
        horizon=T,
        agents_per_subsystem=(1, 1),
        state_spaces=tuple(states for _ in range(T + 1)),
        action_spaces=action_spaces,
        disturbance_spaces=tuple(moves for _ in range(T)),
        obs_noise_spaces=obs_noise,
        obs_spaces=obs_spaces,
        dynamics=dynamics,
        observation=observation,
        terminal_cost=terminal,
        stage_costs=None,
    )

    window = {
        _clip(params.y0 + d, g) for d in MOVES
    }
    admissible = frozenset(
        (x, ys)
        for (x, ys) in feasible_initial_realizations(model)
        if x[1] == params.x1 and x[2] == params.x2 and x[0] in window
    )
    if not admissible:
        raise ModelError("empty initial constraint")
    info = InfoStructure(
        memory=memory, initial_common=(admissible, admissible)
    )
    return model, info


TABLE1_CASES = (
    ((8, 8, 2), Fraction(18)),
    ((3, 6, 7), Fraction(4)),
    ((3, 3, 4), Fraction(14)),
    ((3, 5, 8), Fraction(4)),
)


@dataclass
class Table1Row:
    start: tuple[int, int, int]  # (x1, x2, y0)
    value: Fraction
    expected: Fraction
    matches: bool
    exclusive_value: Fraction | None
    stats: dict


def table1_params(start: tuple[int, int, int]) -> PursuitParams:
    x1, x2, y0 = start
    return PursuitParams(
        grid=8, horizon=3, penalty=Fraction(10), x1=x1, x2=x2, y0=y0
    )


def solve_row(params: PursuitParams, caps: Caps | None = None) -> SolveResult:
    model, info = build(params)
    return solve(model, info, caps)


def table1(caps: Caps | None = None) -> list[Table1Row]:
    """Solve the four reference starts; on a mismatch, also report the
    exclusive surround variant rather than silently switching."""
    rows = []
    for start, expected in TABLE1_CASES:
        params = table1_params(start)
        result = solve_row(params, caps)
        matches = result.value == expected
        exclusive = None
        if not matches:
            exclusive = solve_row(
                replace(params, surround="exclusive"), caps
            ).value
        rows.append(
            Table1Row(
                start=start,
                value=result.value,
                expected=expected,
                matches=matches,
                exclusive_value=exclusive,
                stats=result.stats,
            )
        )
    return rows
