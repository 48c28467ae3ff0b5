"""Set-valued information states and their two computation routes.

A level-n information state is the finite set of tuples
(hat state, level-1 state, ..., level-(n-1) state) consistent with what
subsystem n has seen and decided so far. Two independent routes compute it:

* `evolve_infostate` — the one-step recursion: keep the members that predict
  the realized new information (interim pruning), then push the survivors
  through the hat dynamics over all fresh primitives, updating each member's
  nested states recursively with curried prescriptions.
* `definitional_infostate` — direct enumeration: thread every primitive
  realization through the hat system along the given history, group the
  surviving paths by what each subsystem can distinguish, and read the
  member sets off the groups. No recursion is involved; this is the oracle
  the recursion is tested against.

States are hash-consed in a `Workspace`: members are integer-encoded and
canonically sorted, so set equality is exact and O(size).

The module also owns the choice-point walk: the transitive enumeration of
every (prescription argument, agent, observation/private value) a decision
bundle can be applied at. Decision enumeration and reachability factor
through connected components of the point/member graph — members that can
never share an observation realization never interact, which is what makes
the desk-scale examples tractable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .errors import InfeasibleObservation, ResourceLimitError
from .model import ModelError
from .nested import HatModel, TableRule


@dataclass(frozen=True)
class InfoState:
    """Interned set-valued information state.

    members are (hat_id, nested) pairs, nested being the uids of the
    member's level-1..level-(n-1) states; sorted and duplicate-free.
    """

    uid: int
    level: int
    time: int
    members: tuple

    def __len__(self):
        return len(self.members)

    def hat_ids(self) -> tuple[int, ...]:
        return tuple(m[0] for m in self.members)


@dataclass(frozen=True)
class CompleteAction:
    """A subsystem's one-step decision bundle.

    prescriptions[m-1] maps argument tuples (uids of the level-m and higher
    states the prescribed subsystem conditions on) to subsystem-m partial
    actions; own is this subsystem's partial action. Maps are stored as
    sorted tuples so complete actions hash and compare canonically.
    """

    level: int
    prescriptions: tuple  # per m: tuple of (args, rules) sorted by args
    own: tuple  # agent rules for subsystem `level`

    def __post_init__(self):
        object.__setattr__(
            self, "_maps", tuple(dict(entries) for entries in self.prescriptions)
        )

    def prescription(self, m: int, args: tuple):
        try:
            return self._maps[m - 1][args]
        except KeyError:
            raise ModelError(
                f"prescription for subsystem {m} undefined at {args}"
            ) from None

    def encode_key(self):
        return (self.level, self.prescriptions, self.own)


class Workspace:
    """Interning context: hat states, information states, memo tables."""

    def __init__(self, hm: HatModel):
        self.hm = hm
        self.info = hm.info
        self.model = hm.model
        self._hat_ids: dict[tuple, int] = {}
        self._hat_vals: list[tuple] = []
        self._state_ids: dict[tuple, int] = {}
        self._states: list[InfoState] = []
        self._evolve_memo: dict = {}
        self._targs_memo: dict = {}
        self._points_memo: dict = {}
        self._initial: dict[int, InfoState] = {}
        self._image_memo: dict = {}
        self._obs_memo: dict = {}

    def hat_id(self, hat: tuple) -> int:
        hid = self._hat_ids.get(hat)
        if hid is None:
            hid = len(self._hat_vals)
            self._hat_ids[hat] = hid
            self._hat_vals.append(hat)
        return hid

    def hat_val(self, hid: int) -> tuple:
        return self._hat_vals[hid]

    def intern_state(self, level: int, time: int, members) -> InfoState:
        mem = tuple(sorted(set(members)))
        key = (level, time, mem)
        sid = self._state_ids.get(key)
        if sid is None:
            sid = len(self._states)
            self._state_ids[key] = sid
            self._states.append(InfoState(uid=sid, level=level, time=time, members=mem))
        return self._states[sid]

    def state(self, sid: int) -> InfoState:
        return self._states[sid]

    def num_states(self) -> int:
        return len(self._states)

    # action-level step/observation caches: the hat tables only depend on the
    # realized action tuple, and distinct (hat, actions) pairs are few next
    # to the number of decision bundles that induce them

    def observe_z(self, n: int, t: int, hat_id: int, us: tuple) -> tuple:
        key = (n, t, hat_id, us)
        got = self._obs_memo.get(key)
        if got is None:
            got = self.hm.hat_observe_from_actions(n, t, self._hat_vals[hat_id], us)
            self._obs_memo[key] = got
        return got

    def image_ids(self, t: int, hat_id: int, us: tuple) -> tuple:
        """Successor hat ids over every fresh primitive combination."""
        key = (t, hat_id, us)
        got = self._image_memo.get(key)
        if got is None:
            hm = self.hm
            model = self.model
            hat = self._hat_vals[hat_id]
            agents = hm.agents
            x_next_by_w = [
                model.step(t, hat[0], us, w) for w in model.disturbance_spaces[t]
            ]
            v_spaces = [
                model.obs_noise_spaces[(k, nn, t + 1)].elements for (k, nn) in agents
            ]
            ys = tuple(hat[1][i][0] for i in range(len(agents)))
            l_next = tuple(
                tuple(
                    hm._resolve(var, t, hat, ys, us)
                    for var in hm.private_ids[(k, nn, t + 1)]
                )
                for (k, nn) in agents
            )
            out = []
            for x_next in x_next_by_w:
                for v_next in product(*v_spaces):
                    comps = tuple(
                        (
                            model.observe(k, nn, t + 1, x_next, v_next[i]),
                            l_next[i],
                        )
                        for i, (k, nn) in enumerate(agents)
                    )
                    out.append(self.hat_id((x_next, comps)))
            got = tuple(out)
            self._image_memo[key] = got
        return got

    def applied_us(self, n: int, member, theta, higher: tuple) -> tuple:
        """Realized action tuple at a member under a decision bundle."""
        rules = member_rules(self, n, member, theta, higher)
        return self.hm.applied_actions(self._hat_vals[member[0]], rules)


def initial_infostate(ws: Workspace, n: int) -> InfoState:
    """Level-n information state at t=0 from the initial common constraints."""
    if n in ws._initial:
        return ws._initial[n]
    constraint = ws.info.initial_common[n - 1]
    if not constraint:
        raise ModelError("inconsistent initial common information")
    nested = tuple(initial_infostate(ws, m).uid for m in range(1, n))
    members = [(ws.hat_id(ws.hm.initial_hat(real)), nested) for real in constraint]
    state = ws.intern_state(n, 0, members)
    ws._initial[n] = state
    return state


# ---------------------------------------------------------------------------
# decision bundles applied to one member


def member_rules(ws: Workspace, n: int, member, theta: CompleteAction, higher: tuple):
    """Per-subsystem rule tuple realized at a member of a level-n state.

    Lower subsystems get the prescription evaluated at the member's nested
    states, subsystem n its own partial action, higher ones the given
    exogenous partial actions.
    """
    _, nested = member
    rules = []
    for m in range(1, n):
        rules.append(theta.prescription(m, tuple(nested[m - 1:])))
    rules.append(theta.own)
    rules.extend(higher)
    return tuple(rules)


def transitive_args(ws: Workspace, state: InfoState, j: int) -> frozenset:
    """All level-(j..m-1) argument tuples read when evolving a level-m state."""
    key = (state.uid, j)
    got = ws._targs_memo.get(key)
    if got is not None:
        return got
    out = set()
    for (_, nested) in state.members:
        out.add(tuple(nested[j - 1:]))
        for m2 in range(j + 1, state.level):
            inner = ws.state(nested[m2 - 1])
            tail = tuple(nested[m2 - 1:])
            for prefix in transitive_args(ws, inner, j):
                out.add(prefix + tail)
    out = frozenset(out)
    ws._targs_memo[key] = out
    return out


def curried_action(
    ws: Workspace, n: int, member, theta: CompleteAction, m: int
) -> CompleteAction:
    """Subsystem m's complete action induced by theta at this member.

    Fixing the trailing argument states to the member's own realizations
    turns the level-n prescriptions into level-m ones; the domains are the
    argument tuples occurring transitively inside the member's level-m state.
    """
    _, nested = member
    suffix = tuple(nested[m - 1:])
    own_m = theta.prescription(m, suffix)
    s_m = ws.state(nested[m - 1])
    prescriptions = []
    for j in range(1, m):
        entries = []
        for prefix in sorted(transitive_args(ws, s_m, j)):
            entries.append((prefix, theta.prescription(j, prefix + suffix)))
        prescriptions.append(tuple(entries))
    return CompleteAction(level=m, prescriptions=tuple(prescriptions), own=own_m)


# ---------------------------------------------------------------------------
# recursion route


def evolve_infostate(
    ws: Workspace,
    n: int,
    state: InfoState,
    theta: CompleteAction,
    higher: tuple,
    z: tuple,
) -> InfoState:
    """One-step information-state update (interim pruning + image).

    higher holds the realized partial actions of subsystems n+1..N; z is the
    realized new information of subsystem n at time+1. Strategy objects are
    never consulted: the result is a pure function of the arguments.
    """
    key = (n, state.uid, theta.encode_key(), higher, z)
    memo = ws._evolve_memo
    got = memo.get(key)
    if got is not None:
        return got
    survivors = interim_members(ws, n, state, theta, higher, z)
    if not survivors:
        raise InfeasibleObservation(n, state.time, z)
    t = state.time
    new_members = set()
    for member, rules, us in survivors:
        nested_next = []
        for m in range(1, n):
            z_m = ws.observe_z(m, t, member[0], us)
            theta_m = curried_action(ws, n, member, theta, m)
            higher_m = tuple(rules[m:])
            s_m = ws.state(member[1][m - 1])
            nested_next.append(evolve_infostate(ws, m, s_m, theta_m, higher_m, z_m).uid)
        nested_next = tuple(nested_next)
        for hid in ws.image_ids(t, member[0], us):
            new_members.add((hid, nested_next))
    result = ws.intern_state(n, t + 1, new_members)
    memo[key] = result
    return result


def interim_members(
    ws: Workspace,
    n: int,
    state: InfoState,
    theta: CompleteAction,
    higher: tuple,
    z: tuple,
) -> list:
    """Members whose predicted new information matches z (the interim set)."""
    hm = ws.hm
    t = state.time
    out = []
    for member in state.members:
        rules = member_rules(ws, n, member, theta, higher)
        us = hm.applied_actions(ws.hat_val(member[0]), rules)
        if ws.observe_z(n, t, member[0], us) == z:
            out.append((member, rules, us))
    return out


# ---------------------------------------------------------------------------
# definitional route: primitive-path threading with per-level grouping


@dataclass(frozen=True)
class History:
    """A realized level-n coordinator history.

    z_seq[s] is the new-information realization at time s+1; thetas[s] the
    complete action taken at s; higher_seq[s] the exogenous partial actions
    of subsystems n+1..N at s. All three have the same length.
    """

    level: int
    z_seq: tuple
    thetas: tuple
    higher_seq: tuple

    @property
    def time(self) -> int:
        return len(self.z_seq)


class _Path:
    """One primitive-prefix hypothesis threaded through the hat system."""

    __slots__ = ("hid", "digests", "univ", "states")

    def __init__(self, hid, digests, univ):
        self.hid = hid  # interned hat state
        self.digests = digests  # per level 1..N: what that subsystem can distinguish
        self.univ = univ  # per level 1..N: inside that subsystem's initial constraint
        self.states = []  # per level 1..N-1: state uid (filled by grouping)


def definitional_infostate(ws: Workspace, n: int, history: History) -> InfoState | None:
    """Level-n information state by direct primitive enumeration.

    Returns None when the history is inconsistent (no primitive realization
    reproduces it) — the diagnostic case, distinct from a model error.
    """
    paths = _thread_paths(ws, n, history)
    if not paths:
        return None
    members = {(p.hid, tuple(p.states[: n - 1])) for p in paths}
    return ws.intern_state(n, history.time, members)


def _initial_paths(ws: Workspace, n: int) -> list:
    """Hypothesis paths for every level-n admissible initial realization."""
    hm = ws.hm
    model = ws.model
    agents = hm.agents
    constraints = ws.info.initial_common
    N = model.num_subsystems
    paths = []
    for x0 in model.state_spaces[0]:
        for vs in product(*[model.obs_noise_spaces[(k, nn, 0)] for (k, nn) in agents]):
            ys = tuple(model.observe(k, nn, 0, x0, v) for (k, nn), v in zip(agents, vs))
            real = (x0, ys)
            if real not in constraints[n - 1]:
                continue
            hid = ws.hat_id(hm.initial_hat(real))
            univ = tuple(real in constraints[m - 1] for m in range(1, N + 1))
            paths.append(_Path(hid, ("c0",) * N, univ))
    return paths


def _group_states(ws: Workspace, paths: list, n: int, time: int) -> list:
    """Fill per-path nested states by grouping paths on subsystem digests.

    The level-m state along a path is the member set read off the paths in
    subsystem m's constraint universe that share its level-m digest. Paths
    whose digest no in-universe path shares are incoherent hypotheses and
    are dropped. Levels 1..n-1 are filled, bottom up.
    """
    for p in paths:
        p.states = []
    alive = paths
    for m in range(1, n):
        groups: dict = {}
        for p in alive:
            if p.univ[m - 1]:
                groups.setdefault(p.digests[m - 1], []).append(p)
        states = {}
        for dig, group in groups.items():
            members = {(q.hid, tuple(q.states[: m - 1])) for q in group}
            states[dig] = ws.intern_state(m, time, members).uid
        kept = []
        for p in alive:
            sid = states.get(p.digests[m - 1])
            if sid is None:
                continue
            p.states.append(sid)
            kept.append(p)
        alive = kept
    return alive


def _advance_paths(ws: Workspace, paths: list, n: int, time: int, decide) -> list:
    """One forward step: apply decisions per path, branch on fresh primitives.

    decide(p) returns the per-subsystem rule tuple for path p, or None to
    drop the hypothesis. A subsystem's digest grows by its realized new
    information plus everything it can see of the step's decisions: the
    realized partial actions of itself and above, and the argument states
    its curried prescriptions were evaluated with."""
    hm = ws.hm
    N = ws.model.num_subsystems
    out = []
    for p in paths:
        rules = decide(p)
        if rules is None:
            continue
        us = hm.applied_actions(ws.hat_val(p.hid), rules)
        z_all = tuple(ws.observe_z(m, time, p.hid, us) for m in range(1, N + 1))
        digests = tuple(
            (
                p.digests[m - 1],
                z_all[m - 1],
                tuple(rules[m - 1:]),
                tuple(p.states[m - 1: n - 1]),
            )
            for m in range(1, N + 1)
        )
        for hid in ws.image_ids(time, p.hid, us):
            out.append(_Path(hid, digests, p.univ))
    return out


def _thread_paths(ws: Workspace, n: int, history: History) -> list:
    """Run the primitive-path sweep along a level-n history."""
    paths = _group_states(ws, _initial_paths(ws, n), n, 0)
    for s in range(history.time):
        theta = history.thetas[s]
        higher = history.higher_seq[s]
        z_target = history.z_seq[s]

        def decide(p, _theta=theta, _higher=higher):
            member = (None, tuple(p.states[: n - 1]))
            try:
                return member_rules(ws, n, member, _theta, _higher)
            except ModelError:
                return None

        paths = _advance_paths(ws, paths, n, s, decide)
        paths = [p for p in paths if p.digests[n - 1][1] == z_target]
        if not paths:
            return []
        paths = _group_states(ws, paths, n, s + 1)
    return paths


# ---------------------------------------------------------------------------
# choice points, components, decision enumeration


OWN_KEY = ("own",)


def _decision_key(n: int, N: int, j: int, m: int, nested, suffix):
    """Point-key of the decision object driving subsystem j at this depth."""
    if j < m:
        return ("p", j, tuple(nested[j - 1:]) + suffix)
    if j < n:
        return ("p", j, tuple(suffix[j - m:]))
    if j == n:
        return OWN_KEY
    return ("higher", j)


def _point_sort_key(point):
    deckey, j, k, yl = point
    if deckey[0] == "p":
        group = (0, deckey[1], deckey[2])
    elif deckey == OWN_KEY:
        group = (1, 0, ())
    else:
        group = (2, deckey[1], ())
    return (group, k, repr(yl))


def collect_points(ws: Workspace, n: int, state: InfoState):
    """Transitive choice points of a level-n realization.

    Returns (points, member_points):
      points: dict point -> action FiniteSpace, point = (deckey, j, k, yl);
      member_points: per top-level member, the frozenset of points its
      one-step evolution can read.
    Deterministic: iteration follows canonical member order.
    """
    model = ws.model
    hm = ws.hm
    N = model.num_subsystems
    t = state.time
    memo = ws._points_memo

    def subtree(s: InfoState, suffix: tuple) -> frozenset:
        key = (s.uid, suffix)
        got = memo.get(key)
        if got is not None:
            return got
        pts = set()
        m = s.level
        for (h, nested) in s.members:
            hat = ws.hat_val(h)
            for j in range(1, N + 1):
                deckey = _decision_key(n, N, j, m, nested, suffix)
                for k in model.subsystem_agents(j):
                    i = hm.agent_index[(k, j)]
                    pts.add((deckey, j, k, hat[1][i]))
            for m2 in range(1, m):
                inner = ws.state(nested[m2 - 1])
                pts |= subtree(inner, tuple(nested[m2 - 1:]) + suffix)
        pts = frozenset(pts)
        memo[key] = pts
        return pts

    member_points = []
    points: dict = {}
    for (h, nested) in state.members:
        hat = ws.hat_val(h)
        pts = set()
        for j in range(1, N + 1):
            deckey = _decision_key(n, N, j, n, nested, ())
            for k in model.subsystem_agents(j):
                i = hm.agent_index[(k, j)]
                pts.add((deckey, j, k, hat[1][i]))
        for m2 in range(1, n):
            inner = ws.state(nested[m2 - 1])
            pts |= subtree(inner, tuple(nested[m2 - 1:]))
        member_points.append(frozenset(pts))
        for pt in pts:
            if pt not in points:
                points[pt] = model.action_spaces[(pt[2], pt[1], t)]
    return points, member_points


def observation_read_points(ws: Workspace, n: int, state: InfoState):
    """Per member: the points its new-information prediction reads."""
    model = ws.model
    hm = ws.hm
    N = model.num_subsystems
    t = state.time
    u_ids = [v for v in hm.z_ids[(n, t + 1)] if v.kind == "u" and v.time == t]
    out = []
    for (h, nested) in state.members:
        hat = ws.hat_val(h)
        pts = []
        for var in u_ids:
            j, k = var.subsystem, var.agent
            deckey = _decision_key(n, N, j, n, nested, ())
            i = hm.agent_index[(k, j)]
            pts.append(((deckey, j, k, hat[1][i]), var))
        out.append(tuple(pts))
    return out


def member_possible_observations(ws: Workspace, n: int, state: InfoState):
    """Per member: every new-information value some decision can realize."""
    hm = ws.hm
    model = ws.model
    t = state.time
    agents = hm.agents
    read_points = observation_read_points(ws, n, state)
    out = []
    for member, pts in zip(state.members, read_points):
        hat = ws.hat_val(member[0])
        slots = [(hm.agent_index[(var.agent, var.subsystem)], var) for (_, var) in pts]
        spaces = [model.action_spaces[(var.agent, var.subsystem, t)] for (_, var) in pts]
        zs = set()
        for combo in product(*[sp.elements for sp in spaces]):
            us = [None] * len(agents)
            for (i, _), u in zip(slots, combo):
                us[i] = u
            zs.add(hm.hat_observe_from_actions(n, t, hat, tuple(us)))
        out.append(frozenset(zs))
    return out


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        parent = self.parent
        root = x
        while parent.setdefault(root, root) != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


@dataclass
class Component:
    """An independent block of the decision problem at one realization."""

    member_indices: tuple[int, ...]
    points: tuple  # canonical order
    spaces: tuple  # aligned action spaces


def decision_components(ws: Workspace, n: int, state: InfoState):
    """Split the choice points into independently optimizable components.

    Points touching a common member couple; members whose possible
    new-information sets intersect can share an interim fate and couple too.
    """
    points, member_points = collect_points(ws, n, state)
    possible = member_possible_observations(ws, n, state)
    uf = _UnionFind()
    for idx, pts in enumerate(member_points):
        tag = ("member", idx)
        for pt in pts:
            uf.union(tag, ("point", pt))
    items = sorted(range(len(state.members)))
    for a in items:
        for b in items:
            if b <= a:
                continue
            if possible[a] & possible[b]:
                uf.union(("member", a), ("member", b))
    groups: dict = {}
    for idx in range(len(state.members)):
        groups.setdefault(uf.find(("member", idx)), [[], []])[0].append(idx)
    for pt in points:
        groups.setdefault(uf.find(("point", pt)), [[], []])[1].append(pt)
    comps = []
    for root in sorted(groups, key=repr):
        midx, pts = groups[root]
        pts_sorted = tuple(sorted(pts, key=_point_sort_key))
        comps.append(
            Component(
                member_indices=tuple(sorted(midx)),
                points=pts_sorted,
                spaces=tuple(points[pt] for pt in pts_sorted),
            )
        )
    return comps, points, member_points


def materialize_action(
    ws: Workspace, n: int, t: int, assignment: dict
) -> tuple[CompleteAction, tuple]:
    """Build the canonical decision bundle from point -> action choices."""
    N = ws.model.num_subsystems
    presc_dom: dict = {}
    own_dom: dict = {}
    higher_dom: dict = {}
    for (deckey, j, k, yl), u in assignment.items():
        if deckey[0] == "p":
            presc_dom.setdefault((deckey[1], deckey[2]), {}).setdefault(k, []).append((yl, u))
        elif deckey == OWN_KEY:
            own_dom.setdefault(k, []).append((yl, u))
        else:
            higher_dom.setdefault((deckey[1], k), []).append((yl, u))
    prescriptions = []
    for m in range(1, n):
        entries = []
        for (j, args), per_agent in sorted(presc_dom.items(), key=lambda e: (e[0][0], e[0][1])):
            if j != m:
                continue
            rules = tuple(
                TableRule(per_agent.get(k, ())) for k in ws.model.subsystem_agents(m)
            )
            entries.append((args, rules))
        prescriptions.append(tuple(sorted(entries)))
    own = tuple(
        TableRule(own_dom.get(k, ())) for k in ws.model.subsystem_agents(n)
    )
    higher = tuple(
        tuple(
            TableRule(higher_dom.get((j, k), ()))
            for k in ws.model.subsystem_agents(j)
        )
        for j in range(n + 1, N + 1)
    )
    return CompleteAction(level=n, prescriptions=tuple(prescriptions), own=own), higher


def successor_realizations(ws: Workspace, n: int, state: InfoState, cap=None):
    """All (z, successor) realizations over every decision bundle.

    Enumerated per component: a fiber's successor depends only on the
    choices its members' subtrees read. Deterministic order.
    """
    comps, points, member_points = decision_components(ws, n, state)
    possible = member_possible_observations(ws, n, state)
    seen = set()
    out = []
    total = 0
    for comp in comps:
        count = 1
        for sp in comp.spaces:
            count *= len(sp)
        total += count
        if cap is not None and total > cap:
            raise ResourceLimitError("successor enumeration candidates", total, cap)
        for combo in product(*[sp.elements for sp in comp.spaces]):
            assignment = dict(zip(comp.points, combo))
            for z, succ in _component_fibers(ws, n, state, comp, assignment, member_points):
                key = (z, succ.uid)
                if key not in seen:
                    seen.add(key)
                    out.append((z, succ))
    return out


def _component_fibers(ws, n, state, comp, assignment, member_points):
    """(z, successor) pairs the component realizes under one assignment."""
    t = state.time
    theta, higher = materialize_action(ws, n, t, assignment)
    fibers: dict = {}
    for idx in comp.member_indices:
        member = state.members[idx]
        us = ws.applied_us(n, member, theta, higher)
        z = ws.observe_z(n, t, member[0], us)
        fibers.setdefault(z, []).append(member)
    for z in sorted(fibers, key=repr):
        sub = ws.intern_state(n, t, fibers[z])
        yield z, evolve_infostate(ws, n, sub, theta, higher, z)


def reachable_infostates(ws: Workspace, n: int, t: int, cap=None) -> list[InfoState]:
    """Forward closure of level-n realizations reachable by time t."""
    frontier = [initial_infostate(ws, n)]
    seen = {frontier[0].uid}
    for _ in range(t):
        nxt = []
        for state in frontier:
            for _, succ in successor_realizations(ws, n, state, cap=cap):
                if succ.uid not in seen:
                    seen.add(succ.uid)
                    nxt.append(succ)
                    if cap is not None and len(seen) > cap:
                        raise ResourceLimitError("reachable realizations", len(seen), cap)
        frontier = sorted(nxt, key=lambda s: s.uid)
    return frontier


def enumerate_decisions(ws: Workspace, n: int, state: InfoState, cap=None):
    """Every decision bundle at a realization (full cross product).

    Exponential in the point count; intended for exhaustive verification on
    tiny instances, never for solving.
    """
    points, _ = collect_points(ws, n, state)
    ordered = sorted(points, key=_point_sort_key)
    spaces = [points[pt] for pt in ordered]
    count = 1
    for sp in spaces:
        count *= len(sp)
    if cap is not None and count > cap:
        raise ResourceLimitError("decision bundles", count, cap)
    for combo in product(*[sp.elements for sp in spaces]):
        yield materialize_action(ws, n, state.time, dict(zip(ordered, combo)))


def feasible_new_information(
    ws: Workspace, n: int, state: InfoState, theta: CompleteAction, higher: tuple = ()
) -> list:
    """Realizable new-information values under one decision bundle."""
    t = state.time
    zs = []
    seen = set()
    for member in state.members:
        us = ws.applied_us(n, member, theta, higher)
        z = ws.observe_z(n, t, member[0], us)
        if z not in seen:
            seen.add(z)
            zs.append(z)
    return zs


# ---------------------------------------------------------------------------
# debug export


def encode_infostate(ws: Workspace, state: InfoState) -> str:
    """Canonical nested text form, for golden tests and exports."""
    parts = []
    for (h, nested) in state.members:
        hat = repr(ws.hat_val(h)).replace(" ", "")
        inner = [hat] + [encode_infostate(ws, ws.state(s)) for s in nested]
        parts.append("(" + ",".join(inner) + ")")
    return "{" + ",".join(parts) + "}"
