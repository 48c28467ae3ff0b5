"""Reader/writer for the `nmx-model v1` structured text format.

The format is line oriented: a versioned header, then bracketed sections.
Element tokens are Python literals written without spaces (ints, quoted
strings are unnecessary for plain names, tuples like (1,2)); bare words
that are not literals are string elements. Costs are rationals ("7", "3/2",
"1.5"). The full grammar is documented in docs/model-format.md.

Serialization is canonical (fixed section order, sorted rows), so
parse -> serialize -> parse is the identity and equal instances serialize
byte-identically.
"""

from __future__ import annotations

import ast
import re
from fractions import Fraction
from itertools import product

from .model import FiniteSpace, InfoStructure, ModelError, SystemModel, VarId

HEADER = "nmx-model v1"

_ID_RE = re.compile(r"^([yu])\[(\d+),(\d+)\]@(-?\d+)$")


class ParseError(Exception):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def element_token(el) -> str:
    """Canonical token for a space element; rejects ambiguous strings."""
    if isinstance(el, str):
        if not el or any(c.isspace() for c in el) or ":" in el or "#" in el:
            raise ModelError(f"string element {el!r} not representable as a token")
        try:
            parsed = ast.literal_eval(el)
        except (ValueError, SyntaxError):
            return el
        if parsed != el:
            raise ModelError(f"string element {el!r} is ambiguous with {parsed!r}")
        return el
    text = repr(el).replace(" ", "")
    if any(c.isspace() for c in text):
        raise ModelError(f"element {el!r} not representable as a token")
    return text


def parse_element(token: str):
    try:
        return ast.literal_eval(token)
    except (ValueError, SyntaxError):
        return token


def cost_token(c: Fraction) -> str:
    return str(c)


def _parse_id(token: str, line_no: int) -> VarId:
    m = _ID_RE.match(token)
    if not m:
        raise ParseError(line_no, f"bad identifier {token!r}")
    return VarId(m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4)))


def _split_section(header: str, line_no: int):
    parts = header.strip("[]").split()
    name = parts[0]
    subkind = None
    kwargs = {}
    for p in parts[1:]:
        if "=" in p:
            key, val = p.split("=", 1)
            try:
                kwargs[key] = int(val)
            except ValueError:
                raise ParseError(line_no, f"bad section parameter {p!r}")
        elif subkind is None:
            subkind = p
        else:
            raise ParseError(line_no, f"bad section parameter {p!r}")
    return name, subkind, kwargs


def parse_model(text: str) -> tuple[SystemModel, InfoStructure]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(1, f"expected header {HEADER!r}")

    meta: dict = {}
    spaces: dict = {}
    dynamics: dict = {}
    observation: dict = {}
    terminal_cost: dict = {}
    stage_costs: dict = {}
    memory: dict = {}
    initial: dict = {}

    section = None
    subkind = None
    params: dict = {}
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(line_no, "unterminated section header")
            section, subkind, params = _split_section(line, line_no)
            if section not in (
                "meta",
                "space",
                "dynamics",
                "observation",
                "cost",
                "memory",
                "initial",
            ):
                raise ParseError(line_no, f"unknown section {section!r}")
            if section == "space" and subkind not in (
                "state",
                "action",
                "disturbance",
                "obsnoise",
                "obs",
            ):
                raise ParseError(line_no, f"unknown space kind {subkind!r}")
            if section == "cost" and subkind not in ("terminal", "stage"):
                raise ParseError(line_no, f"unknown cost kind {subkind!r}")
            continue
        if section is None:
            raise ParseError(line_no, "content before any section")

        if section == "meta":
            if "=" not in line:
                raise ParseError(line_no, "meta lines are key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key == "horizon":
                meta["horizon"] = int(val)
            elif key == "agents":
                meta["agents"] = tuple(int(x) for x in val.split())
            else:
                raise ParseError(line_no, f"unknown meta key {key!r}")
        elif section == "space":
            if not line.startswith("elements"):
                raise ParseError(line_no, "space sections hold one elements line")
            _, val = line.split("=", 1)
            els = tuple(parse_element(tok) for tok in val.split())
            if subkind in ("state", "disturbance"):
                if "t" not in params:
                    raise ParseError(line_no, f"{subkind} space needs t=")
                key = (subkind, params["t"])
            else:
                if not {"k", "n", "t"} <= set(params):
                    raise ParseError(line_no, f"{subkind} space needs k= n= t=")
                key = (subkind, params["k"], params["n"], params["t"])
            if key in spaces:
                raise ParseError(line_no, f"duplicate space section {key}")
            try:
                spaces[key] = FiniteSpace(els)
            except ModelError as exc:
                raise ParseError(line_no, str(exc))
        elif section == "dynamics":
            t = params.get("t")
            if t is None:
                raise ParseError(line_no, "dynamics section needs t=")
            lhs, _, rhs = line.partition(":")
            if not rhs:
                raise ParseError(line_no, "dynamics rows are inputs : output")
            toks = lhs.split()
            if len(toks) < 2:
                raise ParseError(line_no, "dynamics row too short")
            x = parse_element(toks[0])
            w = parse_element(toks[-1])
            us = tuple(parse_element(tk) for tk in toks[1:-1])
            dynamics.setdefault(t, {})[(x, us, w)] = parse_element(rhs.strip())
        elif section == "observation":
            key = (params.get("k"), params.get("n"), params.get("t"))
            if None in key:
                raise ParseError(line_no, "observation section needs k= n= t=")
            lhs, _, rhs = line.partition(":")
            if not rhs:
                raise ParseError(line_no, "observation rows are x v : y")
            toks = lhs.split()
            if len(toks) != 2:
                raise ParseError(line_no, "observation rows are x v : y")
            observation.setdefault(key, {})[
                (parse_element(toks[0]), parse_element(toks[1]))
            ] = parse_element(rhs.strip())
        elif section == "cost":
            lhs, _, rhs = line.partition(":")
            if not rhs:
                raise ParseError(line_no, "cost rows are inputs : value")
            try:
                value = Fraction(rhs.strip())
            except (ValueError, ZeroDivisionError):
                raise ParseError(line_no, f"bad cost value {rhs.strip()!r}")
            toks = lhs.split()
            if subkind == "terminal":
                if len(toks) != 1:
                    raise ParseError(line_no, "terminal cost rows are x : value")
                terminal_cost[parse_element(toks[0])] = value
            else:
                t = params.get("t")
                if t is None:
                    raise ParseError(line_no, "stage cost section needs t=")
                x = parse_element(toks[0])
                us = tuple(parse_element(tk) for tk in toks[1:])
                stage_costs.setdefault(t, {})[(x, us)] = value
        elif section == "memory":
            key = (params.get("k"), params.get("n"), params.get("t"))
            if None in key:
                raise ParseError(line_no, "memory section needs k= n= t=")
            memory.setdefault(key, set()).add(_parse_id(line, line_no))
        elif section == "initial":
            n = params.get("n")
            if n is None:
                raise ParseError(line_no, "initial section needs n=")
            lhs, _, rhs = line.partition(":")
            if not rhs:
                raise ParseError(line_no, "initial rows are x : y per agent")
            x0 = parse_element(lhs.strip())
            ys = tuple(parse_element(tk) for tk in rhs.split())
            initial.setdefault(n, set()).add((x0, ys))

    if "horizon" not in meta or "agents" not in meta:
        raise ParseError(1, "meta section must declare horizon and agents")
    T = meta["horizon"]
    agents_per = meta["agents"]
    N = len(agents_per)
    agent_list = []
    for n, kn in enumerate(agents_per, start=1):
        agent_list.extend((k, n) for k in range(1, kn + 1))

    def need(key, what):
        if key not in spaces:
            raise ParseError(1, f"missing space section for {what}")
        return spaces[key]

    state_spaces = tuple(need(("state", t), f"state t={t}") for t in range(T + 1))
    disturbance = tuple(
        need(("disturbance", t), f"disturbance t={t}") for t in range(T)
    )
    action_spaces = {}
    obs_noise = {}
    obs_spaces = {}
    for (k, n) in agent_list:
        for t in range(T + 1):
            action_spaces[(k, n, t)] = need(
                ("action", k, n, t), f"action k={k} n={n} t={t}"
            )
            obs_noise[(k, n, t)] = need(
                ("obsnoise", k, n, t), f"obsnoise k={k} n={n} t={t}"
            )
            obs_spaces[(k, n, t)] = need(("obs", k, n, t), f"obs k={k} n={n} t={t}")

    mem = {}
    for (k, n) in agent_list:
        for t in range(T + 1):
            mem[(k, n, t)] = frozenset(memory.get((k, n, t), set()))

    init = tuple(frozenset(initial.get(n, set())) for n in range(1, N + 1))

    model = SystemModel(
        horizon=T,
        agents_per_subsystem=agents_per,
        state_spaces=state_spaces,
        action_spaces=action_spaces,
        disturbance_spaces=disturbance,
        obs_noise_spaces=obs_noise,
        obs_spaces=obs_spaces,
        dynamics=dynamics,
        observation=observation,
        terminal_cost=terminal_cost,
        stage_costs=stage_costs if stage_costs else None,
    )
    info = InfoStructure(memory=mem, initial_common=init)
    return model, info


def serialize_model(model: SystemModel, info: InfoStructure) -> str:
    out: list[str] = [HEADER, ""]
    T = model.horizon
    agents = model.agents()

    out.append("[meta]")
    out.append(f"horizon = {T}")
    out.append("agents = " + " ".join(str(k) for k in model.agents_per_subsystem))
    out.append("")

    def space_section(header: str, sp: FiniteSpace):
        out.append(header)
        out.append("elements = " + " ".join(element_token(e) for e in sp.elements))
        out.append("")

    for t in range(T + 1):
        space_section(f"[space state t={t}]", model.state_spaces[t])
    for t in range(T):
        space_section(f"[space disturbance t={t}]", model.disturbance_spaces[t])
    for (k, n) in agents:
        for t in range(T + 1):
            space_section(
                f"[space action k={k} n={n} t={t}]", model.action_spaces[(k, n, t)]
            )
            space_section(
                f"[space obsnoise k={k} n={n} t={t}]", model.obs_noise_spaces[(k, n, t)]
            )
            space_section(f"[space obs k={k} n={n} t={t}]", model.obs_spaces[(k, n, t)])

    for t in range(T):
        out.append(f"[dynamics t={t}]")
        u_spaces = [model.action_spaces[(k, n, t)] for (k, n) in agents]
        for x in model.state_spaces[t]:
            for us in product(*u_spaces):
                for w in model.disturbance_spaces[t]:
                    nxt = model.dynamics[t][(x, us, w)]
                    row = " ".join(
                        [element_token(x)]
                        + [element_token(u) for u in us]
                        + [element_token(w)]
                    )
                    out.append(f"{row} : {element_token(nxt)}")
        out.append("")

    for (k, n) in agents:
        for t in range(T + 1):
            out.append(f"[observation k={k} n={n} t={t}]")
            for x in model.state_spaces[t]:
                for v in model.obs_noise_spaces[(k, n, t)]:
                    y = model.observation[(k, n, t)][(x, v)]
                    out.append(
                        f"{element_token(x)} {element_token(v)} : {element_token(y)}"
                    )
            out.append("")

    out.append("[cost terminal]")
    for x in model.state_spaces[T]:
        out.append(f"{element_token(x)} : {cost_token(model.terminal_cost[x])}")
    out.append("")

    if model.stage_costs is not None:
        for t in range(T):
            out.append(f"[cost stage t={t}]")
            u_spaces = [model.action_spaces[(k, n, t)] for (k, n) in agents]
            for x in model.state_spaces[t]:
                for us in product(*u_spaces):
                    row = " ".join(
                        [element_token(x)] + [element_token(u) for u in us]
                    )
                    out.append(f"{row} : {cost_token(model.stage_costs[t][(x, us)])}")
            out.append("")

    for (k, n) in agents:
        for t in range(T + 1):
            ids = info.memory_ids(k, n, t)
            if not ids:
                continue
            out.append(f"[memory k={k} n={n} t={t}]")
            for v in ids:
                out.append(v.token())
            out.append("")

    for n in range(1, model.num_subsystems + 1):
        out.append(f"[initial n={n}]")
        for (x0, ys) in sorted(
            info.initial_common[n - 1], key=lambda r: (repr(r[0]), repr(r[1]))
        ):
            out.append(
                element_token(x0) + " : " + " ".join(element_token(y) for y in ys)
            )
        out.append("")

    return "\n".join(out).rstrip("\n") + "\n"
