"""Command-line front end.

Subcommands: solve (model file -> optimal value + exports), verify (dynamic
program against an exhaustive or history-based second method), pursuit (the
grid surround example), export (emit a model file). Exit codes: 0 success,
2 parse/usage, 3 invalid model, 4 resource cap, 5 verification failure.
Default caps come from NMX_MAX_INFOSTATES, NMX_MAX_CANDIDATES,
NMX_MAX_PROFILES and NMX_MAX_AUGMENTED.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from . import dp, oracle, pursuit
from .errors import ResourceLimitError
from .model import ModelError, validate
from .modelfile import ParseError, parse_model, serialize_model
from .randgen import GEN_VERSION, GenBounds, random_instance
from .report import RunReport, instance_digest, params_digest

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_RESOURCE = 4
EXIT_VERIFY_FAIL = 5


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(0, str(exc))
    return parse_model(text)


def _write_or_print(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _stats_fields(report: RunReport, stats: dict):
    per_t = stats.get("reachable_per_t", {})
    for t in sorted(per_t):
        report.add(f"reachable t={t}", per_t[t])
    report.add("backup_candidates", stats.get("candidates", 0))
    report.add("backups", stats.get("backups", 0))


def cmd_solve(args) -> int:
    model, info = _load(args.model)
    bad = validate(model, info)
    if bad:
        for b in bad:
            print(f"invalid: {b}", file=sys.stderr)
        return EXIT_INVALID
    caps = dp.Caps.from_env()
    t0 = time.perf_counter()
    result = dp.solve(model, info, caps)
    elapsed = time.perf_counter() - t0
    report = RunReport(command="solve", instance=instance_digest(model, info))
    report.add("value", result.value)
    _stats_fields(report, result.stats)
    _write_or_print(report.render(), args.report_out)
    if args.strategy_out:
        Path(args.strategy_out).write_text(dp.export_strategy(result))
    if args.values_out:
        Path(args.values_out).write_text(dp.export_values(result))
    print(f"wall_time_s {elapsed:.3f}", file=sys.stderr)
    return EXIT_OK


def _verify_one(model, info, cap: int, method: str):
    """Returns (ok, dp_value, other_value, method_used, witness_or_None)."""
    result = dp.solve(model, info, dp.Caps.from_env())
    if method in ("profiles", "auto"):
        try:
            ora = oracle.brute_force_minimax(model, info, cap=cap)
            ok = ora.value == result.value
            witness = None if ok else _witness_text(model, ora)
            return ok, result.value, ora.value, "profiles", witness
        except ResourceLimitError:
            if method == "profiles":
                raise
    hist = oracle.history_minimax(model, info)
    ok = hist.value == result.value
    return ok, result.value, hist.value, "history", None


def _witness_text(model, ora: "oracle.OracleResult") -> str:
    lines = []
    for (k, n, t, y, l_vals, c_vals), u in sorted(
        ora.strategy.table.items(), key=repr
    ):
        lines.append(f"g[{k},{n}]@{t}({y!r},{l_vals!r},{c_vals!r}) = {u!r}")
    return "\n".join(lines)


def _verify_seed_job(payload):
    seed, additive, cap, method = payload
    model, info = random_instance(seed, GenBounds(additive=additive))
    ok, dv, ov, used, _ = _verify_one(model, info, cap, method)
    return seed, ok, str(dv), str(ov), used


def cmd_verify(args) -> int:
    caps = dp.Caps.from_env()
    cap = args.cap if args.cap is not None else caps.max_profiles
    if args.random is not None:
        seeds = [args.seed + i for i in range(args.random)]
        payloads = [(s, args.additive, cap, args.method) for s in seeds]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_verify_seed_job, payloads))
        else:
            results = [_verify_seed_job(p) for p in payloads]
        report = RunReport(
            command="verify",
            instance=params_digest(
                f"random generator={GEN_VERSION} seed={args.seed} count={args.random} "
                f"additive={args.additive}"
            ),
        )
        report.add("generator", GEN_VERSION)
        failures = 0
        for seed, ok, dv, ov, used in results:
            status = "PASS" if ok else "FAIL"
            report.add(f"seed {seed}", f"{status} dp={dv} {used}={ov}")
            failures += 0 if ok else 1
        report.add("result", "PASS" if failures == 0 else f"FAIL ({failures})")
        _write_or_print(report.render(), args.report_out)
        return EXIT_OK if failures == 0 else EXIT_VERIFY_FAIL

    model, info = _load(args.model)
    bad = validate(model, info)
    if bad:
        for b in bad:
            print(f"invalid: {b}", file=sys.stderr)
        return EXIT_INVALID
    ok, dv, ov, used, witness = _verify_one(model, info, cap, args.method)
    report = RunReport(command="verify", instance=instance_digest(model, info))
    report.add("dp_value", dv)
    report.add(f"{used}_value", ov)
    report.add("result", "PASS" if ok else "FAIL")
    if witness:
        report.add("witness", "")
    _write_or_print(report.render(), args.report_out)
    if witness:
        sys.stdout.write(witness + "\n")
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def _table1_job(start):
    params = pursuit.table1_params(start)
    result = pursuit.solve_row(params)
    return start, result.value, result.stats


def cmd_pursuit(args) -> int:
    caps = dp.Caps.from_env()
    if args.table1:
        report = RunReport(
            command="pursuit --table1", instance=params_digest("table1 grid=8 T=3 D=10")
        )
        starts = [start for start, _ in pursuit.TABLE1_CASES]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                solved = list(pool.map(_table1_job, starts))
        else:
            solved = [_table1_job(s) for s in starts]
        all_match = True
        for (start, value, stats), (_, expected) in zip(solved, pursuit.TABLE1_CASES):
            report.add(f"start {start}", value)
            report.add(f"start {start} candidates", stats.get("candidates", 0))
            if value != expected:
                all_match = False
                exclusive = pursuit.solve_row(
                    replace(pursuit.table1_params(start), surround="exclusive")
                ).value
                report.add(f"start {start} MISMATCH expected", expected)
                report.add(f"start {start} exclusive-variant", exclusive)
        report.add("result", "PASS" if all_match else "FAIL")
        _write_or_print(report.render(), args.report_out)
        return EXIT_OK if all_match else EXIT_VERIFY_FAIL

    params = pursuit.PursuitParams(
        grid=args.grid,
        horizon=args.horizon,
        penalty=Fraction(args.penalty),
        x1=args.x1,
        x2=args.x2,
        y0=args.y0,
    )
    params.check()
    t0 = time.perf_counter()
    result = pursuit.solve_row(params, caps)
    elapsed = time.perf_counter() - t0
    report = RunReport(
        command="pursuit",
        instance=params_digest(
            f"pursuit grid={args.grid} T={args.horizon} D={args.penalty} "
            f"x1={args.x1} x2={args.x2} y0={args.y0}"
        ),
    )
    report.add("value", result.value)
    _stats_fields(report, result.stats)
    _write_or_print(report.render(), args.report_out)
    if args.strategy_out:
        Path(args.strategy_out).write_text(dp.export_strategy(result))
    print(f"wall_time_s {elapsed:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    if args.what != "pursuit":
        print(f"unknown export target {args.what!r}", file=sys.stderr)
        return EXIT_PARSE
    params = pursuit.PursuitParams(
        grid=args.grid,
        horizon=args.horizon,
        penalty=Fraction(args.penalty),
        x1=args.x1,
        x2=args.x2,
        y0=args.y0,
    )
    params.check()
    model, info = pursuit.build(params)
    _write_or_print(serialize_model(model, info), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmx",
        description="Exact worst-case solver for finite decentralized control "
        "with nested information",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a model file")
    p_solve.add_argument("model")
    p_solve.add_argument("--report-out")
    p_solve.add_argument("--strategy-out")
    p_solve.add_argument("--values-out")
    p_solve.set_defaults(fn=cmd_solve)

    p_verify = sub.add_parser("verify", help="compare the solver against a second method")
    p_verify.add_argument("model", nargs="?")
    p_verify.add_argument("--random", type=int, help="verify N seeded random instances")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--additive", action="store_true")
    p_verify.add_argument("--cap", type=int)
    p_verify.add_argument(
        "--method", choices=("auto", "profiles", "history"), default="auto"
    )
    p_verify.add_argument("--jobs", type=int, default=1)
    p_verify.add_argument("--report-out")
    p_verify.set_defaults(fn=cmd_verify)

    p_pursuit = sub.add_parser("pursuit", help="solve the grid surround example")
    p_pursuit.add_argument("--grid", type=int, default=8)
    p_pursuit.add_argument("--horizon", type=int, default=3)
    p_pursuit.add_argument("--penalty", default="10")
    p_pursuit.add_argument("--x1", type=int, default=8)
    p_pursuit.add_argument("--x2", type=int, default=8)
    p_pursuit.add_argument("--y0", type=int, default=2)
    p_pursuit.add_argument("--table1", action="store_true")
    p_pursuit.add_argument("--jobs", type=int, default=1)
    p_pursuit.add_argument("--report-out")
    p_pursuit.add_argument("--strategy-out")
    p_pursuit.set_defaults(fn=cmd_pursuit)

    p_export = sub.add_parser("export", help="emit a model file")
    p_export.add_argument("what", choices=("pursuit",))
    p_export.add_argument("--grid", type=int, default=8)
    p_export.add_argument("--horizon", type=int, default=3)
    p_export.add_argument("--penalty", default="10")
    p_export.add_argument("--x1", type=int, default=8)
    p_export.add_argument("--x2", type=int, default=8)
    p_export.add_argument("--y0", type=int, default=2)
    p_export.add_argument("-o", "--out")
    p_export.set_defaults(fn=cmd_export)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ModelError as exc:
        print(f"invalid model: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
