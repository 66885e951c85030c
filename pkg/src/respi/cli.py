"""Command line front end.

Exit codes: 0 success, 1 property or typing failure, 2 usage/parse error.
"""
from __future__ import annotations

import argparse
import random
import sys

from .config import supply_for
from .history import Trace, build_graph, check_consistent, save_trace
from .parser import ParseError, parse_program, parse_typedecls
from .printer import print_configuration, print_session_type
from .propcheck import run_all_suites
from .reduction import (
    apply_redex,
    enumerate_backward,
    enumerate_forward,
    set_mutation,
)
from .types import OutOfClass, SessionTypeError, typecheck_config, typecheck_process
from .config import forgetful_map


def _arg_parser():
    ap = argparse.ArgumentParser(
        prog="respi",
        description="Reversible session pi-calculus: run, step, explore, "
        "check properties, type check",
    )
    ap.add_argument("input", help="a .respi file, or - for stdin")
    ap.add_argument(
        "--mode",
        choices=["run", "step", "explore-exhaustive", "check-props", "typecheck"],
        default="run",
    )
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-steps", type=int, default=200)
    ap.add_argument("--bound", type=int, default=4, metavar="L", help="trace length bound")
    ap.add_argument("--trace-out", metavar="PATH")
    ap.add_argument("--graph-out", metavar="PATH")
    ap.add_argument("--types", metavar="PATH", help=".styp declarations")
    ap.add_argument("--mutate", help=argparse.SUPPRESS)  # test hook
    return ap


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load(args):
    text = _read_input(args.input)
    cfg = parse_program(text, args.input)
    decls = None
    if args.types:
        decls = parse_typedecls(_read_input(args.types), args.types)
    return cfg, decls


def cmd_run(args) -> int:
    cfg, decls = _load(args)
    if args.max_steps < 0:
        print("--max-steps must be nonnegative", file=sys.stderr)
        return 2
    rng = random.Random(args.seed)
    supply = supply_for(cfg, args.seed)
    trace = Trace(cfg)
    for _ in range(args.max_steps):
        redexes = enumerate_forward(cfg)
        if not redexes:
            break
        r = rng.choice(redexes)
        cfg, step = apply_redex(cfg, r, supply)
        trace = trace.extend(cfg, step)
    print(f"{len(trace)} steps, {len(cfg.memories)} memories")
    print(print_configuration(cfg))
    if args.trace_out:
        save_trace(args.trace_out, trace)
    if args.graph_out:
        with open(args.graph_out, "w") as fh:
            fh.write(build_graph(cfg).to_text())
    return 0


def cmd_step(args) -> int:
    cfg, decls = _load(args)
    supply = supply_for(cfg, args.seed)
    trace = Trace(cfg)
    while True:
        print()
        print(print_configuration(cfg))
        fwd = enumerate_forward(cfg)
        bwd = enumerate_backward(cfg)
        for i, r in enumerate(fwd + bwd):
            print(f"  [{i}] {r.key}")
        if not fwd and not bwd:
            print("no redexes; done")
            break
        try:
            choice = input("step> ").strip()
        except EOFError:
            break
        if choice in ("q", "quit", ""):
            break
        try:
            idx = int(choice)
            r = (fwd + bwd)[idx]
        except (ValueError, IndexError):
            print("pick a listed number")
            continue
        cfg, step = apply_redex(cfg, r, supply)
        trace = trace.extend(cfg, step)
    if args.trace_out:
        save_trace(args.trace_out, trace)
    return 0


def cmd_explore(args) -> int:
    from .history import explore

    cfg, _ = _load(args)
    space = explore(cfg, args.max_steps if args.max_steps else args.bound)
    print(f"{len(space)} reachable configurations up to alpha-equality")
    bad = [c for c in space.configs if not check_consistent(c).ok]
    print(f"{len(bad)} fail the consistency check")
    return 1 if bad else 0


def cmd_check_props(args) -> int:
    cfg, _ = _load(args)
    if cfg.memories:
        print("check-props expects an initial (memory-free) term", file=sys.stderr)
        return 2
    if args.mutate:
        set_mutation(args.mutate)
    try:
        reports = run_all_suites(cfg, bound=args.bound)
    finally:
        set_mutation(None)
    ok = True
    for rep in reports:
        print(rep.line())
        for f in rep.failures[:3]:
            print(f"    counterexample: {f}")
        ok = ok and rep.ok
    return 0 if ok else 1


def cmd_typecheck(args) -> int:
    cfg, decls = _load(args)
    try:
        if cfg.memories:
            res = typecheck_config(cfg, decls)
        else:
            res = typecheck_process(forgetful_map(cfg), decls)
    except SessionTypeError as e:
        print(f"ill-typed: {e}")
        return 1
    if isinstance(res, OutOfClass):
        print(f"out of class: {res.reason}")
        return 0
    if res.delta:
        for key, s in sorted(res.delta.items(), key=lambda kv: str(kv[0])):
            print(f"{key!r} : {print_session_type(s)}")
    verdict = "well-typed" + (" (completed)" if res.is_completed else "")
    print(verdict)
    return 0


def main(argv=None) -> int:
    args = _arg_parser().parse_args(argv)
    try:
        if args.mode == "run":
            return cmd_run(args)
        if args.mode == "step":
            return cmd_step(args)
        if args.mode == "explore-exhaustive":
            return cmd_explore(args)
        if args.mode == "check-props":
            return cmd_check_props(args)
        return cmd_typecheck(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(str(e), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
