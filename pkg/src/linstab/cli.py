"""Command line interface: generate, simulate, explore, census, check."""
from __future__ import annotations

import argparse
import json
import sys

from . import generators
from .model import InputError, config_to_json, load_config
from .semantics import make_strategy

EXIT_OK, EXIT_VIOLATION, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3

CLASSES = ("correct", "missing", "supergraph", "random", "enumerate")


def _generate(args):
    n, seed, extra = args.n, args.seed, args.extra
    cls = args.cls
    if cls == "correct":
        return generators.gen_correct(n)
    if cls == "missing":
        return generators.gen_missing_edges(n, seed)
    if cls == "supergraph":
        return generators.gen_supergraph(n, seed, extra if extra is not None else n)
    if cls == "random":
        return generators.gen_random_connected(n, seed, extra if extra is not None else n)
    raise InputError(f"class {cls!r} does not produce a single configuration")


def _initial(args):
    if args.init:
        return load_config(args.init)
    return _generate(args)


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_generate(args):
    if args.cls == "enumerate":
        out = open(args.out, "w") if args.out else sys.stdout
        try:
            count = 0
            for c in generators.enumerate_configs(args.n, args.msg_cap, args.total_cap):
                out.write(json.dumps(config_to_json(c)) + "\n")
                count += 1
        finally:
            if args.out:
                out.close()
        print(f"{count} configurations", file=sys.stderr)
        return EXIT_OK
    _emit(config_to_json(_generate(args)), args.out)
    return EXIT_OK


def cmd_simulate(args):
    from .harness.simulate import simulate

    init = _initial(args)
    opts = {}
    if args.scheduler == "bounded":
        opts = {"delay_bound": args.delay_bound, "match_bound": args.match_bound}
    else:
        opts = {"aging": args.aging}
    strategy = make_strategy(args.select, args.seed, init.universe)
    trace = open(args.trace, "w") if args.trace else None
    try:
        r = simulate(
            init,
            scheduler=args.scheduler,
            strategy=strategy,
            oracle=args.oracle == "on",
            budget=args.budget,
            seed=args.seed,
            tail=args.tail,
            trace=trace,
            horizon=args.horizon,
            **opts,
        )
    finally:
        if trace:
            trace.close()
    _emit(r.summary())
    return {"converged": EXIT_OK, "violation": EXIT_VIOLATION}.get(r.outcome, EXIT_BUDGET)


def cmd_explore(args):
    from .harness.explore import explore

    init = _initial(args)
    strategy = None if args.select == "any" else make_strategy(args.select, args.seed, init.universe)
    r = explore(init, strategy, args.msg_cap, args.total_cap, args.depth, args.goal, args.max_states)
    _emit(r.to_json())
    if not r.holds:
        return EXIT_VIOLATION
    return EXIT_BUDGET if r.partial else EXIT_OK


def cmd_census(args):
    from .harness.census import converge_census

    r = converge_census(
        args.n, args.msg_cap, args.total_cap, args.seeds, args.budget,
        seed_base=args.seed, fast=not args.slow, trace_dir=args.trace_dir,
    )
    _emit(r.to_json(), args.out)
    if r.violation_runs:
        return EXIT_VIOLATION
    return EXIT_OK if r.converged == r.runs else EXIT_BUDGET


def cmd_check(args):
    from .harness.trace import read_trace, replay

    trace = read_trace(args.trace)
    problems = replay(trace, check_monitors=True)
    recorded = sorted({v for rec in trace.records for v in rec.get("monitor_violations", [])})
    _emit({"records": len(trace.records), "problems": [list(p) for p in problems[:50]],
           "recorded_violations": recorded})
    return EXIT_VIOLATION if problems or recorded else EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="linstab", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, init=True):
        p.add_argument("--n", type=int, default=5)
        p.add_argument("--seed", type=int, default=0)
        if init:
            p.add_argument("--init", help="configuration JSON file")
            p.add_argument("--class", dest="cls", choices=CLASSES, default="random")
            p.add_argument("--extra", type=int)

    p = sub.add_parser("generate", help="write an initial configuration")
    common(p)
    p.add_argument("--msg-cap", type=int, default=1)
    p.add_argument("--total-cap", type=int, default=6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="run one simulation")
    common(p)
    p.add_argument("--select", default="all-min", choices=("all-min", "all-random", "max"))
    p.add_argument("--scheduler", default="fair", choices=("fair", "bounded"))
    p.add_argument("--aging", type=int, default=1)
    p.add_argument("--delay-bound", type=int)
    p.add_argument("--match-bound", type=int)
    p.add_argument("--oracle", default="off", choices=("on", "off"))
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--tail", type=int)
    p.add_argument("--trace")
    p.add_argument("--horizon", action="store_true", help="also run the multi-step monitors")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("explore", help="bounded exhaustive exploration")
    common(p)
    p.add_argument("--select", default="any", choices=("any", "all-min", "all-random", "max"))
    p.add_argument("--msg-cap", type=int, default=2)
    p.add_argument("--total-cap", type=int)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--goal", default="all_correct",
                   choices=("all_correct", "no_violation", "reach_correct", "no_deadlock"))
    p.add_argument("--max-states", type=int, default=2_000_000)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("census", help="convergence census over all small configurations")
    common(p, init=False)
    p.set_defaults(n=3)
    p.add_argument("--msg-cap", type=int, default=1)
    p.add_argument("--total-cap", type=int, default=6)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--budget", type=int, default=10**5)
    p.add_argument("--trace-dir")
    p.add_argument("--slow", action="store_true", help="use the Python engine instead of the compiled kernel")
    p.add_argument("--out")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("check", help="re-validate a trace file")
    p.add_argument("trace")
    p.set_defaults(func=cmd_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
