"""Command line entry point: generate, run, stats, verify, plot.

Exit codes: 0 success, 1 planner failure or termination, 2 usage error,
3 verification failure. RTSS_SEED (environment) supplies the default seed
wherever --seed is omitted.
"""
from __future__ import annotations

import argparse
import os
import sys

from . import harness, plotting, verification
from .domains import airspace, racetrack
from .planners import ALGORITHMS, PlannerConfig
from .search import Evaluator


def _default_seed() -> int:
    return int(os.environ.get("RTSS_SEED", "0"))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtss", description="real-time safe heuristic search toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a benchmark instance file")
    gen.add_argument("--domain", choices=["airspace"], required=True)
    gen.add_argument("--length", type=int, required=True)
    gen.add_argument("--max-altitude", type=int, required=True)
    gen.add_argument("--p-obs", type=float, required=True)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", required=True)

    run = sub.add_parser("run", help="run an experiment grid or a single episode")
    run.add_argument("--config", help="experiment config JSON")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--domain", help="instance file for an ad-hoc episode")
    run.add_argument("--algorithm", choices=list(ALGORITHMS))
    run.add_argument("--bound", type=int)
    run.add_argument("--ratio", type=float, default=0.5)
    run.add_argument("--evaluator", default="astar",
                     help="astar | wastar:W | greedy")
    run.add_argument("--commit", choices=["single", "full"], default="single")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--no-cache", action="store_true")
    run.add_argument("--no-carryover", action="store_true",
                     help="re-split unused RTFS budget within the iteration")
    run.add_argument("--max-iterations", type=int, default=100_000)
    run.add_argument("--out", help="CSV output path")

    stats = sub.add_parser("stats", help="per-altitude safety proof statistics")
    stats.add_argument("--instance", required=True)
    stats.add_argument("--samples", type=int, required=True)
    stats.add_argument("--seed", type=int, default=None)
    stats.add_argument("--out", required=True)

    verify = sub.add_parser("verify", help="run the brute-force property suites")
    verify.add_argument("--suite", choices=list(verification.SUITES), default="all")
    verify.add_argument("--seeds", type=int, default=100)

    plot = sub.add_parser("plot", help="render an SVG chart from a results CSV")
    plot.add_argument("--csv", required=True)
    plot.add_argument("--x", required=True)
    plot.add_argument("--y", required=True)
    plot.add_argument("--series", required=True)
    plot.add_argument("--out", required=True)
    plot.add_argument("--title", default="")
    plot.add_argument("--logx", action="store_true")
    return parser


def _load_domain_file(path: str):
    with open(path, "r", encoding="utf-8") as f:
        head = f.readline().strip()
    if head == "airspace v1":
        inst = airspace.load_instance(path)
        return inst, inst.start
    if head == "racetrack v1":
        inst = racetrack.load(path)
        if not inst.starts:
            raise ValueError("racetrack map has no start candidates")
        return inst, inst.start_state(inst.starts[0])
    raise ValueError(f"unrecognized instance file: {path}")


def _cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    inst = airspace.generate(args.length, args.max_altitude, args.p_obs, seed)
    airspace.write_instance(inst, args.out)
    print(f"wrote {args.out} ({inst.instance_id})")
    return 0


def _cmd_run(args, parser) -> int:
    if args.config:
        config = harness.ExperimentConfig.from_json(args.config)
        if args.out:
            config.output = args.out
        records = harness.run_experiment(config, jobs=args.jobs)
        bad = sum(1 for r in records if r.outcome.startswith("error"))
        print(f"{len(records)} runs -> {config.output}"
              + (f" ({bad} errored)" if bad else ""))
        return 0
    if not (args.domain and args.algorithm and args.bound):
        parser.error("run needs either --config or --domain/--algorithm/--bound")
    if args.algorithm == "rtfs" and not 0.0 < args.ratio < 1.0:
        parser.error("--ratio must lie strictly inside (0, 1)")
    try:
        evaluator = Evaluator.parse(args.evaluator)
    except (ValueError, IndexError):
        parser.error(f"bad --evaluator {args.evaluator!r}")
    domain, start = _load_domain_file(args.domain)
    seed = args.seed if args.seed is not None else _default_seed()
    config = PlannerConfig(algorithm=args.algorithm, iteration_bound=args.bound,
                           exploration_ratio=args.ratio, evaluator=evaluator,
                           commit_mode=args.commit,
                           allow_budget_carryover=not args.no_carryover)
    safe_states = None
    if args.algorithm == "safe-lss-lrta":
        from .domains.oracles import true_safe_set
        safe_states = true_safe_set(domain, roots=[start])
    record, _ = harness.simulate_episode(
        config, domain, start, seed=seed, cache_enabled=not args.no_cache,
        max_iterations=args.max_iterations, safe_states=safe_states)
    if args.out:
        harness.write_csv(args.out, [record])
    print(f"{record.instance_id} {record.algorithm} bound={record.iteration_bound}"
          f" outcome={record.outcome} gat={record.gat:g}"
          f" velocity={record.velocity:.3f} expansions={record.total_expansions}")
    return 0 if record.outcome == "goal" else 1


def _cmd_stats(args) -> int:
    inst = airspace.load_instance(args.instance)
    seed = args.seed if args.seed is not None else _default_seed()
    rows = airspace.safety_proof_stats(inst, args.samples, seed=seed)
    table = airspace.stats_csv_rows(rows)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        for row in table:
            f.write(",".join(harness._fmt(v) if not isinstance(v, str) else v
                             for v in row) + "\n")
    print(f"wrote {args.out} ({len(rows)} altitude rows)")
    return 0


def _cmd_verify(args) -> int:
    checks = verification.run_suite(args.suite, seeds=args.seeds)
    for check in checks:
        print(check.line())
    return 0 if all(c.passed for c in checks) else 3


def _cmd_plot(args) -> int:
    spec = plotting.PlotSpec(x=args.x, y=args.y, series=args.series,
                             out=args.out, title=args.title, logx=args.logx)
    plotting.emit_plot(args.csv, spec)
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "run":
            return _cmd_run(args, parser)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "plot":
            return _cmd_plot(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command!r}")
    return 2


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
