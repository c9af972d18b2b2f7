"""Command-line interface: generate, solve, bench, profile.

Exit codes: 0 on success, 1 when the solve subcommand ends without
reaching the tolerance, 2 on usage or input errors.  Every flag value is
echoed into the produced output so result files are self-describing.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import bench, kernels, road
from .control import ControlSchedule
from .solver import SolverConfig, run_cycip

__all__ = ["main", "build_parser"]

_EXIT_OK = 0
_EXIT_UNSOLVED = 1
_EXIT_USAGE = 2


class _CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    top = _CliParser(prog="cycip", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[], help="generate strictly feasible problems")
    g.add_argument("--n", type=int, required=True, help="breakpoint count")
    g.add_argument("--count", type=int, required=True, help="number of instances")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--nonconvex", action="store_true", help="add a minimum-grade band")
    g.add_argument("--min-slope", type=float, default=None, help="minimum grade magnitude")
    g.add_argument("--out", type=Path, required=True, help="output directory")

    s = sub.add_parser("solve", help="run the solver on one problem file")
    s.add_argument("--problem", type=Path, required=True)
    s.add_argument("--metric", choices=("d2", "dinf"), default="dinf")
    s.add_argument("--eps", type=float, default=5e-4)
    s.add_argument("--control", choices=("cyclic", "random"), default="cyclic")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-time", type=float, default=150.0)
    s.add_argument("--max-iters", type=int, default=1_000_000)
    s.add_argument("--policy", choices=("intrepid", "project"), default="intrepid")
    s.add_argument("--backend", choices=("auto", "numba", "numpy"), default=None)
    s.add_argument("--trace", type=Path, default=None, help="write per-sweep trace CSV here")

    b = sub.add_parser("bench", help="time algorithms across a problem directory")
    b.add_argument("--problems", type=Path, required=True, help="directory of .roadfp files")
    b.add_argument("--algs", type=str, default=None, help="comma-separated algorithm names")
    b.add_argument("--tau-max", type=float, default=150.0)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--eps", type=float, default=5e-4)
    b.add_argument("--backend", choices=("auto", "numba", "numpy"), default=None)
    b.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("profile", help="performance profiles from a results file")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    return top


def _cmd_gen(args) -> int:
    if args.count < 1:
        raise _UsageError("--count must be at least 1")
    min_slope = args.min_slope
    if min_slope is not None and not args.nonconvex:
        raise _UsageError("--min-slope requires --nonconvex")
    if args.nonconvex and min_slope is None:
        min_slope = 0.01
    params = road.GeneratorParams(sigma_min=min_slope)
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        sub_seed = int(np.random.SeedSequence((args.seed, i)).generate_state(1, np.uint64)[0])
        problem, witness = road.generate_problem(args.n, sub_seed, params)
        stem = args.out / f"problem_{i:03d}"
        road.write_problem(problem, stem.with_suffix(".roadfp"))
        road.write_witness(witness, stem.with_suffix(".witness"))
    print(f"wrote {args.count} problems (n={args.n}, seed={args.seed}) to {args.out}")
    return _EXIT_OK


def _cmd_solve(args) -> int:
    problem = road.read_problem(args.problem)
    compiled = road.compile_constraints(problem)
    fp = compiled.problem(args.policy)
    if args.control == "random":
        control = ControlSchedule.random_blocks(range(fp.size), seed=args.seed)
    else:
        control = ControlSchedule.cyclic(range(fp.size))
    cfg = SolverConfig(
        eps=args.eps,
        metric=args.metric,
        max_iters=args.max_iters,
        max_time=args.max_time,
        control=control,
        trace="summary" if args.trace else "none",
        backend=args.backend,
    )
    x0 = road.initial_point(problem)
    result = run_cycip(fp, cfg, x0)
    if args.trace:
        result.trace.write_csv(args.trace)
    for key, value in (
        ("problem", args.problem),
        ("n", problem.n),
        ("metric", args.metric),
        ("eps", args.eps),
        ("control", args.control),
        ("seed", args.seed),
        ("policy", args.policy),
        ("max_time", args.max_time),
        ("max_iters", args.max_iters),
        ("status", result.status),
        ("iterations", result.iterations),
        ("wall_time_s", f"{result.wall_time:.6f}"),
        ("d2", repr(result.d2)),
        ("dinf", repr(result.dinf)),
    ):
        print(f"{key} = {value}")
    return _EXIT_OK if result.status == kernels.SOLVED else _EXIT_UNSOLVED


def _parse_algs(spec: str | None) -> tuple[bench.AlgorithmSpec, ...]:
    stock = {a.name: a for a in bench.builtin_algorithms()}
    if spec is None:
        return tuple(stock.values())
    names = [s.strip() for s in spec.split(",") if s.strip()]
    if not names:
        raise _UsageError("--algs lists no algorithms")
    unknown = [n for n in names if n not in stock]
    if unknown:
        raise _UsageError(
            f"unknown algorithms {unknown}; available: {', '.join(stock)}"
        )
    return tuple(stock[n] for n in names)


def _cmd_bench(args) -> int:
    files = sorted(args.problems.glob("*.roadfp"))
    if not files:
        raise _UsageError(f"no .roadfp files under {args.problems}")
    problems = [road.read_problem(f) for f in files]
    algorithms = _parse_algs(args.algs)
    results = bench.run_suite(
        problems,
        algorithms,
        tau_max=args.tau_max,
        eps=args.eps,
        seed=args.seed,
        backend=args.backend,
        ids=[f.stem for f in files],
    )
    meta = {
        "problems": args.problems,
        "algs": ",".join(a.name for a in algorithms),
        "tau_max": args.tau_max,
        "seed": args.seed,
        "eps": args.eps,
        "backend": args.backend or "auto",
    }
    curves = bench.profile_curves(bench.performance_ratios(results))
    paths = bench.export_results(results, curves, args.out, meta)
    print(f"wrote {paths['results']}")
    return _EXIT_OK


def _cmd_profile(args) -> int:
    results = bench.read_results(args.results)
    if not results:
        raise _UsageError(f"no result rows in {args.results}")
    curves = bench.profile_curves(bench.performance_ratios(results))
    args.out.mkdir(parents=True, exist_ok=True)
    meta = {"results": args.results}
    paths = bench.export_results(results, curves, args.out, meta)
    print(f"wrote {paths['profile']} and {paths['plot']}")
    return _EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "solve": _cmd_solve,
    "bench": _cmd_bench,
    "profile": _cmd_profile,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"cycip: error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except (road.ProblemFormatError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"cycip: error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except SystemExit as exc:
        # argparse --help exits 0; anything else is a usage failure
        return int(exc.code) if exc.code is not None else _EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
