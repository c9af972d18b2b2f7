"""Benchmark harness: timed solver runs and performance profiles.

A suite crosses a list of problems with a list of algorithm variants,
times each cell, and summarizes the outcome as performance profiles: for
each algorithm the curve rho(kappa) giving the fraction of problems it
solved within a factor 2**kappa of the per-problem best time.  Unsolved
cells carry infinite ratio and never count toward any curve, but they do
stay in the denominator.

Exports are byte deterministic: identical inputs produce identical CSV
and gnuplot bytes, with run configuration echoed in comment headers
instead of timestamps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .control import ControlSchedule
from .road import RoadProblem, compile_constraints, initial_point
from .solver import FeasibilityProblem, SolverConfig, run_cycip

__all__ = [
    "AlgorithmSpec",
    "RunResult",
    "RatioTable",
    "ProfileCurve",
    "builtin_algorithms",
    "run_suite",
    "performance_ratios",
    "profile_curves",
    "export_results",
    "read_results",
]


@dataclass(frozen=True)
class AlgorithmSpec:
    """One solver variant: stopping metric, sweep order, and step policy."""

    name: str
    metric: str
    control: str
    policy: str

    def __post_init__(self):
        if self.metric not in ("d2", "dinf"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.control not in ("cyclic", "random"):
            raise ValueError(f"unknown control {self.control!r}")
        if self.policy not in ("intrepid", "project"):
            raise ValueError(f"unknown policy {self.policy!r}")


def builtin_algorithms() -> tuple[AlgorithmSpec, ...]:
    """The five stock variants the benchmark compares."""
    return (
        AlgorithmSpec("CycIP2", "d2", "cyclic", "intrepid"),
        AlgorithmSpec("CycIPinf", "dinf", "cyclic", "intrepid"),
        AlgorithmSpec("rCycIP2", "d2", "random", "intrepid"),
        AlgorithmSpec("rCycIPinf", "dinf", "random", "intrepid"),
        AlgorithmSpec("CycP", "dinf", "cyclic", "project"),
    )


@dataclass(frozen=True)
class RunResult:
    """Outcome of one (problem, algorithm) cell."""

    problem_id: str
    n: int
    algorithm: str
    status: str
    iterations: int
    time_ms: float
    d2: float
    dinf: float

    def __post_init__(self):
        if self.status not in ("solved", "timeout"):
            raise ValueError(f"unknown status {self.status!r}")


def _cell_seed(seed: int, p_idx: int, a_idx: int) -> int:
    ss = np.random.SeedSequence((int(seed), int(p_idx), int(a_idx)))
    return int(ss.generate_state(1, np.uint64)[0])


def _materialize(item, a: AlgorithmSpec):
    """Resolve a suite item to (FeasibilityProblem, x0).

    Road problems are compiled under the algorithm's own step policy;
    pre-built (problem, x0) pairs are run exactly as given, so only the
    metric and sweep order of the algorithm apply to them.
    """
    if isinstance(item, RoadProblem):
        return compile_constraints(item).problem(a.policy), initial_point(item)
    problem, x0 = item
    if not isinstance(problem, FeasibilityProblem):
        raise TypeError(
            "suite items must be RoadProblem or (FeasibilityProblem, x0) pairs"
        )
    return problem, np.asarray(x0, dtype=float)


def run_suite(
    problems: Sequence,
    algorithms: Iterable[AlgorithmSpec] | None = None,
    *,
    tau_max: float = 150.0,
    eps: float = 5e-4,
    max_iters: int = 1_000_000,
    seed: int = 0,
    backend: str | None = None,
    ids: Sequence[str] | None = None,
) -> list[RunResult]:
    """Run every algorithm on every problem, timing each cell.

    Cells run serially; the kernel backend is warmed up before any timer
    starts so compilation never lands inside a measurement.  Wall time
    per cell is capped at ``tau_max`` seconds and recorded in ms.
    ``ids`` overrides the default positional problem labels.
    """
    algorithms = tuple(algorithms) if algorithms is not None else builtin_algorithms()
    if tau_max <= 0.0:
        raise ValueError("tau_max must be positive")
    if ids is not None and len(ids) != len(problems):
        raise ValueError("ids must pair up with problems")
    kernels.warmup(backend)
    out: list[RunResult] = []
    for p_idx, item in enumerate(problems):
        pid = ids[p_idx] if ids is not None else f"p{p_idx:03d}"
        for a_idx, a in enumerate(algorithms):
            problem, x0 = _materialize(item, a)
            m = problem.size
            if a.control == "random":
                control = ControlSchedule.random_blocks(
                    range(m), seed=_cell_seed(seed, p_idx, a_idx)
                )
            else:
                control = ControlSchedule.cyclic(range(m))
            cfg = SolverConfig(
                eps=eps,
                metric=a.metric,
                max_iters=max_iters,
                max_time=tau_max,
                control=control,
                backend=backend,
            )
            t0 = time.perf_counter()
            res = run_cycip(problem, cfg, x0)
            elapsed = time.perf_counter() - t0
            out.append(
                RunResult(
                    problem_id=pid,
                    n=problem.dim if problem.dim is not None else x0.size,
                    algorithm=a.name,
                    status="solved" if res.status == kernels.SOLVED else "timeout",
                    iterations=res.iterations,
                    time_ms=1000.0 * min(elapsed, tau_max),
                    d2=res.d2,
                    dinf=res.dinf,
                )
            )
    return out


@dataclass(frozen=True)
class RatioTable:
    """Per-problem performance ratios: ``ratios[p, a]`` is the cell time
    divided by the best solved time on problem p; +inf when the cell
    timed out or when nothing solved p."""

    problem_ids: tuple[str, ...]
    algorithms: tuple[str, ...]
    ratios: np.ndarray

    @property
    def log2(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log2(self.ratios)


def performance_ratios(results: Sequence[RunResult]) -> RatioTable:
    """Collapse suite results into the ratio matrix."""
    results = list(results)
    if not results:
        raise ValueError("no results to profile")
    pids: list[str] = []
    algs: list[str] = []
    for r in results:
        if r.problem_id not in pids:
            pids.append(r.problem_id)
        if r.algorithm not in algs:
            algs.append(r.algorithm)
    tau = np.full((len(pids), len(algs)), np.inf)
    for r in results:
        tau[pids.index(r.problem_id), algs.index(r.algorithm)] = (
            r.time_ms if r.status == "solved" else np.inf
        )
    best = tau.min(axis=1)
    ratios = np.empty_like(tau)
    for i in range(len(pids)):
        if not np.isfinite(best[i]):
            ratios[i, :] = np.inf
            continue
        for j in range(len(algs)):
            if not np.isfinite(tau[i, j]):
                ratios[i, j] = np.inf
            elif tau[i, j] == best[i]:
                ratios[i, j] = 1.0
            else:
                ratios[i, j] = tau[i, j] / best[i]
    return RatioTable(tuple(pids), tuple(algs), ratios)


@dataclass(frozen=True)
class ProfileCurve:
    """rho(kappa) for one algorithm: fraction of problems solved within
    a factor 2**kappa of the best."""

    algorithm: str
    kappa: np.ndarray
    rho: np.ndarray


def profile_curves(
    table: RatioTable, kappa_grid: Sequence[float] | None = None
) -> list[ProfileCurve]:
    """Evaluate every algorithm's profile on a shared kappa grid.

    The default grid is the sorted set of observed finite log2 ratios
    together with 0 and a one-unit tail, so the step curve is exact.
    """
    log2r = table.log2
    if kappa_grid is None:
        finite = log2r[np.isfinite(log2r)]
        points = np.unique(np.concatenate([[0.0], finite]))
        grid = np.concatenate([points, [points[-1] + 1.0]])
    else:
        grid = np.asarray(kappa_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("kappa_grid must be a nonempty 1-d sequence")
        if np.any(np.diff(grid) < 0.0):
            raise ValueError("kappa_grid must be nondecreasing")
        if grid[0] > 0.0:
            raise ValueError("kappa_grid must start at or below 0")
    n_problems = len(table.problem_ids)
    out = []
    for j, name in enumerate(table.algorithms):
        col = log2r[:, j]
        rho = np.array([np.count_nonzero(col <= k) / n_problems for k in grid])
        out.append(ProfileCurve(name, grid.copy(), rho))
    return out


# ---------------------------------------------------------------------------
# deterministic exports
# ---------------------------------------------------------------------------


def _meta_lines(meta: dict | None) -> list[str]:
    if not meta:
        return []
    return [f"# {k} = {v}" for k, v in meta.items()]


def export_results(
    results: Sequence[RunResult],
    curves: Sequence[ProfileCurve],
    out_dir,
    meta: dict | None = None,
) -> dict[str, Path]:
    """Write results.csv, profile.csv, and profile.gp under out_dir.

    Output bytes depend only on the arguments; configuration goes into
    ``#`` comment headers, never timestamps.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}

    lines = _meta_lines(meta)
    lines.append("problem_id,n,algorithm,status,iterations,time_ms,d2_final,dinf_final")
    for r in results:
        lines.append(
            f"{r.problem_id},{r.n},{r.algorithm},{r.status},"
            f"{r.iterations},{r.time_ms!r},{r.d2!r},{r.dinf!r}"
        )
    paths["results"] = out_dir / "results.csv"
    paths["results"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = _meta_lines(meta)
    lines.append("algorithm,kappa,rho")
    for c in curves:
        for k, r in zip(c.kappa, c.rho):
            lines.append(f"{c.algorithm},{float(k)!r},{float(r)!r}")
    paths["profile"] = out_dir / "profile.csv"
    paths["profile"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    paths["plot"] = out_dir / "profile.gp"
    paths["plot"].write_text(_gnuplot_script(curves, meta), encoding="utf-8")
    return paths


def _gnuplot_script(curves: Sequence[ProfileCurve], meta: dict | None) -> str:
    lines = _meta_lines(meta)
    lines += [
        "set xlabel 'kappa'",
        "set ylabel 'rho'",
        "set yrange [0:1.05]",
        "set key bottom right",
        "",
        "$profiles << EOD",
    ]
    for i, c in enumerate(curves):
        if i:
            lines += ["", ""]
        lines.append(f"# {c.algorithm}")
        for k, r in zip(c.kappa, c.rho):
            lines.append(f"{float(k)!r} {float(r)!r}")
    lines.append("EOD")
    lines.append("")
    if curves:
        terms = [
            f"$profiles index {i} using 1:2 with steps title '{c.algorithm}'"
            for i, c in enumerate(curves)
        ]
        lines.append("plot \\")
        for i, t in enumerate(terms):
            lines.append("    " + t + (", \\" if i + 1 < len(terms) else ""))
    lines.append("")
    return "\n".join(lines)


def read_results(path) -> list[RunResult]:
    """Parse a results.csv written by ``export_results``."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        header_seen = False
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                header_seen = True
                continue
            pid, n, alg, status, iters, ms, d2, dinf = line.split(",")
            out.append(
                RunResult(pid, int(n), alg, status, int(iters), float(ms), float(d2), float(dinf))
            )
    return out
