"""Sweep iteration driver for indexed feasibility problems.

``run_cycip`` walks the constraint sets in the order a control schedule
dictates, applying each set's bound step map, and stops once the chosen
infeasibility metric falls below the tolerance.  Metrics are evaluated
once per sweep (every ``card(I)`` steps, including before the first
step), because a metric evaluation costs one projection per set and
per-step checks would dominate runtime.

Two measures of infeasibility are provided: ``infeasibility_d2`` is the
root-sum-square of the Euclidean set distances and ``infeasibility_dinf``
the largest max-norm projection residual across sets.  Both vanish
exactly on the intersection.

Problems compiled from road data carry a packed columnar form; runs that
do not need per-step iterates are dispatched to the compiled kernels in
:mod:`cycip.kernels`, while full traces take the generic object path.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .control import ControlSchedule
from .kernels import ITERATION_LIMIT, SOLVED, TIME_LIMIT

__all__ = [
    "FeasibilityProblem",
    "SolverConfig",
    "IterationTrace",
    "SolveResult",
    "run_cycip",
    "infeasibility_d2",
    "infeasibility_dinf",
    "fejer_margin",
    "SOLVED",
    "ITERATION_LIMIT",
    "TIME_LIMIT",
]

_METRICS = ("d2", "dinf")
_TRACE_DEPTHS = ("none", "summary", "full")


@dataclass(frozen=True)
class FeasibilityProblem:
    """Indexed constraint family with bound step maps.

    ``intrepid`` lists the positions driven by intrepid-type operators
    (sets treated as fattened cores); all other positions must carry
    relaxed projectors.  ``pack``/``pack_policy`` optionally attach the
    columnar form consumed by the compiled sweep kernels.
    """

    sets: tuple
    operators: tuple
    intrepid: frozenset = frozenset()
    dim: int | None = None
    pack: kernels.RoadPack | None = field(default=None, repr=False)
    pack_policy: int | None = None

    def __post_init__(self):
        sets = tuple(self.sets)
        ops = tuple(self.operators)
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "intrepid", frozenset(int(i) for i in self.intrepid))
        if not sets:
            raise ValueError("problem needs at least one set")
        if len(sets) != len(ops):
            raise ValueError("sets and operators must pair up")
        m = len(sets)
        if any(i < 0 or i >= m for i in self.intrepid):
            raise ValueError("intrepid positions out of range")
        for i, op in enumerate(ops):
            kind = getattr(op, "kind", None)
            want = "intrepid" if i in self.intrepid else "relaxed"
            if kind != want:
                raise ValueError(f"operator at position {i} has kind {kind!r}, expected {want!r}")
        if self.pack is not None:
            if self.pack_policy is None:
                raise ValueError("pack needs pack_policy")
            if self.dim is not None and self.dim != self.pack.n:
                raise ValueError("dim disagrees with pack")

    @property
    def size(self) -> int:
        return len(self.sets)

    @property
    def convex(self) -> bool:
        return all(getattr(s, "convex", True) for s in self.sets)


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 5e-4
    metric: str = "dinf"
    max_iters: int = 1_000_000
    max_time: float = 150.0
    control: ControlSchedule | None = None
    trace: str = "none"
    backend: str | None = None

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")
        if self.metric not in _METRICS:
            raise ValueError(f"metric must be one of {_METRICS}")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be positive")
        object.__setattr__(self, "max_iters", int(self.max_iters))
        if not self.max_time > 0.0:
            raise ValueError("max_time must be positive")
        if self.trace not in _TRACE_DEPTHS:
            raise ValueError(f"trace must be one of {_TRACE_DEPTHS}")


@dataclass
class IterationTrace:
    """Per-sweep progress records, optionally with every iterate.

    ``rows`` has one record per completed sweep with columns
    (k, index, step_norm, d2, dinf): the step count after the sweep, the
    last index applied, the norm of the last step, and both infeasibility
    measures.  ``iterates`` (depth "full" only) holds x_0, x_1, ... for
    every individual step.
    """

    depth: str
    sweep_size: int
    rows: np.ndarray
    iterates: list[np.ndarray] | None = None

    def write_csv(self, dest) -> None:
        close = False
        if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
            fh = open(dest, "w", encoding="utf-8")
            close = True
        else:
            fh = dest
        try:
            fh.write("k,index,step_norm,d2,dinf\n")
            for k, idx, sn, d2v, dinfv in self.rows:
                fh.write(f"{int(k)},{int(idx)},{sn!r},{d2v!r},{dinfv!r}\n")
        finally:
            if close:
                fh.close()


@dataclass(frozen=True)
class SolveResult:
    status: str
    x: np.ndarray
    iterations: int
    wall_time: float
    d2: float
    dinf: float
    heuristic: bool = False
    trace: IterationTrace | None = None


def infeasibility_d2(problem: FeasibilityProblem, x) -> float:
    """Root-sum-square of the Euclidean distances to every set."""
    x = np.asarray(x, dtype=float)
    tot = 0.0
    for s in problem.sets:
        d = s.distance(x)
        tot += d * d
    return float(np.sqrt(tot))


def infeasibility_dinf(problem: FeasibilityProblem, x) -> float:
    """Largest max-norm projection residual across the sets."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    for s in problem.sets:
        f = getattr(s, "residual_inf", None)
        r = f(x) if callable(f) else float(np.max(np.abs(x - s.project(x)), initial=0.0))
        if r > worst:
            worst = r
    return worst


def fejer_margin(trace: IterationTrace, c) -> float:
    """Largest one-step increase of ``||x_k - c||`` along a full trace.

    Nonpositive (up to rounding) whenever the iteration is distance
    nonincreasing toward c, e.g. for convex problems with c in the
    intersection.
    """
    if trace is None or trace.iterates is None:
        raise ValueError("fejer_margin needs a full trace with iterates")
    c = np.asarray(c, dtype=float)
    its = trace.iterates
    if len(its) < 2:
        return 0.0
    dists = [float(np.linalg.norm(x - c)) for x in its]
    return max(dists[k + 1] - dists[k] for k in range(len(dists) - 1))


def _schedule_for(problem: FeasibilityProblem, cfg: SolverConfig) -> ControlSchedule:
    sched = cfg.control or ControlSchedule.cyclic(range(problem.size))
    if tuple(sorted(sched.indices)) != tuple(range(problem.size)):
        raise ValueError(
            f"schedule indices {sorted(sched.indices)} must be exactly 0..{problem.size - 1}"
        )
    return sched


def run_cycip(problem: FeasibilityProblem, cfg: SolverConfig, x0) -> SolveResult:
    """Iterate x_{k+1} = T_{i(k)} x_k until the chosen metric drops
    below ``cfg.eps`` or an iteration/wall-clock budget runs out.

    The result carries both final infeasibility measures regardless of
    status.  A feasible start returns immediately with zero iterations.
    The iteration budget is spent in whole sweeps.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim != 1:
        raise ValueError("x0 must be a vector")
    if problem.dim is not None and x0.size != problem.dim:
        raise ValueError(f"x0 has dimension {x0.size}, expected {problem.dim}")
    schedule = _schedule_for(problem, cfg)
    heuristic = not problem.convex

    if problem.pack is not None and cfg.trace != "full":
        run = kernels.solve_packed(
            problem.pack,
            x0,
            policy=problem.pack_policy,
            metric=cfg.metric,
            eps=cfg.eps,
            max_iters=cfg.max_iters,
            max_time=cfg.max_time,
            schedule=schedule,
            want_trace=cfg.trace == "summary",
            backend=cfg.backend,
        )
        trace = (
            IterationTrace("summary", problem.size, run.trace_rows)
            if cfg.trace == "summary"
            else None
        )
        return SolveResult(
            run.status, run.x, run.steps, run.wall, run.d2, run.dinf, heuristic, trace
        )

    return _run_generic(problem, cfg, x0, schedule, heuristic)


def _run_generic(problem, cfg, x0, schedule, heuristic):
    t0 = time.perf_counter()
    m = problem.size
    use_d2 = cfg.metric == "d2"
    tracing = cfg.trace != "none"
    full = cfg.trace == "full"

    x = x0.copy()
    rows: list[tuple] = []
    iterates: list[np.ndarray] | None = [x.copy()] if full else None

    d2v = infeasibility_d2(problem, x)
    dinfv = infeasibility_dinf(problem, x)
    if (d2v if use_d2 else dinfv) < cfg.eps:
        trace = _build_trace(cfg.trace, m, rows, iterates)
        return SolveResult(SOLVED, x, 0, time.perf_counter() - t0, d2v, dinfv, heuristic, trace)

    budget = cfg.max_iters // m
    steps = 0
    status = ITERATION_LIMIT
    for sweep in range(budget):
        if time.perf_counter() - t0 >= cfg.max_time:
            status = TIME_LIMIT
            break
        order = schedule.order_block(sweep, 1)[0]
        prev = x
        for pos in range(m):
            i = int(order[pos])
            prev = x
            x = problem.operators[i].apply(prev)
            if full:
                iterates.append(x)
        steps += m
        if tracing:
            d2v = infeasibility_d2(problem, x)
            dinfv = infeasibility_dinf(problem, x)
            rows.append((steps, int(order[-1]), float(np.linalg.norm(x - prev)), d2v, dinfv))
        elif use_d2:
            d2v = infeasibility_d2(problem, x)
        else:
            dinfv = infeasibility_dinf(problem, x)
        if (d2v if use_d2 else dinfv) < cfg.eps:
            status = SOLVED
            break

    wall = time.perf_counter() - t0
    d2v = infeasibility_d2(problem, x)
    dinfv = infeasibility_dinf(problem, x)
    trace = _build_trace(cfg.trace, m, rows, iterates)
    return SolveResult(status, x, steps, wall, d2v, dinfv, heuristic, trace)


def _build_trace(depth, sweep_size, rows, iterates):
    if depth == "none":
        return None
    arr = np.array(rows, dtype=float) if rows else np.empty((0, 5))
    return IterationTrace(depth, sweep_size, arr, iterates)
