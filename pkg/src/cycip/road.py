"""Road vertical-alignment feasibility model.

A design profile assigns an elevation to each station breakpoint.  Three
constraint kinds apply: interpolation (prescribed elevations at selected
stations), slope (each segment grade bounded in magnitude), and
curvature (bounded change of grade between consecutive segments).  The
nonconvex variant additionally forbids near-flat segments by requiring a
minimum absolute grade.

``compile_constraints`` turns a problem into six structured sets: the
interpolation constraints form one coordinate-affine set, slope slabs
split by parity into two disjoint-support families, and curvature slabs
split by residue mod 3 into three more.  Within each family the slabs
touch disjoint coordinates, so projections decompose per slab and the
sweep kernels can batch them.

``generate_problem`` draws random strictly feasible instances: it builds
a ground-truth profile first (slopes confined inside the tightest bounds
by a margin, curvature increments likewise) and only then chooses which
stations to pin, so a feasible witness with positive margin exists by
construction.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .geometry import CoordinateAffine, SlabFamily
from .operators import FamilySlabOperator, RelaxedProjector
from .solver import FeasibilityProblem

__all__ = [
    "RoadProblem",
    "CompiledRoadSets",
    "MinSlopeSlabFamily",
    "GeneratorParams",
    "FeasibilityWitness",
    "ConstraintCheck",
    "FeasibilityReport",
    "ProblemFormatError",
    "compile_constraints",
    "generate_problem",
    "verify_feasible",
    "project_minslope",
    "initial_point",
    "read_problem",
    "write_problem",
    "read_witness",
    "write_witness",
]


class ProblemFormatError(ValueError):
    """Malformed problem file; carries a line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True, eq=False)
class RoadProblem:
    """Breakpoints, pinned elevations, and grade/curvature bounds.

    ``interp_idx`` uses 0-based positions in memory; the file format
    stores them 1-based.  ``sigma_min`` switches on the nonconvex
    minimum-grade variant.
    """

    t: np.ndarray
    interp_idx: np.ndarray
    interp_val: np.ndarray
    sigma: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    sigma_min: float | None = None
    comment: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1).copy()
        n = t.size
        if n < 2:
            raise ValueError("need at least two breakpoints")
        if not np.all(np.isfinite(t)):
            raise ValueError("breakpoints must be finite")
        if not np.all(np.diff(t) > 0.0):
            raise ValueError("breakpoints t must be strictly increasing")
        idx = np.asarray(self.interp_idx, dtype=np.int64).reshape(-1)
        val = np.asarray(self.interp_val, dtype=float).reshape(-1).copy()
        if idx.size != val.size:
            raise ValueError("interpolation indices and values must pair up")
        if idx.size:
            if idx.min() < 0 or idx.max() >= n:
                raise ValueError("interpolation index out of range")
            if np.unique(idx).size != idx.size:
                raise ValueError("interpolation indices must be distinct")
            order = np.argsort(idx)
            idx = idx[order].copy()
            val = val[order].copy()
        if not np.all(np.isfinite(val)):
            raise ValueError("interpolation values must be finite")
        sigma = np.asarray(self.sigma, dtype=float).reshape(-1).copy()
        if sigma.size != n - 1:
            raise ValueError(f"sigma must have length n-1={n - 1}, got {sigma.size}")
        if not np.all(np.isfinite(sigma)) or not np.all(sigma > 0.0):
            raise ValueError("slope bounds sigma must be positive and finite")
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1).copy()
        delta = np.asarray(self.delta, dtype=float).reshape(-1).copy()
        if gamma.size != n - 2 or delta.size != n - 2:
            raise ValueError(f"gamma and delta must have length n-2={n - 2}")
        if not (np.all(np.isfinite(gamma)) and np.all(np.isfinite(delta))):
            raise ValueError("curvature bounds must be finite")
        if np.any(delta > gamma):
            raise ValueError("need delta <= gamma for every curvature index")
        smin = self.sigma_min
        if smin is not None:
            smin = float(smin)
            if not 0.0 < smin <= float(sigma.min()):
                raise ValueError("need 0 < sigma_min <= min(sigma)")
        for a in (t, idx, val, sigma, gamma, delta):
            a.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "interp_idx", idx)
        object.__setattr__(self, "interp_val", val)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "sigma_min", smin)
        object.__setattr__(self, "comment", str(self.comment))

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def gaps(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def convex(self) -> bool:
        return self.sigma_min is None

    def slopes(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.n},)")
        return np.diff(x) / self.gaps

    def __eq__(self, other):
        if not isinstance(other, RoadProblem):
            return NotImplemented
        return (
            np.array_equal(self.t, other.t)
            and np.array_equal(self.interp_idx, other.interp_idx)
            and np.array_equal(self.interp_val, other.interp_val)
            and np.array_equal(self.sigma, other.sigma)
            and np.array_equal(self.gamma, other.gamma)
            and np.array_equal(self.delta, other.delta)
            and self.sigma_min == other.sigma_min
            and self.comment == other.comment
        )


class MinSlopeSlabFamily(SlabFamily):
    """Slope slabs with an inner exclusion band: the allowed grade values
    are [-sigma, -sigma_min] u [sigma_min, sigma] per segment.  Not
    convex; all operator behavior on these families is heuristic."""

    convex = False


# ---------------------------------------------------------------------------
# constraint compilation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompiledRoadSets:
    """The six structured sets of a road problem plus the packed form.

    ``C2``/``C3`` hold the odd/even slope slabs (1-based numbering) and
    ``C4``/``C5``/``C6`` the curvature slabs with index residues 1, 2, 0
    mod 3, so supports are disjoint within every family.
    """

    source: RoadProblem
    C1: CoordinateAffine
    C2: SlabFamily
    C3: SlabFamily
    C4: SlabFamily
    C5: SlabFamily
    C6: SlabFamily
    pack: kernels.RoadPack = field(repr=False)

    @property
    def sets(self) -> tuple:
        return (self.C1, self.C2, self.C3, self.C4, self.C5, self.C6)

    def operators(self, policy: str = "intrepid") -> tuple:
        """Bound step maps: the interpolation set always gets its plain
        projector, the slab families the requested policy."""
        t1 = RelaxedProjector(self.C1, 1.0)
        return (t1,) + tuple(FamilySlabOperator(c, policy) for c in self.sets[1:])

    @property
    def T(self) -> tuple:
        return self.operators("intrepid")

    def problem(self, policy: str = "intrepid") -> FeasibilityProblem:
        """Assemble the solver-facing problem with packed kernels attached."""
        if policy not in ("intrepid", "project"):
            raise ValueError(f"unknown policy {policy!r}")
        intrepid = frozenset(range(1, 6)) if policy == "intrepid" else frozenset()
        code = kernels.POLICY_INTREPID if policy == "intrepid" else kernels.POLICY_PROJECT
        return FeasibilityProblem(
            sets=self.sets,
            operators=self.operators(policy),
            intrepid=intrepid,
            dim=self.source.n,
            pack=self.pack,
            pack_policy=code,
        )


def _slab_rows(p: RoadProblem):
    """Packed rows for every slope and curvature slab, grouped by family."""
    n = p.n
    dt = p.gaps
    inv_dt = 1.0 / dt

    ns = n - 1
    s_idx = np.stack([np.arange(ns), np.arange(1, n), np.arange(ns)], axis=1)
    s_coef = np.tile(np.array([-1.0, 1.0, 0.0]), (ns, 1))
    s_half = p.sigma * dt
    s_mid = np.zeros(ns)
    s_inner = np.zeros(ns) if p.sigma_min is None else p.sigma_min * dt

    nc = n - 2
    c_idx = np.stack([np.arange(nc), np.arange(1, n - 1), np.arange(2, n)], axis=1)
    c_coef = np.stack([inv_dt[:-1], -(inv_dt[:-1] + inv_dt[1:]), inv_dt[1:]], axis=1)
    c_mid = 0.5 * (p.delta + p.gamma)
    c_half = 0.5 * (p.gamma - p.delta)
    c_inner = np.zeros(nc)

    slope_groups = [np.arange(0, ns, 2), np.arange(1, ns, 2)]
    curv_groups = [np.arange(r, nc, 3) for r in range(3)]
    fams = []
    for g in slope_groups:
        fams.append((s_idx[g], s_coef[g], s_mid[g], s_half[g], s_inner[g], 2))
    for g in curv_groups:
        fams.append((c_idx[g], c_coef[g], c_mid[g], c_half[g], c_inner[g], 3))
    return fams


def compile_constraints(p: RoadProblem) -> CompiledRoadSets:
    """Group the constraints into six sets with disjoint supports per
    family and build the packed columnar form alongside."""
    n = p.n
    c1 = CoordinateAffine(p.interp_idx, p.interp_val)
    fams = _slab_rows(p)

    sets = []
    for fam_pos, (idx, coef, mid, half, inner, width) in enumerate(fams):
        cls = MinSlopeSlabFamily if (fam_pos < 2 and p.sigma_min is not None) else SlabFamily
        sets.append(
            cls.from_arrays(
                n, idx, coef, mid - half, mid + half, inner=inner, mid=mid, half=half
            )
        )

    counts = [f[0].shape[0] for f in fams]
    fam_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    total = int(fam_ptr[-1])
    slab_idx = np.vstack([f[0] for f in fams]) if total else np.zeros((0, 3), dtype=np.int64)
    slab_coef = np.vstack([f[1] for f in fams]) if total else np.zeros((0, 3))
    slab_mid = np.concatenate([f[2] for f in fams]) if total else np.zeros(0)
    slab_half = np.concatenate([f[3] for f in fams]) if total else np.zeros(0)
    slab_inner = np.concatenate([f[4] for f in fams]) if total else np.zeros(0)
    nsq = (slab_coef * slab_coef).sum(axis=1)
    pack = kernels.RoadPack(
        n=n,
        interp_idx=p.interp_idx,
        interp_val=p.interp_val,
        slab_idx=slab_idx,
        slab_coef=slab_coef,
        slab_mid=slab_mid,
        slab_half=slab_half,
        slab_inner=slab_inner,
        slab_invnsq=1.0 / nsq if total else np.zeros(0),
        slab_maxc=np.max(np.abs(slab_coef), axis=1) if total else np.zeros(0),
        fam_ptr=fam_ptr,
        fam_width=np.array([f[5] for f in fams], dtype=np.int64),
    )
    return CompiledRoadSets(p, c1, *sets, pack=pack)


def project_minslope(sigma_min: float, sigma_j: float, s: float) -> float:
    """Nearest admissible grade when grades must satisfy
    sigma_min <= |s| <= sigma_j; the tie at s = 0 goes positive."""
    sigma_min = float(sigma_min)
    sigma_j = float(sigma_j)
    if not 0.0 < sigma_min <= sigma_j:
        raise ValueError("need 0 < sigma_min <= sigma_j")
    return float(kernels._nearest_rel_scalar(float(s), sigma_j, sigma_min))


def initial_point(p: RoadProblem) -> np.ndarray:
    """Deterministic starting profile: linear interpolation through the
    pinned stations, held flat beyond the outermost ones; all zeros when
    nothing is pinned."""
    if p.interp_idx.size == 0:
        return np.zeros(p.n)
    return np.interp(p.t, p.t[p.interp_idx], p.interp_val)


# ---------------------------------------------------------------------------
# feasibility verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintCheck:
    kind: str
    index: int
    slack: float


@dataclass(frozen=True)
class FeasibilityReport:
    """Per-constraint slacks; a row passes iff slack >= -tol.

    Interpolation rows carry slack -|x_j - y_j| (equalities can only
    lose); inequality rows carry their true slack, positive means
    strictly inside.  Indices are 1-based like the file format.
    """

    tol: float
    rows: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(r.slack >= -self.tol for r in self.rows)

    @property
    def failures(self) -> tuple[ConstraintCheck, ...]:
        return tuple(r for r in self.rows if r.slack < -self.tol)

    @property
    def worst(self) -> ConstraintCheck | None:
        return min(self.rows, key=lambda r: r.slack) if self.rows else None

    def margin(self) -> float:
        """Smallest slack over the inequality rows (strict-feasibility
        margin of the point); +inf when there are none."""
        ineq = [r.slack for r in self.rows if r.kind != "interpolation"]
        return min(ineq) if ineq else float("inf")

    def write_csv(self, dest) -> None:
        close = False
        if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
            fh = open(dest, "w", encoding="utf-8")
            close = True
        else:
            fh = dest
        try:
            fh.write("constraint_kind,index,slack\n")
            for r in self.rows:
                fh.write(f"{r.kind},{r.index},{r.slack!r}\n")
        finally:
            if close:
                fh.close()


def verify_feasible(p: RoadProblem, x, tol: float) -> FeasibilityReport:
    """Check every constraint of the problem at x, reporting one slack
    per constraint; ``report.ok`` holds iff all slacks are >= -tol."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({p.n},)")
    tol = float(tol)
    if tol < 0.0:
        raise ValueError("tol must be nonnegative")
    rows: list[ConstraintCheck] = []
    for j, y in zip(p.interp_idx, p.interp_val):
        rows.append(ConstraintCheck("interpolation", int(j) + 1, -abs(float(x[j]) - float(y))))
    s = p.slopes(x)
    for j0 in range(p.n - 1):
        rows.append(ConstraintCheck("slope", j0 + 1, float(p.sigma[j0] - abs(s[j0]))))
    u = np.diff(s)
    for j0 in range(p.n - 2):
        slack = min(float(p.gamma[j0] - u[j0]), float(u[j0] - p.delta[j0]))
        rows.append(ConstraintCheck("curvature", j0 + 1, slack))
    if p.sigma_min is not None:
        for j0 in range(p.n - 1):
            rows.append(ConstraintCheck("min_slope", j0 + 1, float(abs(s[j0]) - p.sigma_min)))
    return FeasibilityReport(tol, tuple(rows))


# ---------------------------------------------------------------------------
# random problem generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for the strictly feasible instance generator.

    ``margin`` is the slack every sampled slope and curvature increment
    keeps from its bounds.  The ground-truth slope walk is additionally
    confined to ``band_frac`` of the tightest slope bound, which keeps
    elevations from drifting and guarantees the walk never gets stuck.
    """

    gap_range: tuple[float, float] = (20.0, 80.0)
    sigma_range: tuple[float, float] = (0.05, 0.12)
    curvature_range: tuple[float, float] = (0.006, 0.02)
    margin: float = 2e-3
    band_frac: float = 0.8
    interp_spacing: int = 25
    base_elevation: tuple[float, float] = (0.0, 50.0)
    sigma_min: float | None = None
    retry_cap: int = 20

    def __post_init__(self):
        for name in ("gap_range", "sigma_range", "curvature_range", "base_elevation"):
            lo, hi = getattr(self, name)
            if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
                raise ValueError(f"{name} must be a finite nondecreasing pair")
        if self.gap_range[0] <= 0.0:
            raise ValueError("gaps must be positive")
        if self.margin <= 0.0:
            raise ValueError("margin must be positive")
        if not 0.0 < self.band_frac <= 1.0:
            raise ValueError("band_frac must lie in (0, 1]")
        if self.interp_spacing < 1:
            raise ValueError("interp_spacing must be at least 1")
        if self.sigma_min is not None and self.sigma_min <= 0.0:
            raise ValueError("sigma_min must be positive")


@dataclass(frozen=True)
class FeasibilityWitness:
    """A strictly feasible profile and its smallest inequality slack."""

    point: np.ndarray
    margin: float

    def __post_init__(self):
        pt = np.asarray(self.point, dtype=float).copy()
        pt.setflags(write=False)
        object.__setattr__(self, "point", pt)
        object.__setattr__(self, "margin", float(self.margin))


def _walk_slopes(rng, sigma, gamma, delta, margin, band, inner):
    """Slope sequence with every value in the band and every increment
    strictly inside its curvature window; ``inner > 0`` additionally
    keeps |slope| >= inner (two-sided band)."""
    ns = sigma.size
    s = np.empty(ns)
    if inner > 0.0:
        side = 1.0 if rng.random() < 0.5 else -1.0
        s[0] = side * rng.uniform(inner, band)
    else:
        s[0] = rng.uniform(-band, band)
    for j in range(ns - 1):
        lo = max(-band, s[j] + delta[j] + margin)
        hi = min(band, s[j] + gamma[j] - margin)
        if inner > 0.0:
            pieces = []
            neg = (max(lo, -band), min(hi, -inner))
            pos = (max(lo, inner), min(hi, band))
            for a, b in (neg, pos):
                if a <= b:
                    pieces.append((a, b))
            if not pieces:
                return None
            lengths = [b - a for a, b in pieces]
            tot = sum(lengths)
            if tot == 0.0:
                s[j + 1] = pieces[int(rng.integers(len(pieces)))][0]
            else:
                u = rng.random() * tot
                for (a, b), ell in zip(pieces, lengths):
                    if u <= ell:
                        s[j + 1] = min(a + u, b)
                        break
                    u -= ell
                else:
                    s[j + 1] = pieces[-1][1]
        else:
            s[j + 1] = rng.uniform(lo, hi)
    return s


def generate_problem(
    n: int, seed: int, params: GeneratorParams | None = None
) -> tuple[RoadProblem, FeasibilityWitness]:
    """Draw a random strictly feasible instance, deterministic in
    (n, seed, params); returns the problem and its ground-truth witness."""
    if n < 3:
        raise ValueError("n must be at least 3")
    params = params or GeneratorParams()
    for attempt in range(params.retry_cap):
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), int(n), attempt)))
        built = _generate_once(n, rng, params, seed)
        if built is not None:
            problem, witness = built
            if witness.margin > 0.0:
                return problem, witness
    raise ValueError(
        f"could not draw a strictly feasible instance for n={n}, seed={seed}; "
        "parameter combination appears infeasible"
    )


def _generate_once(n, rng, params, seed):
    gaps = rng.uniform(*params.gap_range, size=n - 1)
    t = np.concatenate([[0.0], np.cumsum(gaps)])
    sigma = rng.uniform(*params.sigma_range, size=n - 1)
    gamma = rng.uniform(*params.curvature_range, size=n - 2)
    delta = -rng.uniform(*params.curvature_range, size=n - 2)

    m = params.margin
    if np.any(gamma - m <= 0.0) or np.any(delta + m >= 0.0):
        return None
    band = params.band_frac * (float(sigma.min()) - m)
    if band <= 0.0:
        return None
    inner = 0.0
    if params.sigma_min is not None:
        inner = params.sigma_min + m
        if inner >= band:
            return None

    s = _walk_slopes(rng, sigma, gamma, delta, m, band, inner)
    if s is None:
        return None
    x = np.empty(n)
    x[0] = rng.uniform(*params.base_elevation)
    x[1:] = x[0] + np.cumsum(s * gaps)

    count = max(2, round(n / params.interp_spacing))
    count = min(count, n)
    anchors = {0, n - 1}
    extra = count - len(anchors)
    if extra > 0 and n > 2:
        pool = np.arange(1, n - 1)
        anchors |= set(rng.choice(pool, size=min(extra, pool.size), replace=False).tolist())
    idx = np.array(sorted(anchors), dtype=np.int64)

    problem = RoadProblem(
        t=t,
        interp_idx=idx,
        interp_val=x[idx],
        sigma=sigma,
        gamma=gamma,
        delta=delta,
        sigma_min=params.sigma_min,
        comment=f"generated seed={seed} n={n}",
    )
    margin = verify_feasible(problem, x, 0.0).margin()
    return problem, FeasibilityWitness(x, margin)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

_FORMAT_TAG = "roadfp/1"
_WITNESS_TAG = "roadfp-witness/1"


def _fmt_array(a) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(a, dtype=float))


def write_problem(p: RoadProblem, dest) -> None:
    """Serialize to the flat key-value text form (UTF-8, one field per
    line); 1-based interpolation indices."""
    lines = [_FORMAT_TAG]
    lines.append(f"n = {p.n}")
    lines.append(f"t = {_fmt_array(p.t)}")
    lines.append("J = " + " ".join(str(int(j) + 1) for j in p.interp_idx))
    lines.append(f"y = {_fmt_array(p.interp_val)}")
    lines.append(f"sigma = {_fmt_array(p.sigma)}")
    lines.append(f"gamma = {_fmt_array(p.gamma)}")
    lines.append(f"delta = {_fmt_array(p.delta)}")
    if p.sigma_min is not None:
        lines.append(f"sigma_min = {p.sigma_min!r}")
    if p.comment:
        lines.append(f"comment = {p.comment.replace(chr(10), ' ')}")
    _write_text(dest, "\n".join(lines) + "\n")


def _write_text(dest, text: str) -> None:
    if isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__"):
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        dest.write(text)


def _read_lines(src) -> list[str]:
    if isinstance(src, (str, bytes)) or hasattr(src, "__fspath__"):
        with open(src, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    return src.read().splitlines()


def _parse_kv(lines: Sequence[str], tag: str) -> dict[str, tuple[int, str]]:
    if not lines or lines[0].strip() != tag:
        raise ProblemFormatError(f"expected version tag {tag!r}", line=1)
    fields: dict[str, tuple[int, str]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ProblemFormatError("expected 'key = value'", line=lineno)
        key, _, value = text.partition("=")
        key = key.strip()
        if key in fields:
            raise ProblemFormatError(f"duplicate field {key!r}", line=lineno)
        fields[key] = (lineno, value.strip())
    return fields


def _parse_floats(text: str, lineno: int, key: str) -> np.ndarray:
    parts = text.split()
    try:
        return np.array([float(v) for v in parts], dtype=float)
    except ValueError as exc:
        raise ProblemFormatError(f"bad number in {key!r}: {exc}", line=lineno) from None


def read_problem(src) -> RoadProblem:
    """Parse a ``roadfp/1`` file; raises ProblemFormatError with the
    offending line for malformed input or invariant violations."""
    fields = _parse_kv(_read_lines(src), _FORMAT_TAG)
    known = {"n", "t", "J", "y", "sigma", "gamma", "delta", "sigma_min", "comment"}
    for key, (lineno, _) in fields.items():
        if key not in known:
            raise ProblemFormatError(f"unknown field {key!r}", line=lineno)
    for key in ("n", "t", "J", "y", "sigma", "gamma", "delta"):
        if key not in fields:
            raise ProblemFormatError(f"missing required field {key!r}")

    lineno, text = fields["n"]
    try:
        n = int(text)
    except ValueError:
        raise ProblemFormatError(f"bad integer for 'n': {text!r}", line=lineno) from None

    arrays = {}
    for key, want in (("t", n), ("sigma", n - 1), ("gamma", n - 2), ("delta", n - 2)):
        lineno, text = fields[key]
        arr = _parse_floats(text, lineno, key)
        if arr.size != want:
            raise ProblemFormatError(
                f"field {key!r} has {arr.size} entries, expected {want}", line=lineno
            )
        arrays[key] = arr

    lineno, text = fields["J"]
    j_parts = text.split()
    try:
        j_one_based = [int(v) for v in j_parts]
    except ValueError as exc:
        raise ProblemFormatError(f"bad index in 'J': {exc}", line=lineno) from None
    for j in j_one_based:
        if not 1 <= j <= n:
            raise ProblemFormatError(f"index {j} in 'J' outside 1..{n}", line=lineno)

    lineno, text = fields["y"]
    y = _parse_floats(text, lineno, "y")
    if y.size != len(j_one_based):
        raise ProblemFormatError(
            f"'y' has {y.size} entries but 'J' lists {len(j_one_based)}", line=lineno
        )

    sigma_min = None
    if "sigma_min" in fields:
        lineno, text = fields["sigma_min"]
        sigma_min = float(_parse_floats(text, lineno, "sigma_min")[0]) if text else None

    comment = fields.get("comment", (0, ""))[1]

    try:
        return RoadProblem(
            t=arrays["t"],
            interp_idx=np.array(j_one_based, dtype=np.int64) - 1,
            interp_val=y,
            sigma=arrays["sigma"],
            gamma=arrays["gamma"],
            delta=arrays["delta"],
            sigma_min=sigma_min,
            comment=comment,
        )
    except ValueError as exc:
        raise ProblemFormatError(str(exc)) from None


def write_witness(w: FeasibilityWitness, dest) -> None:
    lines = [
        _WITNESS_TAG,
        f"n = {w.point.size}",
        f"margin = {w.margin!r}",
        f"x = {_fmt_array(w.point)}",
    ]
    _write_text(dest, "\n".join(lines) + "\n")


def read_witness(src) -> FeasibilityWitness:
    fields = _parse_kv(_read_lines(src), _WITNESS_TAG)
    for key in ("n", "margin", "x"):
        if key not in fields:
            raise ProblemFormatError(f"missing required field {key!r}")
    lineno, text = fields["n"]
    try:
        n = int(text)
    except ValueError:
        raise ProblemFormatError(f"bad integer for 'n': {text!r}", line=lineno) from None
    lineno, text = fields["x"]
    x = _parse_floats(text, lineno, "x")
    if x.size != n:
        raise ProblemFormatError(f"'x' has {x.size} entries, expected {n}", line=lineno)
    lineno, text = fields["margin"]
    margin = float(_parse_floats(text, lineno, "margin")[0])
    return FeasibilityWitness(x, margin)
