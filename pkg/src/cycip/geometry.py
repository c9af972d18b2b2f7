"""Closed convex primitives with exact nearest-point maps.

Every set type exposes ``project`` (nearest point), ``distance``
(Euclidean distance to the set), ``residual_inf`` (max-norm of the
projection residual) and ``contains``.  All maps are closed form in
double precision and never mutate their input.

Hyperslabs admit infinite bounds, so one-sided halfspaces are the
special case ``lower = -inf`` or ``upper = +inf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Hyperplane",
    "Hyperslab",
    "CoordinateAffine",
    "SlabFamily",
    "Enlargement",
    "validate_disjoint_support",
]


def _as_vector(x, dim: int | None = None, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be one dimensional, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise ValueError(f"{name} has dimension {v.size}, expected {dim}")
    return v


@dataclass(frozen=True)
class Hyperplane:
    """Solution set of one linear equation ``<normal, x> = offset``."""

    normal: np.ndarray
    offset: float
    _norm_sq: float = field(init=False, repr=False)

    def __post_init__(self):
        a = _as_vector(self.normal, name="normal").copy()
        if not np.all(np.isfinite(a)):
            raise ValueError("normal must be finite")
        nsq = float(a @ a)
        if nsq == 0.0:
            raise ValueError("normal must be nonzero")
        a.setflags(write=False)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "_norm_sq", nsq)

    @property
    def dim(self) -> int:
        return self.normal.size

    def value(self, x) -> float:
        x = _as_vector(x, self.dim)
        return float(self.normal @ x)

    def project(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        shift = (float(self.normal @ x) - self.offset) / self._norm_sq
        return x - shift * self.normal

    def distance(self, x) -> float:
        x = _as_vector(x, self.dim)
        return abs(float(self.normal @ x) - self.offset) / np.sqrt(self._norm_sq)

    def residual_inf(self, x) -> float:
        x = _as_vector(x, self.dim)
        shift = abs(float(self.normal @ x) - self.offset) / self._norm_sq
        return shift * float(np.max(np.abs(self.normal)))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol


@dataclass(frozen=True)
class Hyperslab:
    """Points with ``lower <= <normal, x> <= upper``.

    Bounds may be infinite; a slab with one infinite bound is a
    halfspace.  ``midplane`` and ``halfwidth`` require finite bounds.
    """

    normal: np.ndarray
    lower: float
    upper: float
    _norm_sq: float = field(init=False, repr=False)

    def __post_init__(self):
        a = _as_vector(self.normal, name="normal").copy()
        if not np.all(np.isfinite(a)):
            raise ValueError("normal must be finite")
        nsq = float(a @ a)
        if nsq == 0.0:
            raise ValueError("normal must be nonzero")
        lo, hi = float(self.lower), float(self.upper)
        if np.isnan(lo) or np.isnan(hi) or lo > hi:
            raise ValueError(f"need lower <= upper, got [{lo}, {hi}]")
        a.setflags(write=False)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "_norm_sq", nsq)

    @property
    def dim(self) -> int:
        return self.normal.size

    @property
    def support(self) -> np.ndarray:
        """Indices of coordinates the slab actually constrains."""
        return np.flatnonzero(self.normal)

    def value(self, x) -> float:
        x = _as_vector(x, self.dim)
        return float(self.normal @ x)

    def _excess(self, x) -> float:
        v = self.value(x)
        return v - min(max(v, self.lower), self.upper)

    def project(self, x) -> np.ndarray:
        x = _as_vector(x, self.dim)
        e = self._excess(x)
        if e == 0.0:
            return x.copy()
        return x - (e / self._norm_sq) * self.normal

    def distance(self, x) -> float:
        return abs(self._excess(x)) / np.sqrt(self._norm_sq)

    def residual_inf(self, x) -> float:
        e = abs(self._excess(x)) / self._norm_sq
        return e * float(np.max(np.abs(self.normal)))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol

    def midplane(self) -> Hyperplane:
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("midplane needs finite bounds")
        return Hyperplane(self.normal, 0.5 * (self.lower + self.upper))

    def halfwidth(self) -> float:
        """Euclidean half-width, i.e. distance from midplane to either face."""
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ValueError("halfwidth needs finite bounds")
        return 0.5 * (self.upper - self.lower) / np.sqrt(self._norm_sq)

    def as_enlargement(self) -> "Enlargement":
        """The slab viewed as a fattened midplane."""
        return Enlargement(self.midplane(), self.halfwidth())


@dataclass(frozen=True)
class CoordinateAffine:
    """Points whose listed coordinates take prescribed values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.asarray(self.values, dtype=float).reshape(-1)
        if idx.size != val.size:
            raise ValueError("indices and values must have equal length")
        if idx.size and idx.min() < 0:
            raise ValueError("indices must be nonnegative")
        if np.unique(idx).size != idx.size:
            raise ValueError("indices must be distinct")
        order = np.argsort(idx)
        idx = idx[order].copy()
        val = val[order].copy()
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    def _check(self, x) -> np.ndarray:
        x = _as_vector(x)
        if self.indices.size and self.indices.max() >= x.size:
            raise ValueError(
                f"constrained index {int(self.indices.max())} out of range for dimension {x.size}"
            )
        return x

    def project(self, x) -> np.ndarray:
        x = self._check(x).copy()
        x[self.indices] = self.values
        return x

    def distance(self, x) -> float:
        x = self._check(x)
        if self.indices.size == 0:
            return 0.0
        d = x[self.indices] - self.values
        return float(np.sqrt(d @ d))

    def residual_inf(self, x) -> float:
        x = self._check(x)
        if self.indices.size == 0:
            return 0.0
        return float(np.max(np.abs(x[self.indices] - self.values)))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol


class SlabFamily:
    """Intersection of hyperslabs whose normals touch pairwise disjoint
    coordinate sets.

    Disjoint supports make the family separable: projecting onto the
    intersection is the same as clamping each slab independently, so all
    family operations run vectorized over packed rows.  Operations that
    rely on separability refuse to run when supports overlap; use
    ``validate_disjoint_support`` to test for that.
    """

    #: families of plain slabs are convex; the min-slope variant is not
    convex = True

    def __init__(self, slabs: Sequence[Hyperslab]):
        slabs = list(slabs)
        if not all(isinstance(s, Hyperslab) for s in slabs):
            raise TypeError("SlabFamily takes Hyperslab instances")
        dims = {s.dim for s in slabs}
        if len(dims) > 1:
            raise ValueError(f"slabs live in different dimensions: {sorted(dims)}")
        dim = dims.pop() if dims else 0
        width = max((int(s.support.size) for s in slabs), default=1)
        m = len(slabs)
        idx = np.zeros((m, width), dtype=np.int64)
        coef = np.zeros((m, width), dtype=float)
        lower = np.empty(m)
        upper = np.empty(m)
        for i, s in enumerate(slabs):
            sup = s.support
            if sup.size == 0:
                raise ValueError("slab has empty support")
            idx[i, : sup.size] = sup
            idx[i, sup.size :] = sup[0]
            coef[i, : sup.size] = s.normal[sup]
            lower[i] = s.lower
            upper[i] = s.upper
        self._init_from(dim, idx, coef, lower, upper, np.zeros(m))
        self._slabs = slabs

    @classmethod
    def from_arrays(cls, dim, idx, coef, lower, upper, inner=None, mid=None, half=None):
        """Build directly from packed rows, skipping per-slab objects.

        ``idx``/``coef`` are ``(m, width)``; unused trailing columns must
        carry coefficient zero and repeat a valid index of the same row.
        ``inner`` is the optional per-slab inner exclusion half-width in
        inner-product units (zero means an ordinary convex slab).  When
        the caller's native data is a midline and half-width, pass them
        as ``mid``/``half`` so their exact values survive; rebuilding
        them from the bounds can be off by an ulp.
        """
        self = object.__new__(cls)
        idx = np.asarray(idx, dtype=np.int64)
        coef = np.asarray(coef, dtype=float)
        if idx.ndim != 2 or idx.shape != coef.shape:
            raise ValueError("idx and coef must be matching 2-d arrays")
        m = idx.shape[0]
        lower = np.asarray(lower, dtype=float).reshape(m).copy()
        upper = np.asarray(upper, dtype=float).reshape(m).copy()
        inner = (
            np.zeros(m) if inner is None else np.asarray(inner, dtype=float).reshape(m).copy()
        )
        if (mid is None) != (half is None):
            raise ValueError("mid and half must be supplied together")
        if mid is not None:
            mid = np.asarray(mid, dtype=float).reshape(m).copy()
            half = np.asarray(half, dtype=float).reshape(m).copy()
            if np.any(half < 0.0) or np.any(np.isnan(mid)):
                raise ValueError("half-widths must be nonnegative, midlines finite")
        self._init_from(int(dim), idx.copy(), coef.copy(), lower, upper, inner, mid, half)
        self._slabs = None
        return self

    def _init_from(self, dim, idx, coef, lower, upper, inner, mid=None, half=None):
        m = idx.shape[0]
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)) or np.any(lower > upper):
            raise ValueError("need lower <= upper for every slab")
        if np.any(inner < 0.0):
            raise ValueError("inner half-widths must be nonnegative")
        if idx.size and (idx.min() < 0 or idx.max() >= dim):
            raise ValueError("slab support index out of range")
        nsq = (coef * coef).sum(axis=1)
        if np.any(nsq == 0.0):
            raise ValueError("slab has zero normal")
        self.dim = int(dim)
        self._idx = idx
        self._coef = coef
        self._lower = lower
        self._upper = upper
        self._inner = inner
        self._inv_nsq = 1.0 / nsq
        self._norm = np.sqrt(nsq)
        self._max_coef = np.max(np.abs(coef), axis=1)
        self._mid = 0.5 * (lower + upper) if mid is None else mid
        self._half = 0.5 * (upper - lower) if half is None else half
        occupied = idx[coef != 0.0]
        self._disjoint = bool(np.unique(occupied).size == occupied.size)
        for a in (idx, coef, lower, upper, inner):
            a.setflags(write=False)

    # -- structure ---------------------------------------------------------

    @property
    def size(self) -> int:
        return self._idx.shape[0]

    @property
    def slabs(self) -> list[Hyperslab]:
        """Per-slab views with dense normals (materialized on demand)."""
        if np.any(self._inner > 0.0):
            raise TypeError("a family with inner exclusions has no hyperslab decomposition")
        if self._slabs is None:
            out = []
            for i in range(self.size):
                a = np.zeros(self.dim)
                live = self._coef[i] != 0.0
                a[self._idx[i][live]] = self._coef[i][live]
                out.append(Hyperslab(a, self._lower[i], self._upper[i]))
            self._slabs = out
        return self._slabs

    def _require_disjoint(self):
        if not self._disjoint:
            raise ValueError("slab supports overlap; separable operations are invalid")

    # -- vector geometry ----------------------------------------------------

    def _check(self, x) -> np.ndarray:
        x = _as_vector(x)
        if x.size != self.dim:
            raise ValueError(f"x has dimension {x.size}, expected {self.dim}")
        return x

    def values(self, x) -> np.ndarray:
        """Inner products of x with every slab normal."""
        x = self._check(x)
        if self.size == 0:
            return np.empty(0)
        # trailing-axis sum keeps the add order of the scalar kernels
        return (self._coef * x[self._idx]).sum(axis=1)

    def _deltas(self, v: np.ndarray) -> np.ndarray:
        # all arithmetic stays in midline-relative coordinates: points
        # inside their slab get a delta of exactly zero, where the
        # round trip mid + (v - mid) would reintroduce an ulp of noise
        from . import kernels

        r = v - self._mid
        return kernels.nearest_rel(r, self._half, self._inner) - r

    def project(self, x) -> np.ndarray:
        self._require_disjoint()
        x = self._check(x).copy()
        if self.size == 0:
            return x
        dv = self._deltas(self.values(x)) * self._inv_nsq
        for k in range(self._idx.shape[1]):
            c = self._coef[:, k]
            x[self._idx[:, k]] += dv * c
        return x

    def distance(self, x) -> float:
        self._require_disjoint()
        if self.size == 0:
            self._check(x)
            return 0.0
        e = self._deltas(self.values(x)) / self._norm
        return float(np.sqrt(e @ e))

    def residual_inf(self, x) -> float:
        self._require_disjoint()
        if self.size == 0:
            self._check(x)
            return 0.0
        dv = np.abs(self._deltas(self.values(x))) * self._inv_nsq
        return float(np.max(dv * self._max_coef))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol


def validate_disjoint_support(family: SlabFamily) -> bool:
    """True iff no coordinate is touched by two slabs of the family."""
    occupied = family._idx[family._coef != 0.0]
    return bool(np.unique(occupied).size == occupied.size)


class Enlargement:
    """All points within ``radius`` of a core set.

    The core may be any object with exact ``project`` and ``distance``;
    the nearest point in the fattened set is reached by walking from the
    core projection back toward x until the distance budget is spent.
    """

    def __init__(self, core, radius: float):
        radius = float(radius)
        if not (radius >= 0.0) or not np.isfinite(radius):
            raise ValueError("radius must be finite and nonnegative")
        for attr in ("project", "distance"):
            if not callable(getattr(core, attr, None)):
                raise TypeError(f"core must provide {attr}()")
        self.core = core
        self.radius = radius

    def project(self, x) -> np.ndarray:
        x = _as_vector(x)
        d = self.core.distance(x)
        if d <= self.radius:
            return x.copy()
        p = self.core.project(x)
        return p + (self.radius / d) * (x - p)

    def distance(self, x) -> float:
        return max(0.0, self.core.distance(x) - self.radius)

    def residual_inf(self, x) -> float:
        x = _as_vector(x)
        return float(np.max(np.abs(x - self.project(x)), initial=0.0))

    def contains(self, x, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol
