"""Step maps used by the feasibility iteration.

Two families of operators: relaxed projectors, which move a configurable
fraction of the way to the nearest point of a convex target, and
intrepid projectors, which treat their target as a fattened core set and
act in three regimes depending on how far the point is from the core
(keep it, snap it to the core, or reflect it partway through).

Operators are immutable after construction and never mutate their
argument; ``apply`` always returns a fresh vector.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .geometry import Hyperplane, SlabFamily, validate_disjoint_support

__all__ = [
    "RelaxedProjector",
    "IntrepidProjector",
    "BlockIntrepidProjector",
    "FamilySlabOperator",
    "decrease_certificate",
]


class RelaxedProjector:
    """x maps to (1 - relaxation) x + relaxation * P(x).

    Relaxation 1 is the plain nearest-point map; values above 1
    overshoot through the target, values below stop short.
    """

    kind = "relaxed"

    def __init__(self, target, relaxation: float = 1.0):
        relaxation = float(relaxation)
        if not 0.0 < relaxation < 2.0:
            raise ValueError(f"relaxation must lie in (0, 2), got {relaxation}")
        if not callable(getattr(target, "project", None)):
            raise TypeError("target must provide project()")
        self.target = target
        self.relaxation = relaxation

    def apply(self, x) -> np.ndarray:
        p = self.target.project(x)
        if self.relaxation == 1.0:
            return p
        x = np.asarray(x, dtype=float)
        return x + self.relaxation * (p - x)


class IntrepidProjector:
    """Three-regime step toward the set of points within ``radius`` of a core.

    With d the distance from the core: d <= radius keeps the point
    (it is already in the fattened set); d >= 2*radius projects all the
    way onto the core; in between the point is reflected partway through
    the near face, by x + (1 - d/radius)(x - P_core(x)).  Ties at the
    seams take the cheaper branch; both branches agree there.
    """

    kind = "intrepid"

    def __init__(self, core, radius: float):
        radius = float(radius)
        if not radius > 0.0 or not np.isfinite(radius):
            raise ValueError(f"radius must be positive and finite, got {radius}")
        for attr in ("project", "distance"):
            if not callable(getattr(core, attr, None)):
                raise TypeError(f"core must provide {attr}()")
        self.core = core
        self.radius = radius

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = self.core.distance(x)
        if d <= self.radius:
            return x.copy()
        p = self.core.project(x)
        if d >= 2.0 * self.radius:
            return p
        return x + (1.0 - d / self.radius) * (x - p)


class BlockIntrepidProjector:
    """Composition of intrepid projectors whose hyperplane cores touch
    pairwise disjoint coordinate sets.

    Disjointness makes the blocks commute, so the composite is order
    independent and acts like a single step onto the intersection of the
    fattened blocks.
    """

    kind = "intrepid"

    def __init__(self, blocks):
        blocks = tuple(blocks)
        seen: set[int] = set()
        for b in blocks:
            if not isinstance(b, IntrepidProjector):
                raise TypeError("blocks must be IntrepidProjector instances")
            core = b.core
            if not isinstance(core, Hyperplane):
                raise TypeError("block cores must be hyperplanes")
            sup = set(np.flatnonzero(core.normal).tolist())
            if seen & sup:
                raise ValueError("block supports overlap")
            seen |= sup
        self.blocks = blocks

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).copy()
        for b in self.blocks:
            x = b.apply(x)
        return x


class FamilySlabOperator:
    """Vectorized block step over a packed slab family.

    ``policy="intrepid"`` applies the three-regime rule slab by slab in
    inner-product coordinates; since supports are disjoint this equals
    the per-block composition but runs batched.  ``policy="project"``
    applies the relaxed nearest-point rule instead (relaxation 1 is the
    plain projection).  Slabs of zero width degenerate to their midline
    snap under either policy.
    """

    def __init__(self, family: SlabFamily, policy: str = "intrepid", relaxation: float = 1.0):
        if policy not in ("intrepid", "project"):
            raise ValueError(f"unknown policy {policy!r}")
        if not isinstance(family, SlabFamily):
            raise TypeError("family must be a SlabFamily")
        if not validate_disjoint_support(family):
            raise ValueError("family supports overlap")
        relaxation = float(relaxation)
        if policy == "intrepid":
            if relaxation != 1.0:
                raise ValueError("intrepid policy does not take a relaxation")
            if not np.all(np.isfinite(family._half)):
                raise ValueError("intrepid policy needs finite slab widths")
        else:
            if not 0.0 < relaxation < 2.0:
                raise ValueError(f"relaxation must lie in (0, 2), got {relaxation}")
        self.family = family
        self.policy = policy
        self.relaxation = relaxation

    @property
    def kind(self) -> str:
        return "intrepid" if self.policy == "intrepid" else "relaxed"

    def apply(self, x) -> np.ndarray:
        fam = self.family
        x = fam._check(x).copy()
        if fam.size == 0:
            return x
        v = (fam._coef * x[fam._idx]).sum(axis=1)
        r = v - fam._mid
        if self.policy == "intrepid":
            nr = kernels.intrepid_rel(r, fam._half, fam._inner)
        else:
            nr = kernels.nearest_rel(r, fam._half, fam._inner)
            if self.relaxation != 1.0:
                nr = r + self.relaxation * (nr - r)
        dv = (nr - r) * fam._inv_nsq
        for k in range(fam._idx.shape[1]):
            x[fam._idx[:, k]] += dv * fam._coef[:, k]
        return x


def decrease_certificate(q: IntrepidProjector, x, y, alpha: float, tol: float = 1e-9) -> float:
    """Slack of the guaranteed-decrease inequality of the intrepid step.

    For any y within ``alpha`` of the core (alpha <= radius), one
    application of q shrinks the squared distance to y by at least
    2 (radius - alpha) ||x - Qx||; the returned slack is that inequality's
    left side minus its right side and should never be materially
    negative.
    """
    alpha = float(alpha)
    if alpha < 0.0:
        raise ValueError("alpha must be nonnegative")
    if alpha > q.radius + tol:
        raise ValueError(f"alpha={alpha} exceeds the operator radius {q.radius}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dzy = q.core.distance(y)
    if dzy > alpha + tol:
        raise ValueError(f"y lies {dzy} from the core, beyond alpha={alpha}")
    qx = q.apply(x)
    lhs = float((x - y) @ (x - y)) - float((qx - y) @ (qx - y))
    return lhs - 2.0 * (q.radius - alpha) * float(np.linalg.norm(x - qx))
