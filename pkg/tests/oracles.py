"""Independent reference implementations used to check the package.

Everything in this file is computed from definitions, never by calling
the code under test: brute-force grid refinement for nearest points,
hand-written closed forms for hyperplanes, and a QP solve for slab
intersections.  Slow and simple on purpose.
"""

from __future__ import annotations

import itertools

import numpy as np


def refine_nearest_param(embed, x, p_center, p_radius, levels=45, pts=11):
    """Nearest point of a parametrized set {embed(u)} to x by multilevel
    grid zoom over parameter space: evaluate a grid, recenter on the best
    point, shrink, repeat.  Safe whenever the squared distance is
    strictly convex in the parameters near the optimum, which holds for
    all the parametrizations used below."""
    x = np.asarray(x, dtype=float)
    center = np.atleast_1d(np.array(p_center, dtype=float))
    radius = float(p_radius)
    best_u = center.copy()
    best_d = np.inf
    for _ in range(levels):
        axes = [np.linspace(c - radius, c + radius, pts) for c in center]
        for ut in itertools.product(*axes):
            u = np.array(ut)
            d = float(np.linalg.norm(embed(u) - x))
            if d < best_d:
                best_d = d
                best_u = u
        center = best_u.copy()
        radius *= 4.0 / (pts - 1)
    return embed(best_u)


def hyperplane_basis(a):
    """Orthonormal basis of the null space of a (row vector), via SVD."""
    a = np.asarray(a, dtype=float).reshape(1, -1)
    _, _, vt = np.linalg.svd(a, full_matrices=True)
    return vt[1:]


def hyperplane_point(a, b):
    """Some point on {z : <a, z> = b}."""
    a = np.asarray(a, dtype=float)
    return (b / float(a @ a)) * a


def hyperplane_project_ref(a, b, x):
    """Closed-form nearest point on a hyperplane, written from scratch."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    return x - ((float(a @ x) - b) / float(a @ a)) * a


def hyperplane_distance_ref(a, b, x):
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    return abs(float(a @ x) - b) / float(np.sqrt(a @ a))


def intrepid_reference(a, b, beta, x):
    """Three-regime step toward a hyperplane, evaluated independently:
    full projection when at least twice beta away, identity within beta,
    and the proportional overshoot x + (1 - d/beta)(x - Px) between."""
    x = np.asarray(x, dtype=float)
    d = hyperplane_distance_ref(a, b, x)
    p = hyperplane_project_ref(a, b, x)
    if d >= 2.0 * beta:
        return p
    if d <= beta:
        return x.copy()
    return x + (1.0 - d / beta) * (x - p)


def slab_nearest_ref(a, lo, hi, x):
    """Nearest point of {z : lo <= <a, z> <= hi} to x, brute force.

    If x satisfies the inequalities it is its own nearest point;
    otherwise the nearest point lies on one of the two boundary
    hyperplanes, each searched by parametrized grid zoom."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    v = float(a @ x)
    if lo <= v <= hi:
        return x.copy()
    basis = hyperplane_basis(a)
    scale = float(np.linalg.norm(x)) + abs(lo) + abs(hi) + 1.0
    candidates = []
    for b in (lo, hi):
        if not np.isfinite(b):
            continue
        origin = hyperplane_point(a, b)
        if basis.shape[0] == 0:
            candidates.append(origin)
            continue
        embed = lambda u, o=origin: o + u @ basis
        candidates.append(
            refine_nearest_param(embed, x, np.zeros(basis.shape[0]), 4.0 * scale)
        )
    return min(candidates, key=lambda p: float(np.linalg.norm(p - x)))


def affine_nearest_ref(indices, values, x):
    """Nearest point with prescribed coordinates, by parametrized grid
    zoom over the free coordinates."""
    x = np.asarray(x, dtype=float)
    indices = np.asarray(indices, dtype=int)
    values = np.asarray(values, dtype=float)
    free = np.array([i for i in range(x.size) if i not in set(indices.tolist())], dtype=int)
    base = np.zeros(x.size)
    base[indices] = values

    def embed(u):
        z = base.copy()
        z[free] = u
        return z

    if free.size == 0:
        return base
    scale = float(np.linalg.norm(x)) + float(np.abs(values).sum()) + 1.0
    return refine_nearest_param(embed, x, np.zeros(free.size), 4.0 * scale)


def hyperplane_nearest_param_ref(a, b, x):
    """Nearest point on a hyperplane by null-space grid zoom."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    basis = hyperplane_basis(a)
    origin = hyperplane_point(a, b)
    if basis.shape[0] == 0:
        return origin
    scale = float(np.linalg.norm(x)) + abs(b) + 1.0
    return refine_nearest_param(
        lambda u: origin + u @ basis, x, np.zeros(basis.shape[0]), 4.0 * scale
    )


def disc_nearest_ref(center, beta, x):
    """Nearest point of the 2-d disc {|z - center| <= beta} to x: x when
    inside, else an angle-parametrized zoom over the circle."""
    center = np.asarray(center, dtype=float)
    x = np.asarray(x, dtype=float)
    if float(np.linalg.norm(x - center)) <= beta:
        return x.copy()
    embed = lambda th: center + beta * np.array([np.cos(th[0]), np.sin(th[0])])
    return refine_nearest_param(embed, x, np.array([0.0]), np.pi)


def minslope_nearest_ref(sigma_min, sigma, s):
    """Nearest value in [-sigma, -sigma_min] u [sigma_min, sigma] by
    dense enumeration; ties resolve to the positive band (listed first)."""
    grid = np.concatenate(
        [np.linspace(sigma_min, sigma, 2_000_001), np.linspace(-sigma, -sigma_min, 2_000_001)]
    )
    return float(grid[int(np.argmin(np.abs(grid - s)))])


def minslope_candidates_ref(sigma_min, sigma, s):
    """Exact nearest value in the two-band union via candidate points:
    the clamp of s into each band; ties go positive."""
    pos = min(max(s, sigma_min), sigma)
    neg = min(max(s, -sigma), -sigma_min)
    return pos if abs(pos - s) <= abs(neg - s) else neg


def qp_project_slabs(normals, lowers, uppers, x):
    """Projection onto an intersection of slabs by solving the QP
    min ||z - x||^2 s.t. lo_i <= <a_i, z> <= hi_i with cvxpy."""
    import cvxpy as cp

    x = np.asarray(x, dtype=float)
    z = cp.Variable(x.size)
    cons = []
    for a, lo, hi in zip(normals, lowers, uppers):
        a = np.asarray(a, dtype=float)
        if np.isfinite(lo):
            cons.append(a @ z >= lo)
        if np.isfinite(hi):
            cons.append(a @ z <= hi)
    prob = cp.Problem(cp.Minimize(cp.sum_squares(z - x)), cons)
    prob.solve(solver=cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"QP solve failed: {prob.status}")
    return np.asarray(z.value, dtype=float).reshape(-1)
