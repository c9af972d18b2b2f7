"""Numeric backends for packed constraint sweeps.

The cyclic sweep over a compiled road problem is the hot loop of the
package.  Two interchangeable backends implement it:

* ``numba``: the loop kernels below compiled with ``@njit`` (default
  whenever numba imports cleanly),
* ``numpy``: a vectorized fallback that batches each constraint family
  with fancy indexing.

Selection is environmental, not part of the solver configuration: set
``CYCIP_BACKEND=numpy`` to force the fallback, ``CYCIP_BACKEND=numba``
to require the compiled path (raises if numba is unusable), or leave it
on ``auto``.  Individual calls may override with ``backend=...``, which
is what ``benchmarks/backend_bench.py`` uses to compare the two.

Traces and iterates are deterministic for a fixed backend; across
backends the iterates agree to the last bit while reduced metrics may
differ by rounding in the final ulp.
"""

from __future__ import annotations

import os
import time
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

POLICY_PROJECT = 0
POLICY_INTREPID = 1

SOLVED = "solved"
ITERATION_LIMIT = "iteration-limit"
TIME_LIMIT = "time-limit"

#: number of constraint sets in a packed road problem
OP_COUNT = 6

_CHUNK_MIN = 16
_CHUNK_MAX = 65536
_CHUNK_TARGET_SECONDS = 0.05


# ---------------------------------------------------------------------------
# scalar rules in inner-product coordinates
#
# A slab constrains the inner product v = <a, x> to [mid - half, mid + half].
# All maps below act on r = v - mid.  ``win > 0`` switches to the two-band
# variant where the feasible relative values are [-half, -win] u [win, half];
# ties at r = 0 resolve to the nonnegative band.
# ---------------------------------------------------------------------------


def _nearest_core(r, w):
    if r < -w:
        return -w
    if r > w:
        return w
    return r


def _intrepid_core(r, w):
    ar = abs(r)
    if ar <= w:
        return r
    if ar >= 2.0 * w:
        return 0.0
    return r * (2.0 - ar / w)


def _nearest_rel_scalar(r, w, win):
    # magnitude clamp keeps the band edges exact (win and w themselves)
    if win > 0.0:
        s = 1.0 if r >= 0.0 else -1.0
        a = abs(r)
        if a < win:
            return s * win
        if a > w:
            return s * w
        return r
    return _nearest_core(r, w)


def _intrepid_rel_scalar(r, w, win):
    if win > 0.0:
        s = 1.0 if r >= 0.0 else -1.0
        bm = s * 0.5 * (win + w)
        bw = 0.5 * (w - win)
        return bm + _intrepid_core(r - bm, bw)
    return _intrepid_core(r, w)


# ---------------------------------------------------------------------------
# vectorized rules (shared by the geometry layer and the numpy backend)
# ---------------------------------------------------------------------------


def nearest_rel(r, half, inner):
    """Vectorized nearest feasible relative value, one slab per entry."""
    r = np.asarray(r, dtype=float)
    out = np.clip(r, -half, half)
    if np.any(inner > 0.0):
        s = np.where(r >= 0.0, 1.0, -1.0)
        a = np.abs(r)
        banded = np.where(a < inner, s * inner, np.where(a > half, s * half, r))
        out = np.where(inner > 0.0, banded, out)
    return out


def intrepid_rel(r, half, inner):
    """Vectorized three-regime relative step, one slab per entry.

    Within the slab the value is kept; far outside (beyond twice the
    half-width) it snaps to the midline; in between it reflects part of
    the way through, landing strictly inside.
    """
    r = np.asarray(r, dtype=float)
    if np.any(inner > 0.0):
        s = np.where(r >= 0.0, 1.0, -1.0)
        bm = np.where(inner > 0.0, s * 0.5 * (inner + half), 0.0)
        bw = np.where(inner > 0.0, 0.5 * (half - inner), half)
    else:
        bm = np.zeros_like(r)
        bw = np.broadcast_to(half, r.shape)
    rb = r - bm
    ar = np.abs(rb)
    with np.errstate(divide="ignore", invalid="ignore"):
        refl = rb * (2.0 - ar / bw)
    core = np.where(ar <= bw, rb, np.where(ar >= 2.0 * bw, 0.0, refl))
    return bm + core


# ---------------------------------------------------------------------------
# packed problem data
# ---------------------------------------------------------------------------


@dataclass
class RoadPack:
    """Columnar form of a compiled road problem.

    Set 0 pins coordinates ``interp_idx`` to ``interp_val``.  Sets 1..5
    are slab families stored as concatenated rows: family ``f`` owns rows
    ``fam_ptr[f]:fam_ptr[f+1]`` and touches ``fam_width[f]`` coordinates
    per row.  Trailing columns of a row carry coefficient zero and repeat
    a valid index, and the loops never read them.
    """

    n: int
    interp_idx: np.ndarray
    interp_val: np.ndarray
    slab_idx: np.ndarray
    slab_coef: np.ndarray
    slab_mid: np.ndarray
    slab_half: np.ndarray
    slab_inner: np.ndarray
    slab_invnsq: np.ndarray
    slab_maxc: np.ndarray
    fam_ptr: np.ndarray
    fam_width: np.ndarray

    def __post_init__(self):
        # writable contiguous arrays keep numba to one type specialization
        def own(a, dtype):
            a = np.ascontiguousarray(a, dtype=dtype)
            return a if a.flags.writeable else a.copy()

        self.interp_idx = own(self.interp_idx, np.int64)
        self.interp_val = own(self.interp_val, float)
        self.slab_idx = own(self.slab_idx, np.int64)
        self.slab_coef = own(self.slab_coef, float)
        for name in ("slab_mid", "slab_half", "slab_inner", "slab_invnsq", "slab_maxc"):
            setattr(self, name, own(getattr(self, name), float))
        self.fam_ptr = own(self.fam_ptr, np.int64)
        self.fam_width = own(self.fam_width, np.int64)
        if self.fam_ptr.size != OP_COUNT or self.fam_width.size != OP_COUNT - 1:
            raise ValueError("family tables must describe exactly five slab families")

    def metrics(self, x, backend: str | None = None) -> tuple[float, float]:
        """(aggregate Euclidean infeasibility, worst max-norm residual)."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"x has shape {x.shape}, expected ({self.n},)")
        if resolve_backend(backend) == "numba":
            _ensure_numba()
            return (
                float(_j_metric_d2(x, *self._fields())),
                float(_j_metric_dinf(x, *self._fields())),
            )
        return _np_metric_d2(x, self), _np_metric_dinf(x, self)

    def _fields(self):
        return (
            self.interp_idx,
            self.interp_val,
            self.slab_idx,
            self.slab_coef,
            self.slab_mid,
            self.slab_half,
            self.slab_inner,
            self.slab_invnsq,
            self.slab_maxc,
            self.fam_ptr,
            self.fam_width,
        )


class PackedRun(NamedTuple):
    x: np.ndarray
    status: str
    steps: int
    wall: float
    d2: float
    dinf: float
    trace_rows: np.ndarray | None


# ---------------------------------------------------------------------------
# loop kernels (compiled with numba when the backend is active)
# ---------------------------------------------------------------------------


def _apply_interp(x, jidx, jval):
    step_sq = 0.0
    for i in range(jidx.size):
        d = x[jidx[i]] - jval[i]
        step_sq += d * d
        x[jidx[i]] = jval[i]
    return step_sq


def _apply_family_range(x, idx, coef, mid, half, inner, invnsq, lo, hi, width, policy):
    step_sq = 0.0
    for s in range(lo, hi):
        v = 0.0
        for k in range(width):
            v += coef[s, k] * x[idx[s, k]]
        r = v - mid[s]
        if policy == 1:
            nr = _intrepid_rel_scalar(r, half[s], inner[s])
        else:
            nr = _nearest_rel_scalar(r, half[s], inner[s])
        dv = (nr - r) * invnsq[s]
        for k in range(width):
            x[idx[s, k]] += dv * coef[s, k]
        step_sq += dv * dv / invnsq[s]
    return step_sq


def _family_dist_sq_range(x, idx, coef, mid, half, inner, invnsq, lo, hi, width):
    tot = 0.0
    for s in range(lo, hi):
        v = 0.0
        for k in range(width):
            v += coef[s, k] * x[idx[s, k]]
        r = v - mid[s]
        e = r - _nearest_rel_scalar(r, half[s], inner[s])
        tot += e * e * invnsq[s]
    return tot


def _family_res_inf_range(x, idx, coef, mid, half, inner, invnsq, maxc, lo, hi, width):
    worst = 0.0
    for s in range(lo, hi):
        v = 0.0
        for k in range(width):
            v += coef[s, k] * x[idx[s, k]]
        r = v - mid[s]
        e = abs(_nearest_rel_scalar(r, half[s], inner[s]) - r) * invnsq[s] * maxc[s]
        if e > worst:
            worst = e
    return worst


def _metric_d2(x, jidx, jval, sidx, scoef, smid, shalf, sinner, sinvnsq, smaxc, fptr, fwd):
    tot = 0.0
    for i in range(jidx.size):
        d = x[jidx[i]] - jval[i]
        tot += d * d
    for f in range(5):
        tot += _family_dist_sq_range(
            x, sidx, scoef, smid, shalf, sinner, sinvnsq, fptr[f], fptr[f + 1], fwd[f]
        )
    return np.sqrt(tot)


def _metric_dinf(x, jidx, jval, sidx, scoef, smid, shalf, sinner, sinvnsq, smaxc, fptr, fwd):
    worst = 0.0
    for i in range(jidx.size):
        d = abs(x[jidx[i]] - jval[i])
        if d > worst:
            worst = d
    for f in range(5):
        e = _family_res_inf_range(
            x, sidx, scoef, smid, shalf, sinner, sinvnsq, smaxc, fptr[f], fptr[f + 1], fwd[f]
        )
        if e > worst:
            worst = e
    return worst


def _run_chunk(
    x,
    jidx,
    jval,
    sidx,
    scoef,
    smid,
    shalf,
    sinner,
    sinvnsq,
    smaxc,
    fptr,
    fwd,
    orders,
    policy,
    use_d2,
    eps,
    trace,
    want_trace,
    k_base,
):
    nsw = orders.shape[0]
    mops = orders.shape[1]
    for t in range(nsw):
        last_sq = 0.0
        last_op = 0
        for pos in range(mops):
            op = orders[t, pos]
            last_op = op
            if op == 0:
                last_sq = _apply_interp(x, jidx, jval)
            else:
                f = op - 1
                last_sq = _apply_family_range(
                    x, sidx, scoef, smid, shalf, sinner, sinvnsq,
                    fptr[f], fptr[f + 1], fwd[f], policy,
                )
        d2v = -1.0
        dinfv = -1.0
        if want_trace or use_d2:
            d2v = _metric_d2(
                x, jidx, jval, sidx, scoef, smid, shalf, sinner, sinvnsq, smaxc, fptr, fwd
            )
        if want_trace or not use_d2:
            dinfv = _metric_dinf(
                x, jidx, jval, sidx, scoef, smid, shalf, sinner, sinvnsq, smaxc, fptr, fwd
            )
        if want_trace:
            trace[t, 0] = k_base + (t + 1) * mops
            trace[t, 1] = last_op
            trace[t, 2] = np.sqrt(last_sq)
            trace[t, 3] = d2v
            trace[t, 4] = dinfv
        mv = d2v if use_d2 else dinfv
        if mv < eps:
            return t + 1, True
    return nsw, False


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------


def _np_family_views(pack: RoadPack):
    views = getattr(pack, "_np_fams", None)
    if views is None:
        views = []
        for f in range(5):
            lo, hi = int(pack.fam_ptr[f]), int(pack.fam_ptr[f + 1])
            w = int(pack.fam_width[f])
            views.append(
                (
                    pack.slab_idx[lo:hi, :w],
                    pack.slab_coef[lo:hi, :w],
                    pack.slab_mid[lo:hi],
                    pack.slab_half[lo:hi],
                    pack.slab_inner[lo:hi],
                    pack.slab_invnsq[lo:hi],
                    pack.slab_maxc[lo:hi],
                )
            )
        pack._np_fams = views
    return views


def _np_apply_interp(x, pack):
    d = x[pack.interp_idx] - pack.interp_val
    x[pack.interp_idx] = pack.interp_val
    return float(d @ d)


def _np_apply_family(x, pack, f, policy):
    idx, coef, mid, half, inner, invnsq, _ = _np_family_views(pack)[f]
    if idx.shape[0] == 0:
        return 0.0
    # sum over trailing axis matches the scalar loop's add order bit for
    # bit; einsum does not
    v = (coef * x[idx]).sum(axis=1)
    r = v - mid
    nr = intrepid_rel(r, half, inner) if policy == POLICY_INTREPID else nearest_rel(r, half, inner)
    dv = (nr - r) * invnsq
    for k in range(idx.shape[1]):
        x[idx[:, k]] += dv * coef[:, k]
    return float(np.sum(dv * dv / invnsq))


def _np_metric_d2(x, pack):
    d = x[pack.interp_idx] - pack.interp_val
    tot = float(d @ d)
    for idx, coef, mid, half, inner, invnsq, _ in _np_family_views(pack):
        if idx.shape[0] == 0:
            continue
        v = (coef * x[idx]).sum(axis=1)
        r = v - mid
        e = r - nearest_rel(r, half, inner)
        tot += float(np.sum(e * e * invnsq))
    return float(np.sqrt(tot))


def _np_metric_dinf(x, pack):
    worst = float(np.max(np.abs(x[pack.interp_idx] - pack.interp_val), initial=0.0))
    for idx, coef, mid, half, inner, invnsq, maxc in _np_family_views(pack):
        if idx.shape[0] == 0:
            continue
        v = (coef * x[idx]).sum(axis=1)
        r = v - mid
        e = np.abs(nearest_rel(r, half, inner) - r) * invnsq * maxc
        worst = max(worst, float(np.max(e, initial=0.0)))
    return worst


def _np_run_chunk(x, pack, orders, policy, use_d2, eps, trace, want_trace, k_base):
    nsw, mops = orders.shape
    for t in range(nsw):
        last_sq = 0.0
        last_op = 0
        for pos in range(mops):
            op = int(orders[t, pos])
            last_op = op
            if op == 0:
                last_sq = _np_apply_interp(x, pack)
            else:
                last_sq = _np_apply_family(x, pack, op - 1, policy)
        d2v = _np_metric_d2(x, pack) if (want_trace or use_d2) else -1.0
        dinfv = _np_metric_dinf(x, pack) if (want_trace or not use_d2) else -1.0
        if want_trace:
            trace[t, 0] = k_base + (t + 1) * mops
            trace[t, 1] = last_op
            trace[t, 2] = np.sqrt(last_sq)
            trace[t, 3] = d2v
            trace[t, 4] = dinfv
        mv = d2v if use_d2 else dinfv
        if mv < eps:
            return t + 1, True
    return nsw, False


# ---------------------------------------------------------------------------
# backend selection
# ---------------------------------------------------------------------------

_env = os.environ.get("CYCIP_BACKEND", "auto").strip().lower() or "auto"
if _env not in ("auto", "numba", "numpy"):
    warnings.warn(f"CYCIP_BACKEND={_env!r} not recognized, using auto", stacklevel=1)
    _env = "auto"

_numba_state: bool | None = None if _env != "numpy" else False

_j_run_chunk = None
_j_metric_d2 = None
_j_metric_dinf = None


def _ensure_numba() -> bool:
    """Compile the loop kernels once; False when numba is unusable."""
    global _numba_state, _nearest_core, _intrepid_core
    global _nearest_rel_scalar, _intrepid_rel_scalar
    global _apply_interp, _apply_family_range
    global _family_dist_sq_range, _family_res_inf_range
    global _metric_d2, _metric_dinf
    global _j_run_chunk, _j_metric_d2, _j_metric_dinf
    if _numba_state is not None:
        return _numba_state
    try:
        from numba import njit
    except Exception:
        _numba_state = False
        return False
    try:
        jit = lambda f: njit(cache=True, nogil=True)(f)
        _nearest_core = jit(_nearest_core)
        _intrepid_core = jit(_intrepid_core)
        _nearest_rel_scalar = jit(_nearest_rel_scalar)
        _intrepid_rel_scalar = jit(_intrepid_rel_scalar)
        _apply_interp = jit(_apply_interp)
        _apply_family_range = jit(_apply_family_range)
        _family_dist_sq_range = jit(_family_dist_sq_range)
        _family_res_inf_range = jit(_family_res_inf_range)
        _metric_d2 = jit(_metric_d2)
        _metric_dinf = jit(_metric_dinf)
        _j_metric_d2 = _metric_d2
        _j_metric_dinf = _metric_dinf
        _j_run_chunk = jit(_run_chunk)
    except Exception as exc:  # pragma: no cover - depends on toolchain health
        warnings.warn(f"numba backend unavailable ({exc}); falling back to numpy")
        _numba_state = False
        return False
    _numba_state = True
    return True


def resolve_backend(name: str | None = None) -> str:
    """Map a requested backend (or None for the environment default) to
    the backend that will actually run."""
    req = (name or _env).strip().lower()
    if req == "numpy":
        return "numpy"
    if req == "numba":
        if not _ensure_numba():
            raise RuntimeError("numba backend requested but unusable")
        return "numba"
    if req == "auto":
        return "numba" if _ensure_numba() else "numpy"
    raise ValueError(f"unknown backend {name!r}")


def active_backend() -> str:
    """Backend the environment default resolves to."""
    return resolve_backend(None)


def warmup(backend: str | None = None) -> str:
    """Force kernel compilation so later timings exclude it."""
    b = resolve_backend(backend)
    pack = RoadPack(
        n=3,
        interp_idx=np.array([0]),
        interp_val=np.array([0.0]),
        slab_idx=np.array([[0, 1, 0], [0, 1, 2]], dtype=np.int64),
        slab_coef=np.array([[-1.0, 1.0, 0.0], [0.5, -1.0, 0.5]]),
        slab_mid=np.zeros(2),
        slab_half=np.array([1.0, 1.0]),
        slab_inner=np.zeros(2),
        slab_invnsq=np.array([0.5, 1.0 / 1.5]),
        slab_maxc=np.array([1.0, 1.0]),
        fam_ptr=np.array([0, 1, 1, 2, 2, 2], dtype=np.int64),
        fam_width=np.array([2, 2, 3, 3, 3], dtype=np.int64),
    )

    class _Cyc:
        def order_block(self, first, count):
            return np.tile(np.arange(OP_COUNT, dtype=np.int64), (count, 1))

    for policy in (POLICY_INTREPID, POLICY_PROJECT):
        solve_packed(
            pack,
            np.array([5.0, -3.0, 2.0]),
            policy=policy,
            metric="dinf",
            eps=1e-9,
            max_iters=120,
            max_time=10.0,
            schedule=_Cyc(),
            want_trace=True,
            backend=b,
        )
    return b


# ---------------------------------------------------------------------------
# sweep driver
# ---------------------------------------------------------------------------


def solve_packed(
    pack: RoadPack,
    x0,
    *,
    policy: int,
    metric: str,
    eps: float,
    max_iters: int,
    max_time: float,
    schedule,
    want_trace: bool,
    backend: str | None = None,
) -> PackedRun:
    """Run cyclic sweeps over a packed problem until the chosen metric
    drops below ``eps`` or a budget runs out.

    The metric is evaluated once per sweep, including before the first
    step, so a feasible start returns immediately with zero steps.  The
    iteration budget counts individual operator applications and is spent
    in whole sweeps.
    """
    b = resolve_backend(backend)
    use_d2 = metric == "d2"
    x = np.array(x0, dtype=float)
    if x.shape != (pack.n,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({pack.n},)")
    t0 = time.perf_counter()
    if b == "numba":
        _ensure_numba()

    d2v, dinfv = pack.metrics(x, backend=b)
    if (d2v if use_d2 else dinfv) < eps:
        rows0 = np.empty((0, 5)) if want_trace else None
        return PackedRun(x, SOLVED, 0, time.perf_counter() - t0, d2v, dinfv, rows0)

    budget = max_iters // OP_COUNT
    sweeps = 0
    chunk = _CHUNK_MIN
    rows: list[np.ndarray] = []
    status = ITERATION_LIMIT
    empty_trace = np.empty((0, 5))
    while sweeps < budget:
        if time.perf_counter() - t0 >= max_time:
            status = TIME_LIMIT
            break
        take = min(chunk, budget - sweeps)
        orders = np.ascontiguousarray(schedule.order_block(sweeps, take), dtype=np.int64)
        trace_buf = np.empty((take, 5)) if want_trace else empty_trace
        t_chunk = time.perf_counter()
        if b == "numba":
            done, solved = _j_run_chunk(
                x, *pack._fields(), orders, policy, use_d2, eps,
                trace_buf, want_trace, sweeps * OP_COUNT,
            )
        else:
            done, solved = _np_run_chunk(
                x, pack, orders, policy, use_d2, eps,
                trace_buf, want_trace, sweeps * OP_COUNT,
            )
        dt = time.perf_counter() - t_chunk
        sweeps += int(done)
        if want_trace and done:
            rows.append(trace_buf[:done].copy())
        if solved:
            status = SOLVED
            break
        if dt < 0.5 * _CHUNK_TARGET_SECONDS:
            chunk = min(chunk * 2, _CHUNK_MAX)
        elif dt > 2.0 * _CHUNK_TARGET_SECONDS:
            chunk = max(_CHUNK_MIN, chunk // 2)

    wall = time.perf_counter() - t0
    d2v, dinfv = pack.metrics(x, backend=b)
    trace_rows = np.vstack(rows) if rows else (np.empty((0, 5)) if want_trace else None)
    return PackedRun(x, status, sweeps * OP_COUNT, wall, d2v, dinfv, trace_rows)
