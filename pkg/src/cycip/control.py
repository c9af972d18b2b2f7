"""Index selection for the sweep iteration.

A schedule decides which constraint set the iteration touches at step k.
Three variants: a fixed cyclic order, a fresh seeded permutation of the
index family per sweep, and an explicit finite buffer looped forever.
``next_index`` is a pure function of (schedule, k), so runs are
reproducible and can be resumed or chunked at any sweep boundary.

Randomness contract: the permutation for sweep b of a seeded schedule is
``numpy.random.Generator(PCG64(SeedSequence((seed, b)))).permutation``
of the index tuple.  PCG64 and SeedSequence are stable across platforms
and numpy releases, so the index stream is reproducible everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "ControlSchedule",
    "QuasiperiodCertificate",
    "ControlError",
    "validate_quasicyclic",
]


class ControlError(ValueError):
    """A schedule failed a coverage check."""


def _perm(seed: int, block: int, base: np.ndarray) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, block))))
    return rng.permutation(base)


@dataclass(frozen=True)
class ControlSchedule:
    """Immutable index selector; build via the class methods."""

    variant: str
    indices: tuple[int, ...]
    seed: int | None = None
    buffer: tuple[int, ...] | None = None

    @classmethod
    def cyclic(cls, order: Iterable[int]) -> "ControlSchedule":
        """Visit ``order`` verbatim, forever."""
        order = tuple(int(i) for i in order)
        if not order:
            raise ValueError("order must be nonempty")
        if len(set(order)) != len(order):
            raise ValueError("cyclic order must visit each index exactly once")
        return cls("cyclic", order)

    @classmethod
    def random_blocks(cls, indices: Iterable[int], seed: int) -> "ControlSchedule":
        """A fresh seeded permutation of ``indices`` for every sweep."""
        indices = tuple(int(i) for i in indices)
        if not indices:
            raise ValueError("indices must be nonempty")
        if len(set(indices)) != len(indices):
            raise ValueError("indices must be distinct")
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        return cls("random", indices, seed=seed)

    @classmethod
    def explicit(cls, buffer: Iterable[int], indices: Iterable[int] | None = None) -> "ControlSchedule":
        """Loop a finite buffer of indices forever.

        ``indices`` declares the full index family when it is wider than
        what the buffer visits (validators then treat unvisited indices
        as coverage failures, which is the point of declaring them).
        """
        buffer = tuple(int(i) for i in buffer)
        if not buffer:
            raise ValueError("buffer must be nonempty")
        family = tuple(sorted(set(buffer) if indices is None else {int(i) for i in indices}))
        if not set(buffer) <= set(family):
            raise ValueError("buffer visits indices outside the declared family")
        return cls("explicit", family, buffer=buffer)

    @property
    def size(self) -> int:
        return len(self.indices)

    def next_index(self, k: int) -> int:
        """Index visited at step k (pure in k)."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        m = self.size
        if self.variant == "cyclic":
            return self.indices[k % m]
        if self.variant == "random":
            base = np.asarray(self.indices, dtype=np.int64)
            return int(_perm(self.seed, k // m, base)[k % m])
        return self.buffer[k % len(self.buffer)]

    def order_block(self, first_sweep: int, count: int) -> np.ndarray:
        """Indices for ``count`` whole sweeps starting at sweep ``first_sweep``,
        shaped (count, size).  A sweep is ``size`` consecutive steps."""
        m = self.size
        if self.variant == "cyclic":
            return np.tile(np.asarray(self.indices, dtype=np.int64), (count, 1))
        if self.variant == "random":
            base = np.asarray(self.indices, dtype=np.int64)
            out = np.empty((count, m), dtype=np.int64)
            for t in range(count):
                out[t] = _perm(self.seed, first_sweep + t, base)
            return out
        buf = np.asarray(self.buffer, dtype=np.int64)
        start = first_sweep * m
        pos = (start + np.arange(count * m)) % buf.size
        return buf[pos].reshape(count, m)


@dataclass(frozen=True)
class QuasiperiodCertificate:
    """Witness that every window of ``quasiperiod`` consecutive steps in
    [0, horizon] covered the whole index family."""

    quasiperiod: int
    horizon: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.quasiperiod < len(self.indices):
            raise ValueError("quasiperiod shorter than the index family cannot cover it")


def validate_quasicyclic(schedule: ControlSchedule, M: int, horizon: int) -> QuasiperiodCertificate:
    """Certify that every length-M window of the schedule within
    [0, horizon] covers the full index family; raises ControlError naming
    the first offending window otherwise."""
    M = int(M)
    horizon = int(horizon)
    if M < 1:
        raise ValueError("M must be at least 1")
    if horizon < M:
        raise ValueError("horizon must be at least M")
    need = set(schedule.indices)
    m = schedule.size
    total = horizon + 1
    sweeps = -(-total // m)
    seq = schedule.order_block(0, sweeps).ravel()[:total]

    counts: dict[int, int] = {i: 0 for i in need}
    missing = len(need)
    for j in range(M):
        v = int(seq[j])
        if v in counts:
            if counts[v] == 0:
                missing -= 1
            counts[v] += 1
    if missing:
        absent = sorted(i for i in need if counts[i] == 0)
        raise ControlError(f"window at k=0 misses indices {absent}")
    for k in range(1, total - M + 1):
        out = int(seq[k - 1])
        if out in counts:
            counts[out] -= 1
            if counts[out] == 0:
                missing += 1
        new = int(seq[k + M - 1])
        if new in counts:
            if counts[new] == 0:
                missing -= 1
            counts[new] += 1
        if missing:
            absent = sorted(i for i in need if counts[i] == 0)
            raise ControlError(f"window at k={k} misses indices {absent}")
    return QuasiperiodCertificate(M, horizon, schedule.indices)
