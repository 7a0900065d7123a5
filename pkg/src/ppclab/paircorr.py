"""Pair correlation statistic ``F_N^beta(s)`` on the torus.

Ordered pairs ``k != l`` with ``||x_k - x_l||_inf <= s / N**beta`` are counted
exactly and normalised by ``N**(2 - d*beta)``, the expected count of an
i.i.d. uniform sample divided by ``(2s)^d``. At ``beta = 1/d`` this is the
classical ``count / N``. Three counters return identical integer counts:

* ``naive``: blocked O(N^2) evaluation of every pair.
* cell list (``grid`` for d >= 2): points bucketed into ``M`` cells per axis
  with ``1/M`` just above the largest threshold; only the ``3**d``
  neighbouring cells (with wrap-around) are examined.
* sorted sweep (``grid`` for d = 1): window counts from binary search on the
  sorted sample; pairs whose distance lies within ``1e-9`` of a threshold are
  re-evaluated with the same distance function the naive counter uses.

Thresholds ``>= 1/2`` saturate at ``N*(N-1)``; thresholds in ``(1/3, 1/2)`` are
handled by the naive counter because neighbouring cells would alias.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .geometry import TorusPointSet, UsageError, pair_dist_sup

__all__ = [
    "PairCorrQuery",
    "PairCorrEntry",
    "PairCorrResult",
    "pair_corr",
    "pair_corr_naive",
    "count_pairs",
]

log = logging.getLogger(__name__)

METHODS = ("naive", "grid", "auto")
_AUTO_NAIVE_MAX_N = 256
_BLOCK_ELEMS = 1 << 22
_TIE_MARGIN = 1e-9


@dataclass(frozen=True)
class PairCorrQuery:
    beta: float
    s_values: tuple[float, ...]
    method: str = "auto"

    def __post_init__(self):
        s = tuple(float(v) for v in np.atleast_1d(self.s_values))
        object.__setattr__(self, "s_values", s)
        if not s:
            raise UsageError("at least one s value is required")
        if any(not (v > 0) or not math.isfinite(v) for v in s):
            raise UsageError("all s values must be positive and finite")
        if list(s) != sorted(s):
            raise UsageError("s values must be sorted ascending")
        if not (self.beta >= 0) or not math.isfinite(self.beta):
            raise UsageError(f"beta must be >= 0, got {self.beta}")
        if self.method not in METHODS:
            raise UsageError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class PairCorrEntry:
    s: float
    threshold: float
    count: int
    F: float
    target: float

    @property
    def abs_err(self) -> float:
        return abs(self.F - self.target)


@dataclass(frozen=True)
class PairCorrResult:
    N: int
    d: int
    beta: float
    entries: tuple[PairCorrEntry, ...]

    @property
    def F(self) -> np.ndarray:
        return np.array([e.F for e in self.entries])

    @property
    def counts(self) -> np.ndarray:
        return np.array([e.count for e in self.entries], dtype=np.int64)

    def rows(self):
        """Rows matching the CSV columns ``N,d,beta,s,threshold,count,F,target,abs_err``."""
        for e in self.entries:
            yield (self.N, self.d, self.beta, e.s, e.threshold, e.count, e.F, e.target, e.abs_err)


CSV_COLUMNS = ("N", "d", "beta", "s", "threshold", "count", "F", "target", "abs_err")


def _count_naive(x: np.ndarray, thr: np.ndarray) -> np.ndarray:
    N = x.shape[0]
    counts = np.zeros(len(thr), dtype=np.int64)
    block = max(1, _BLOCK_ELEMS // max(N * x.shape[1], 1))
    for i0 in range(0, N, block):
        i1 = min(N, i0 + block)
        dist = pair_dist_sup(x[i0:i1, None, :], x[None, :, :])
        rows = np.arange(i0, i1)
        dist[rows - i0, rows] = np.inf
        for k, t in enumerate(thr):
            counts[k] += np.count_nonzero(dist <= t)
    return counts


def _expand_ranges(lo: np.ndarray, hi: np.ndarray):
    """Flatten the index ranges ``[lo_i, hi_i)``: returns (owner i, index) pairs."""
    reps = hi - lo
    total = int(reps.sum())
    owner = np.repeat(np.arange(len(lo)), reps)
    start = np.cumsum(reps) - reps
    idx = np.arange(total, dtype=np.int64) - np.repeat(start, reps) + np.repeat(lo, reps)
    return owner, idx


def _count_sweep_1d(x: np.ndarray, thr: np.ndarray) -> np.ndarray:
    xs = np.sort(x[:, 0])
    N = xs.size
    y = np.concatenate([xs - 1.0, xs, xs + 1.0])
    m = _TIE_MARGIN
    counts = np.zeros(len(thr), dtype=np.int64)
    for k, t in enumerate(thr):
        out_lo = np.searchsorted(y, xs - (t + m), side="left")
        out_hi = np.searchsorted(y, xs + (t + m), side="right")
        if t > m:
            in_lo = np.searchsorted(y, xs - (t - m), side="left")
            in_hi = np.searchsorted(y, xs + (t - m), side="right")
            # self always sits inside the inner window
            inner = int((in_hi - in_lo).sum()) - N
        else:
            in_lo = in_hi = out_hi
            inner = 0
        band = 0
        for lo, hi in ((out_lo, in_lo), (in_hi, out_hi)):
            owner, idx = _expand_ranges(lo, hi)
            j = idx % N
            keep = j != owner
            owner, j = owner[keep], j[keep]
            if owner.size:
                band += int(np.count_nonzero(pair_dist_sup(xs[owner], xs[j]) <= t))
        counts[k] = inner + band
    return counts


def _cells_per_axis(tmax: float, N: int, d: int) -> int:
    M = math.floor(1.0 / (tmax * (1.0 + _TIE_MARGIN)))
    # coarser cells stay correct; cap the table size
    cap = max(27, 4 * N)
    M = min(M, max(3, math.floor(cap ** (1.0 / d))))
    return M


def _count_cells(x: np.ndarray, thr: np.ndarray) -> np.ndarray:
    N, d = x.shape
    M = _cells_per_axis(float(thr[-1]), N, d)
    if M < 3:
        return _count_naive(x, thr)
    cell = np.minimum(np.floor(x * M).astype(np.int64), M - 1)
    weights = M ** np.arange(d, dtype=np.int64)
    lin = cell @ weights
    order = np.argsort(lin, kind="stable")
    xs, cell, lin = x[order], cell[order], lin[order]
    occupancy = np.bincount(lin, minlength=M**d)
    start = np.cumsum(occupancy) - occupancy

    counts = np.zeros(len(thr), dtype=np.int64)
    est = max(1, int(occupancy.max()))
    block = max(1, _BLOCK_ELEMS // (est * max(d, 1)))
    for offset in product((-1, 0, 1), repeat=d):
        nb = ((cell + np.array(offset, dtype=np.int64)) % M) @ weights
        lo_all, hi_all = start[nb], start[nb] + occupancy[nb]
        same = not any(offset)
        for i0 in range(0, N, block):
            i1 = min(N, i0 + block)
            owner, j = _expand_ranges(lo_all[i0:i1], hi_all[i0:i1])
            owner += i0
            if same:
                keep = j != owner
                owner, j = owner[keep], j[keep]
            if not owner.size:
                continue
            dist = pair_dist_sup(xs[owner], xs[j])
            for k, t in enumerate(thr):
                counts[k] += np.count_nonzero(dist <= t)
    return counts


def count_pairs(x: np.ndarray, thresholds, method: str = "grid") -> np.ndarray:
    """Ordered pair counts ``#{k != l : dist(x_k, x_l) <= t}`` for each threshold ``t``.

    ``method`` is ``naive``, ``grid`` or ``cells`` (cell list forced, any d).
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    N, d = x.shape
    thr = np.asarray(thresholds, dtype=np.float64)
    counts = np.zeros(thr.size, dtype=np.int64)
    if N < 2 or thr.size == 0:
        return counts
    sat = thr >= 0.5
    counts[sat] = N * (N - 1)
    if method == "naive":
        rest = ~sat
        if rest.any():
            counts[rest] = _count_naive(x, thr[rest])
        return counts
    mid = (~sat) & (thr > 1.0 / 3.0)
    if mid.any():
        counts[mid] = _count_naive(x, thr[mid])
    small = thr <= 1.0 / 3.0
    if small.any():
        if method == "grid" and d == 1:
            counts[small] = _count_sweep_1d(x, thr[small])
        elif method in ("grid", "cells"):
            counts[small] = _count_cells(x, thr[small])
        else:
            raise UsageError(f"unknown counting method {method!r}")
    return counts


def _result(points: TorusPointSet, q: PairCorrQuery, counts) -> PairCorrResult:
    N, d = len(points), points.dim
    norm = float(N) ** (2.0 - d * q.beta)
    scale = float(N) ** q.beta
    entries = tuple(
        PairCorrEntry(s, s / scale, int(c), int(c) / norm, (2.0 * s) ** d)
        for s, c in zip(q.s_values, counts)
    )
    return PairCorrResult(N, d, q.beta, entries)


def _check(points: TorusPointSet, q: PairCorrQuery):
    if len(points) < 2:
        raise UsageError("pair correlation needs N >= 2 (n)")
    if q.beta > 1.0 / points.dim + 1e-12:
        raise UsageError(f"beta must lie in [0, 1/d] = [0, {1.0 / points.dim:.6g}], got {q.beta}")


def pair_corr(points: TorusPointSet, q: PairCorrQuery) -> PairCorrResult:
    """``F = count / N**(2 - d*beta)`` at threshold ``s / N**beta`` for every ``s`` in one pass."""
    _check(points, q)
    method = q.method
    if method == "auto":
        method = "naive" if len(points) <= _AUTO_NAIVE_MAX_N else "grid"
    scale = float(len(points)) ** q.beta
    thr = np.array([s / scale for s in q.s_values])
    return _result(points, q, count_pairs(points.coords, thr, method))


def pair_corr_naive(points: TorusPointSet, q: PairCorrQuery) -> PairCorrResult:
    _check(points, q)
    scale = float(len(points)) ** q.beta
    thr = np.array([s / scale for s in q.s_values])
    return _result(points, q, count_pairs(points.coords, thr, "naive"))
