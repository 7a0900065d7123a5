"""Discrepancy of point sets: exact 1-d formulas, a box-enumeration oracle and the Koksma-Erdos-Turan monitor."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .geometry import TorusPointSet, UsageError
from .sequences import SequenceSpec, generate, prefix, spec_dim

__all__ = [
    "DiscrepancyResult",
    "star_disc_1d",
    "extreme_disc_1d",
    "brute_disc",
    "ket_bound",
    "default_ket_constant",
    "low_disc_scaling",
    "BRUTE_MAX_N",
]

MODES = ("exact1d_star", "exact1d_extreme", "brute", "brute_star", "ket_bound")
BRUTE_MAX_N = 500
# unanchored boxes in d=2 cost O(N^4)
BRUTE_MAX_N_EXTREME_2D = 100

CSV_COLUMNS = ("N", "d", "mode", "value", "m", "C_d")


@dataclass(frozen=True)
class DiscrepancyResult:
    N: int
    d: int
    mode: str
    value: float
    m: Optional[int] = None
    C_d: Optional[float] = None

    def row(self):
        return (self.N, self.d, self.mode, self.value, self.m, self.C_d)


def _sorted_1d(points: TorusPointSet) -> np.ndarray:
    if points.dim != 1:
        raise UsageError(f"exact formula needs d = 1, got d = {points.dim}")
    if len(points) < 1:
        raise UsageError("need at least one point")
    return np.sort(points.coords[:, 0])


def star_disc_1d(points: TorusPointSet) -> DiscrepancyResult:
    x = _sorted_1d(points)
    N = x.size
    i = np.arange(1, N + 1)
    value = 1.0 / (2 * N) + float(np.max(np.abs(x - (2 * i - 1) / (2.0 * N))))
    return DiscrepancyResult(N, 1, "exact1d_star", value)


def extreme_disc_1d(points: TorusPointSet) -> DiscrepancyResult:
    x = _sorted_1d(points)
    N = x.size
    g = np.arange(1, N + 1) / N - x
    value = 1.0 / N + float(g.max() - g.min())
    return DiscrepancyResult(N, 1, "exact1d_extreme", value)


def _axis_intervals(u: np.ndarray, anchored: bool, excess: bool):
    """Candidate intervals on one axis as rank ranges ``[start, end)`` plus their lengths.

    ``u`` holds the sorted distinct coordinates. Excess candidates are closed
    intervals between coordinates; deficit candidates are open intervals with
    lower end in ``{0} + u`` and upper end in ``u + {1}``.
    """
    n = u.size
    if excess:
        hi_rank = np.arange(n)
        if anchored:
            return np.zeros(n, dtype=np.int64), hi_rank + 1, u.copy()
        a, b = np.triu_indices(n)
        return a, b + 1, u[b] - u[a]
    hi_vals = np.append(u, 1.0)
    ends = np.append(np.arange(n), n)
    if anchored:
        return np.zeros(n + 1, dtype=np.int64), ends, hi_vals
    lo_vals = np.insert(u, 0, 0.0)
    # the open interval (0, .) drops a point sitting exactly at 0
    starts = np.insert(np.arange(1, n + 1), 0, 1 if u[0] == 0.0 else 0)
    li, hj = np.meshgrid(np.arange(n + 1), np.arange(n + 1), indexing="ij")
    li, hj = li.ravel(), hj.ravel()
    ok = lo_vals[li] <= hi_vals[hj]
    li, hj = li[ok], hj[ok]
    return starts[li], np.maximum(ends[hj], starts[li]), hi_vals[hj] - lo_vals[li]


def brute_disc(points: TorusPointSet, anchored: bool = False) -> DiscrepancyResult:
    """Exact discrepancy by enumerating the critical boxes.

    For half-open boxes ``[a, b)`` the supremum is approached by boxes whose
    faces pass through point coordinates or the faces of the unit cube: an
    excess of points by closed boxes with faces on coordinates, a deficit by
    open boxes. Anchored boxes fix the lower corner at the origin. Box counts
    come from a prefix-sum table over coordinate ranks.

    Refuses ``N > 500`` or ``d > 2``, and unanchored boxes in d = 2 beyond N = 100.
    """
    x = points.coords
    N, d = x.shape
    if d > 2 or N > BRUTE_MAX_N or N < 1:
        raise UsageError(f"brute-force discrepancy is limited to 1 <= N <= {BRUTE_MAX_N}, d <= 2")
    if not anchored and d == 2 and N > BRUTE_MAX_N_EXTREME_2D:
        raise UsageError(f"unanchored brute force in d=2 is limited to N <= {BRUTE_MAX_N_EXTREME_2D}")
    uniq, ranks = zip(*(np.unique(x[:, k], return_inverse=True) for k in range(d)))
    hist = np.zeros(tuple(u.size for u in uniq), dtype=np.int64)
    np.add.at(hist, tuple(ranks), 1)
    prefix_tbl = np.zeros(tuple(u.size + 1 for u in uniq), dtype=np.int64)
    inner = hist
    for k in range(d):
        inner = np.cumsum(inner, axis=k)
    prefix_tbl[(slice(1, None),) * d] = inner

    best = 0.0
    for excess in (True, False):
        iv = [_axis_intervals(u, anchored, excess) for u in uniq]
        if d == 1:
            (s1, e1, l1), = iv
            count = prefix_tbl[e1] - prefix_tbl[s1]
            gap = count / N - l1 if excess else l1 - count / N
            best = max(best, float(gap.max()))
            continue
        (s1, e1, l1), (s2, e2, l2) = iv
        for i0 in range(0, s1.size, 256):
            a, b, la = s1[i0 : i0 + 256, None], e1[i0 : i0 + 256, None], l1[i0 : i0 + 256, None]
            count = prefix_tbl[b, e2] - prefix_tbl[a, e2] - prefix_tbl[b, s2] + prefix_tbl[a, s2]
            vol = la * l2
            gap = count / N - vol if excess else vol - count / N
            best = max(best, float(gap.max()))
    return DiscrepancyResult(N, d, "brute_star" if anchored else "brute", min(best, 1.0))


def default_ket_constant(d: int) -> float:
    return 4.0 * 3.0 ** (d - 1)


def ket_bound(points: TorusPointSet, m: int, C_d: Optional[float] = None) -> DiscrepancyResult:
    """``C_d (1/m + sum_{0 < |h|_inf <= m} |W(h)| / r(h))`` with ``r(h) = prod max(|h_j|, 1)``.

    An upper-bound monitor for the all-boxes discrepancy; ``W`` is the
    normalised Weyl sum. Frequencies ``h`` and ``-h`` share one evaluation.
    """
    if m < 1:
        raise UsageError("m must be >= 1")
    x = points.coords
    N, d = x.shape
    if C_d is None:
        C_d = default_ket_constant(d)
    hs = np.array(list(product(range(-m, m + 1), repeat=d)), dtype=np.int64)
    # keep one representative of each +/- pair: first nonzero component positive
    first = np.array([h[np.flatnonzero(h)[0]] if h.any() else 0 for h in hs])
    hs = hs[first > 0]
    weight = 2.0 / np.prod(np.maximum(np.abs(hs), 1), axis=1)
    total = 0.0
    for i0 in range(0, hs.shape[0], 64):
        h = hs[i0 : i0 + 64].astype(np.float64)
        phase = (x @ h.T) % 1.0
        w = np.abs(np.exp(2j * np.pi * phase).mean(axis=0))
        total += float(np.dot(weight[i0 : i0 + 64], w))
    value = C_d * (1.0 / m + total)
    return DiscrepancyResult(N, d, "ket_bound", value, m, C_d)


def low_disc_scaling(spec: SequenceSpec, N_ladder, mode: str = "auto", m: int = 32):
    """``(N, N * D_N / (log N)**d)`` along ``N_ladder``.

    ``mode`` is ``exact`` (d = 1, all-boxes discrepancy), ``brute`` (d <= 2,
    small N), ``ket`` (any d, an upper bound) or ``auto``.
    """
    ladder = [int(n) for n in N_ladder]
    if not ladder or any(n < 2 for n in ladder):
        raise UsageError("ladder entries must be >= 2")
    d = spec_dim(spec)
    if mode == "auto":
        mode = "exact" if d == 1 else ("brute" if max(ladder) <= BRUTE_MAX_N_EXTREME_2D and d <= 2 else "ket")
    full = generate(spec, max(ladder))
    out = []
    for n in ladder:
        pts = prefix(full, n)
        if mode == "exact":
            D = extreme_disc_1d(pts).value
        elif mode == "brute":
            D = brute_disc(pts, anchored=False).value
        elif mode == "ket":
            D = ket_bound(pts, m).value
        else:
            raise UsageError(f"unknown discrepancy mode {mode!r}")
        out.append((n, n * D / math.log(n) ** d))
    return out
