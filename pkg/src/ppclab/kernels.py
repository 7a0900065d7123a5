"""Closed-form expectations of perturbation phases and truncated-series bound checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import UsageError
from .numtheory import AlphaVector, _geometric_abs_sq

__all__ = [
    "OverlapCase",
    "classify_overlap",
    "BoundCheckResult",
    "ZETA2",
    "sinc_pi",
    "lemma21_expectation",
    "remark22_expectation",
    "triangular_density",
    "lemma23_lhs",
    "lemma24_check",
    "lemma24_grid",
]

ZETA2 = math.pi**2 / 6.0

CSV_COLUMNS = ("lemma", "param1", "param2", "N_or_rp", "lhs", "rhs", "tail", "satisfied")


class OverlapCase(enum.Enum):
    """Index coincidence pattern of ``(k, l, m, n)`` with ``k != l`` and ``m != n``."""

    K_EQ_M = "k=m;l!=n"
    L_EQ_N = "k!=m;l=n"
    K_EQ_N = "k=n;l!=m"
    L_EQ_M = "k!=n;l=m"
    KM_LN = "k=m;l=n"
    KN_LM = "k=n;l=m"
    DISTINCT = "distinct"

    @property
    def mirror(self) -> "OverlapCase":
        """Case obtained by swapping the roles of ``(k, l)`` and ``(m, n)``."""
        return _MIRROR[self]

    @classmethod
    def parse(cls, text: str) -> "OverlapCase":
        for c in cls:
            if text in (c.value, c.name, c.name.lower()):
                return c
        raise UsageError(f"unknown overlap case {text!r}; choose from {[c.value for c in cls]}")


_MIRROR = {
    OverlapCase.K_EQ_M: OverlapCase.K_EQ_M,
    OverlapCase.L_EQ_N: OverlapCase.L_EQ_N,
    OverlapCase.K_EQ_N: OverlapCase.L_EQ_M,
    OverlapCase.L_EQ_M: OverlapCase.K_EQ_N,
    OverlapCase.KM_LN: OverlapCase.KM_LN,
    OverlapCase.KN_LM: OverlapCase.KN_LM,
    OverlapCase.DISTINCT: OverlapCase.DISTINCT,
}


def classify_overlap(k: int, l: int, m: int, n: int) -> OverlapCase:
    if k == l or m == n:
        raise UsageError("need k != l and m != n")
    if k == m:
        return OverlapCase.KM_LN if l == n else OverlapCase.K_EQ_M
    if k == n:
        return OverlapCase.KN_LM if l == m else OverlapCase.K_EQ_N
    if l == n:
        return OverlapCase.L_EQ_N
    if l == m:
        return OverlapCase.L_EQ_M
    return OverlapCase.DISTINCT


@dataclass(frozen=True)
class BoundCheckResult:
    """A truncated series ``lhs`` with its analytic ``tail`` bound against ``rhs``.

    ``satisfied`` means ``lhs + tail <= rhs``, i.e. the untruncated series is
    certified to respect the bound.
    """

    lemma: str
    lhs: float
    rhs: float
    tail: float
    params: dict = field(default_factory=dict)
    R_max: int = 0

    @property
    def satisfied(self) -> bool:
        return self.lhs + self.tail <= self.rhs


def sinc_pi(x):
    """``sin(pi x) / (pi x)`` with value 1 at 0."""
    out = np.sinc(x)
    return float(out) if np.ndim(out) == 0 else out


def lemma21_expectation(r: int, rp: int, eps: float, case: OverlapCase) -> float:
    """``E[e(r eps (X_k - X_l) + r' eps (X_m - X_n))]`` for i.i.d. uniform ``X``.

    Every case is a product of normalised sinc factors; the factor built on
    ``r - r'`` (resp. ``r + r'``) equals 1 when ``r = r'`` (resp. ``r = -r'``).
    """
    if r == 0 or rp == 0:
        raise UsageError("r and r' must be nonzero (use remark22_expectation for r' = 0)")
    if not eps > 0:
        raise UsageError("eps must be > 0")
    case = OverlapCase.parse(case) if isinstance(case, str) else case
    plus = sinc_pi((r + rp) * eps)
    minus = sinc_pi((r - rp) * eps)
    a, b = sinc_pi(r * eps), sinc_pi(rp * eps)
    if case in (OverlapCase.K_EQ_M, OverlapCase.L_EQ_N):
        return plus * a * b
    if case in (OverlapCase.K_EQ_N, OverlapCase.L_EQ_M):
        return minus * a * b
    if case is OverlapCase.KM_LN:
        return plus * plus
    if case is OverlapCase.KN_LM:
        return minus * minus
    return a * a * b * b


def remark22_expectation(r: int, eps: float) -> float:
    """``E[e(r eps (X_k - X_l))] = sinc(r eps)**2`` for ``k != l``."""
    if r == 0:
        raise UsageError("r must be nonzero")
    return sinc_pi(r * eps) ** 2


def triangular_density(x, eps: float) -> float:
    """Density of ``eps (X - X')`` for independent uniform vectors: ``eps**-d prod(1 - |x_i|/eps)`` on ``[-eps, eps]^d``."""
    if not eps > 0:
        raise UsageError("eps must be > 0")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    u = np.abs(x) / eps
    if (u >= 1.0).any():
        return 0.0
    return float(np.prod(1.0 - u) / eps**x.size)


def lemma23_lhs(
    alpha: AlphaVector,
    eps: float,
    N: int,
    R_max: int,
    C: float = 1.0,
    delta: float = 0.5,
) -> BoundCheckResult:
    """``sum_{0<|r|<=R_max} sinc(r eps)**2 * | |S_N(r alpha)|**2 - N |`` against ``C N**(1+delta)``.

    Uses ``sum_{k != l} e(r (k - l) alpha) = |S_N(r alpha)|**2 - N``; terms
    for ``r`` and ``-r`` coincide. The omitted terms are bounded by
    ``sum_{|r|>R} N**2 / (pi r eps)**2 <= 2 N**2 / (pi**2 eps**2 R)``.
    """
    if alpha.dim != 1:
        raise UsageError("lemma23_lhs needs a one-dimensional alpha")
    if R_max < 1 or N < 1:
        raise UsageError("need R_max >= 1 and N >= 1")
    r = np.arange(1, R_max + 1, dtype=np.int64)
    weight = np.sinc(r * eps) ** 2
    theta = alpha.phase(r[:, None])
    if N == 1:
        # no pairs k != l
        pair_sum = np.zeros_like(weight)
    else:
        pair_sum = np.abs(_geometric_abs_sq(theta, N) - N)
    lhs = 2.0 * float(np.sum(weight * pair_sum))
    tail = 2.0 * N**2 / (math.pi**2 * eps**2 * R_max)
    rhs = C * float(N) ** (1.0 + delta)
    params = {"alpha": alpha.name, "eps": eps, "N": N, "delta": delta, "C": C}
    return BoundCheckResult("lemma23", lhs, rhs, tail, params, R_max)


def _lemma24_sums(rps: np.ndarray, sigmas, R_max: int) -> np.ndarray:
    """Truncated sums ``sum_{r=1..R, r != |r'|} r**-sigma / (r + r')**2``, shape ``(len(sigmas), len(rps))``."""
    r = np.arange(1, R_max + 1, dtype=np.float64)
    w = np.stack([r ** (-float(s)) for s in sigmas])
    out = np.empty((len(sigmas), rps.size))
    block = 8
    for j0 in range(0, rps.size, block):
        rp = rps[j0 : j0 + block].astype(np.float64)
        den = r[None, :] + rp[:, None]
        with np.errstate(divide="ignore"):
            inv2 = 1.0 / (den * den)
        # drop r = |r'| and the pole at r = -r'
        skip = np.abs(rp).astype(np.int64) - 1
        inv2[np.arange(rp.size), skip] = 0.0
        for k in range(len(sigmas)):
            out[k, j0 : j0 + block] = np.sum(w[k][None, :] * inv2, axis=1)
    return out


def _lemma24_tail(rp: int, R_max: int) -> float:
    # r**-sigma <= 1 and |r + r'| >= r - |r'| (r > R_max >= 4|r'|)
    if rp > 0:
        return 1.0 / R_max
    return 1.0 / (R_max - abs(rp))


def lemma24_check(rp: int, sigma: float, R_max: int) -> BoundCheckResult:
    """Truncated ``sum_{r>=1, r != +-r'} r**-sigma / |r + r'|**2`` against ``(2 + 3 zeta(2)) / |r'|**sigma``."""
    if rp == 0:
        raise UsageError("r' must be nonzero")
    if not 0.0 <= sigma < 1.0:
        raise UsageError("sigma must lie in [0, 1)")
    if R_max < 4 * abs(rp):
        raise UsageError("need R_max >= 4 |r'|")
    lhs = float(_lemma24_sums(np.array([rp]), [sigma], R_max)[0, 0])
    rhs = (2.0 + 3.0 * ZETA2) / abs(rp) ** sigma
    return BoundCheckResult("lemma24", lhs, rhs, _lemma24_tail(rp, R_max), {"rp": rp, "sigma": sigma}, R_max)


def lemma24_grid(rps, sigmas, R_max: int) -> list[BoundCheckResult]:
    """:func:`lemma24_check` over a grid, sharing the per-``r`` powers across ``r'``."""
    rps = np.asarray(list(rps), dtype=np.int64)
    sigmas = [float(s) for s in sigmas]
    if (rps == 0).any():
        raise UsageError("r' must be nonzero")
    if any(not 0.0 <= s < 1.0 for s in sigmas):
        raise UsageError("sigma must lie in [0, 1)")
    if R_max < 4 * int(np.abs(rps).max()):
        raise UsageError("need R_max >= 4 |r'|")
    sums = _lemma24_sums(rps, sigmas, R_max)
    out = []
    for k, s in enumerate(sigmas):
        for j, rp in enumerate(rps):
            rhs = (2.0 + 3.0 * ZETA2) / abs(int(rp)) ** s
            out.append(
                BoundCheckResult(
                    "lemma24", float(sums[k, j]), rhs, _lemma24_tail(int(rp), R_max), {"rp": int(rp), "sigma": s}, R_max
                )
            )
    return out
