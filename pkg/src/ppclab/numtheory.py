"""Continued fractions, badly approximable presets and exponential sums."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt
from typing import NamedTuple

import mpmath
import numpy as np

from .geometry import TorusPointSet, UsageError

__all__ = [
    "PrecisionError",
    "QuadraticSurd",
    "ContinuedFraction",
    "BadnessProfile",
    "AlphaVector",
    "ALPHA_PRESETS",
    "alpha_preset",
    "alpha_from_decimals",
    "parse_alpha",
    "cf_expand",
    "badness_profile",
    "geometric_exp_sum",
    "weyl_sum",
    "lemma22_ratio",
    "fixed64_to_float",
]

_TWO64 = 1 << 64


class PrecisionError(ArithmeticError):
    """The input does not carry enough precision for the requested depth."""


@dataclass(frozen=True)
class QuadraticSurd:
    """The exact real number ``(a + b*sqrt(D)) / c`` with ``D`` a positive non-square."""

    a: int
    b: int
    D: int
    c: int = 1

    def __post_init__(self):
        if self.D <= 0 or isqrt(self.D) ** 2 == self.D:
            raise ValueError(f"D={self.D} must be a positive non-square")
        if self.c == 0 or self.b == 0:
            raise ValueError("need c != 0 and b != 0")
        a, b, c = self.a, self.b, self.c
        if c < 0:
            a, b, c = -a, -b, -c
        g = gcd(gcd(a, b), c)
        object.__setattr__(self, "a", a // g)
        object.__setattr__(self, "b", b // g)
        object.__setattr__(self, "c", c // g)

    def _floor_scaled(self, scale: int) -> int:
        # floor(scale * x) exactly; b*sqrt(D) is irrational so floor(t) suffices
        m = self.b * self.b * self.D * scale * scale
        r = isqrt(m)
        t = r if self.b > 0 else -r - 1
        return (self.a * scale + t) // self.c

    def floor(self) -> int:
        return self._floor_scaled(1)

    def fixed64(self) -> int:
        """``floor(frac(x) * 2**64)``."""
        return self._floor_scaled(_TWO64) % _TWO64

    def __sub__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return QuadraticSurd(self.a - k * self.c, self.b, self.D, self.c)

    def reciprocal(self) -> "QuadraticSurd":
        den = self.a * self.a - self.b * self.b * self.D
        return QuadraticSurd(self.c * self.a, -self.c * self.b, self.D, den)

    def to_mpf(self, dps: int = 50):
        with mpmath.workdps(dps):
            return (mpmath.mpf(self.a) + self.b * mpmath.sqrt(self.D)) / self.c

    def __float__(self):
        return float(self.to_mpf(30))

    def __str__(self):
        return f"({self.a}{self.b:+d}*sqrt({self.D}))/{self.c}"


@dataclass(frozen=True)
class ContinuedFraction:
    a0: int
    partial_quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    terminated: bool = False

    @property
    def depth(self) -> int:
        return len(self.partial_quotients)

    def value(self) -> Fraction:
        p, q = self.convergents[-1]
        return Fraction(p, q)


def _convergents(a0: int, quotients) -> tuple[tuple[int, int], ...]:
    p_prev, q_prev = 1, 0
    p, q = a0, 1
    out = [(p, q)]
    for a in quotients:
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return tuple(out)


def _euclid(x: Fraction, K: int):
    a0 = math.floor(x)
    rest = x - a0
    quotients = []
    while rest and len(quotients) < K:
        x = 1 / rest
        a = math.floor(x)
        quotients.append(a)
        rest = x - a
    return a0, quotients, rest == 0


def _interval(x) -> tuple[Fraction, Fraction]:
    if isinstance(x, float):
        if not math.isfinite(x):
            raise UsageError("cannot expand a non-finite float")
        u = Fraction(math.ulp(x))
        return Fraction(x) - u, Fraction(x) + u
    # mpf: man * 2**exp is exact, uncertain by one unit in the last place
    man, exp = int(x.man), int(x.exp)
    sign = -1 if x < 0 else 1
    centre = Fraction(sign * man) * Fraction(2) ** exp
    u = Fraction(2) ** exp
    return centre - u, centre + u


def cf_expand(x, K: int) -> ContinuedFraction:
    """Continued fraction of ``x`` to depth ``K``.

    ``x`` may be an ``int``, ``Fraction``, decimal string (all exact, expansion
    stops early), a :class:`QuadraticSurd` (exact integer algorithm), or a
    ``float``/``mpmath.mpf``. Inexact inputs are expanded at both ends of their
    one-ulp uncertainty interval and a :class:`PrecisionError` is raised as
    soon as the two expansions disagree before depth ``K``.
    """
    if K < 1:
        raise UsageError("K must be >= 1")
    if isinstance(x, str):
        x = Fraction(x.strip())
    elif hasattr(x, "_mpf_") and not isinstance(x, mpmath.mpf):
        x = mpmath.mpf(x)
    if isinstance(x, (int, Fraction)):
        a0, qs, term = _euclid(Fraction(x), K)
        return ContinuedFraction(a0, tuple(qs), _convergents(a0, qs), term)
    if isinstance(x, QuadraticSurd):
        a0 = x.floor()
        y = x - a0
        qs = []
        while len(qs) < K:
            y = y.reciprocal()
            a = y.floor()
            qs.append(a)
            y = y - a
        return ContinuedFraction(a0, tuple(qs), _convergents(a0, qs), False)
    if isinstance(x, (float, mpmath.mpf)):
        lo, hi = _interval(x)
        a0_lo, q_lo, t_lo = _euclid(lo, K)
        a0_hi, q_hi, t_hi = _euclid(hi, K)
        if a0_lo != a0_hi:
            raise PrecisionError("input precision does not even fix the integer part")
        agreed = []
        for a, b in zip(q_lo, q_hi):
            if a != b:
                break
            agreed.append(a)
        if len(agreed) < K:
            raise PrecisionError(
                f"input precision exhausted after {len(agreed)} partial quotients (requested {K})"
            )
        return ContinuedFraction(a0_lo, tuple(agreed), _convergents(a0_lo, agreed), False)
    raise UsageError(f"unsupported number type {type(x).__name__}")


class BadnessProfile(NamedTuple):
    max_quotient: int
    min_product: float
    # min of q*||q x|| over the second half of the convergents, a liminf proxy
    tail_min_product: float


def _high_precision(x, dps: int):
    if hasattr(x, "_mpf_"):
        return mpmath.mpf(x)
    if isinstance(x, QuadraticSurd):
        return x.to_mpf(dps)
    if isinstance(x, float):
        return mpmath.mpf(x)
    raise UsageError(f"unsupported number type {type(x).__name__}")


def badness_profile(x, K: int) -> BadnessProfile:
    """Largest partial quotient ``a_1..a_K`` and the smallest ``q * ||q x||`` over convergents ``q_1..q_K``."""
    if isinstance(x, (int, Fraction, str)):
        raise UsageError("badness is undefined for rational input")
    cf = cf_expand(x, K)
    if cf.terminated:
        raise UsageError("badness is undefined for rational input")
    qs = [q for _, q in cf.convergents[1:]]
    dps = 30 + 2 * len(str(qs[-1]))
    with mpmath.workdps(dps):
        xv = _high_precision(x, dps)
        products = []
        for q in qs:
            t = q * xv
            products.append(float(q * abs(t - mpmath.nint(t))))
    half = len(products) // 2
    return BadnessProfile(max(cf.partial_quotients), min(products), min(products[half:]))


def fixed64_to_float(v):
    """Map 64-bit fixed-point fractions to the nearest double in ``[0, 1)``.

    A fraction that rounds up to 1 wraps to 0, its torus equivalent.
    """
    v = np.asarray(v, dtype=np.uint64)
    top = (v >> np.uint64(11)) + ((v >> np.uint64(10)) & np.uint64(1))
    top = np.where(top == np.uint64(1 << 53), np.uint64(0), top)
    return top.astype(np.float64) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class AlphaVector:
    """A vector of irrationals in ``(0, 1)`` driving a Kronecker sequence.

    ``fixed`` holds ``floor(alpha_i * 2**64)``, so ``n * alpha mod 1`` can be
    formed with wrap-around uint64 products and no loss of the fractional part.
    """

    name: str
    exact: tuple
    values: tuple[float, ...]
    fixed: tuple[int, ...]
    cf: tuple[ContinuedFraction, ...]
    badness_estimate: tuple[float, ...]
    independence_note: str
    verified: bool = True

    @property
    def dim(self) -> int:
        return len(self.values)

    def fixed_array(self) -> np.ndarray:
        return np.array(self.fixed, dtype=np.uint64)

    def phase(self, r) -> np.ndarray:
        """``<r, alpha> mod 1`` for integer frequency vectors ``r`` (shape ``(..., d)``)."""
        r = np.asarray(r, dtype=np.int64)
        if r.shape[-1] != self.dim:
            raise UsageError(f"frequency has dimension {r.shape[-1]}, alpha has {self.dim}")
        acc = (r.view(np.uint64) * self.fixed_array()).sum(axis=-1, dtype=np.uint64)
        return fixed64_to_float(acc)

    def kronecker(self, n) -> np.ndarray:
        """``frac(n * alpha)`` for an array of indices ``n`` as an ``(len(n), d)`` array."""
        n = np.asarray(n, dtype=np.int64).view(np.uint64)[:, None]
        return fixed64_to_float(n * self.fixed_array()[None, :])


_CF_DEPTH = 60


def _alpha_from_surds(name: str, surds, note: str) -> AlphaVector:
    cfs = tuple(cf_expand(s, _CF_DEPTH) for s in surds)
    bad = tuple(badness_profile(s, _CF_DEPTH).min_product for s in surds)
    return AlphaVector(
        name=name,
        exact=tuple(surds),
        values=tuple(float(s) for s in surds),
        fixed=tuple(s.fixed64() for s in surds),
        cf=cfs,
        badness_estimate=bad,
        independence_note=note,
    )


_GOLDEN = QuadraticSurd(-1, 1, 5, 2)
_SQRT2 = QuadraticSurd(-1, 1, 2)
_SQRT3 = QuadraticSurd(-1, 1, 3)
_SQRT5 = QuadraticSurd(-2, 1, 5)

ALPHA_PRESETS = {
    "golden": ((_GOLDEN,), "single quadratic irrational; {1, alpha} independent over Q"),
    "sqrt2": ((_SQRT2,), "single quadratic irrational; {1, alpha} independent over Q"),
    "sqrt23": (
        (_SQRT2, _SQRT3),
        "{1, sqrt2, sqrt3} is linearly independent over Q (distinct square-free radicands)",
    ),
    "sqrt235": (
        (_SQRT2, _SQRT3, _SQRT5),
        "{1, sqrt2, sqrt3, sqrt5} is linearly independent over Q (distinct square-free radicands)",
    ),
}

_preset_cache: dict[str, AlphaVector] = {}


def alpha_preset(name: str) -> AlphaVector:
    if name not in ALPHA_PRESETS:
        raise UsageError(f"unknown alpha preset {name!r}; choose from {sorted(ALPHA_PRESETS)}")
    if name not in _preset_cache:
        surds, note = ALPHA_PRESETS[name]
        _preset_cache[name] = _alpha_from_surds(name, surds, note)
    return _preset_cache[name]


def alpha_from_decimals(literals) -> AlphaVector:
    """Build an alpha vector from decimal strings; badness cannot be verified."""
    fracs = []
    for lit in literals:
        try:
            x = Fraction(lit.strip())
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"alpha component {lit!r} is not a decimal literal") from None
        x -= math.floor(x)
        if x == 0:
            raise UsageError(f"alpha component {lit!r} is an integer")
        fracs.append(x)
    warnings.warn("custom alpha: badly approximable property is unverified", stacklevel=2)
    cfs, bad = [], []
    for x in fracs:
        cf = cf_expand(x, _CF_DEPTH)
        cfs.append(cf)
        # skip the final convergent, which equals x exactly
        prods = [float(q * abs(q * x - p)) for p, q in cf.convergents[1:-1]] or [float("nan")]
        bad.append(min(prods))
    return AlphaVector(
        name=",".join(s.strip() for s in literals),
        exact=tuple(fracs),
        values=tuple(float(x) for x in fracs),
        fixed=tuple(math.floor(x * _TWO64) % _TWO64 for x in fracs),
        cf=tuple(cfs),
        badness_estimate=tuple(bad),
        independence_note="custom decimal input; independence not checked",
        verified=False,
    )


def parse_alpha(text: str) -> AlphaVector:
    text = text.strip()
    if text in ALPHA_PRESETS:
        return alpha_preset(text)
    return alpha_from_decimals(text.split(","))


def geometric_exp_sum(theta: float, N: int) -> complex:
    """``sum_{j=1}^N e(j*theta)``, closed form unless ``theta`` is within 1e-9 of an integer."""
    if N < 1:
        raise UsageError("N must be >= 1")
    t = float(theta) - round(float(theta))
    if abs(t) < 1e-9:
        j = np.arange(1, N + 1, dtype=np.float64)
        return complex(np.exp(2j * np.pi * j * t).sum())
    half = ((N + 1) * t / 2.0) % 1.0
    mag = math.sin(math.pi * ((N * t) % 2.0)) / math.sin(math.pi * t)
    return complex(mag * np.exp(2j * np.pi * half))


def _geometric_abs_sq(theta: np.ndarray, N: int) -> np.ndarray:
    """Vectorised ``|sum_{j=1}^N e(j*theta)|**2``."""
    t = theta - np.round(theta)
    out = np.full(t.shape, float(N) ** 2)
    ok = np.abs(t) >= 1e-9
    num = np.sin(np.pi * ((N * t[ok]) % 2.0))
    out[ok] = (num / np.sin(np.pi * t[ok])) ** 2
    for idx in np.flatnonzero(~ok):
        out[idx] = abs(geometric_exp_sum(float(theta[idx]), N)) ** 2
    return out


def weyl_sum(points: TorusPointSet, r) -> complex:
    """Normalised exponential sum ``(1/N) sum_j e(<r, x_j>)``."""
    r = np.atleast_1d(np.asarray(r, dtype=np.int64))
    if r.shape != (points.dim,):
        raise UsageError(f"frequency has dimension {r.shape}, points have dim={points.dim}")
    if not r.any():
        raise UsageError("frequency vector must be nonzero")
    phase = (points.coords @ r.astype(np.float64)) % 1.0
    return complex(np.exp(2j * np.pi * phase).mean())


def lemma22_ratio(alpha: AlphaVector, r, N: int, delta: float) -> float:
    """``|S_N(<r, alpha>)| / (min_i r_i**(1/2 - delta) * N**(1/2 + delta))`` for positive ``r``."""
    r = np.atleast_1d(np.asarray(r, dtype=np.int64))
    if r.shape != (alpha.dim,):
        raise UsageError(f"frequency has dimension {r.shape}, alpha has {alpha.dim}")
    if (r < 1).any():
        raise UsageError("all frequency components must be >= 1")
    if N < 1:
        raise UsageError("N must be >= 1")
    theta = float(alpha.phase(r))
    num = abs(geometric_exp_sum(theta, N))
    return num / (float(r.min()) ** (0.5 - delta) * float(N) ** (0.5 + delta))
