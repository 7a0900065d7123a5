"""Points on the unit torus, the nearest-integer sup-norm and index-addressed randomness."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "UsageError",
    "TorusPointSet",
    "RandomSource",
    "frac",
    "torus_dist_sup",
    "pair_dist_sup",
    "uniform_value",
    "philox4x32",
    "read_points_csv",
    "write_points_csv",
]


class UsageError(ValueError):
    """Raised when a caller violates an operation's preconditions."""


def frac(x):
    """Fractional part ``x - floor(x)`` with rounding spill-over at 1.0 folded back to 0.0."""
    x = np.asarray(x, dtype=np.float64)
    y = x - np.floor(x)
    return np.where(y >= 1.0, 0.0, y)


@dataclass(frozen=True, eq=False)
class TorusPointSet:
    """``N`` points in ``[0, 1)^d`` stored as a read-only ``(N, d)`` float64 array."""

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[1] < 1:
            raise UsageError(f"points must have shape (N, d) with d >= 1, got {arr.shape}")
        if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() >= 1.0):
            raise UsageError("every coordinate must satisfy 0 <= c < 1")
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self) -> int:
        return self.coords.shape[0]

    def __getitem__(self, idx):
        return self.coords[idx]

    def __eq__(self, other):
        if not isinstance(other, TorusPointSet):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(np.array_equal(self.coords, other.coords))

    def __hash__(self):
        return hash((self.coords.shape, self.coords.tobytes()))

    def __repr__(self):
        return f"TorusPointSet(N={len(self)}, dim={self.dim})"

    def shifted(self, shift) -> "TorusPointSet":
        """Translate every point by ``shift`` on the torus."""
        shift = np.broadcast_to(np.asarray(shift, dtype=np.float64), (self.dim,))
        return TorusPointSet(frac(self.coords + shift))


def pair_dist_sup(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorised torus sup-distance between matching rows of ``a`` and ``b``.

    Every counting routine in the package goes through this function so that
    ties at a threshold are decided identically everywhere.
    """
    diff = np.abs(a - b) % 1.0
    dist = np.minimum(diff, 1.0 - diff)
    if dist.ndim == 1:
        return dist
    return dist.max(axis=-1)


def torus_dist_sup(a, b) -> float:
    """Largest coordinatewise distance to the nearest integer of ``a - b``.

    >>> torus_dist_sup([0.9], [0.1])  # doctest: +ELLIPSIS
    0.19999...
    """
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape or a.ndim != 1:
        raise UsageError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(pair_dist_sup(a[None, :], b[None, :])[0])


# Philox4x32-10 (Salmon et al., Random123).
_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = 0x9E3779B9
_PHILOX_W1 = 0xBB67AE85
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)


def philox4x32(counter, key, rounds: int = 10):
    """Vectorised Philox4x32 block function.

    ``counter`` is a sequence of four uint32 arrays (broadcastable), ``key`` a
    pair of Python ints. Returns four uint64 arrays holding 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for _ in range(rounds):
        p0 = c0 * _PHILOX_M0
        p1 = c2 * _PHILOX_M1
        hi0, lo0 = p0 >> _SHIFT32, p0 & _MASK32
        hi1, lo1 = p1 >> _SHIFT32, p1 & _MASK32
        c0 = hi1 ^ c1 ^ np.uint64(k0)
        c1 = lo1
        c2 = hi0 ^ c3 ^ np.uint64(k1)
        c3 = lo0
        k0 = (k0 + _PHILOX_W0) & 0xFFFFFFFF
        k1 = (k1 + _PHILOX_W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


@dataclass(frozen=True)
class RandomSource:
    """Counter-based uniform stream ``U(seed, n, i)``.

    The value for element ``n`` and coordinate ``i`` is a pure function of
    ``(seed, n, i)``: Philox4x32-10 keyed by the 64-bit seed with counter
    ``(n_lo, n_hi, i, 0)``, two output words combined into a 53-bit double.
    """

    seed: int

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    def uniform(self, n, i) -> np.ndarray:
        n = np.asarray(n, dtype=np.uint64)
        i = np.asarray(i, dtype=np.uint64)
        key = (self.seed & 0xFFFFFFFF, self.seed >> 32)
        w0, w1, _, _ = philox4x32((n & _MASK32, n >> _SHIFT32, i, np.uint64(0)), key)
        bits = ((w0 >> np.uint64(5)) << np.uint64(26)) | (w1 >> np.uint64(6))
        return bits.astype(np.float64) * (1.0 / 9007199254740992.0)

    def block(self, indices, dim: int) -> np.ndarray:
        """Uniforms for elements ``indices`` and coordinates ``0..dim-1`` as an ``(len, dim)`` array."""
        idx = np.asarray(indices, dtype=np.uint64)[:, None]
        return self.uniform(idx, np.arange(dim, dtype=np.uint64)[None, :])


def uniform_value(src: RandomSource, n: int, i: int) -> float:
    return float(src.uniform(n, i))


def write_points_csv(points: TorusPointSet, path) -> None:
    lines = [f"dim={points.dim}"]
    lines.extend(",".join(format(float(c), ".17g") for c in row) for row in points.coords)
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_points_csv(path) -> TorusPointSet:
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise OSError(f"cannot read point file {path}: {exc}") from exc
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("dim="):
        raise ValueError(f"{path}: first line must be 'dim=<d>'")
    try:
        dim = int(lines[0][4:])
    except ValueError:
        raise ValueError(f"{path}: bad header {lines[0]!r}") from None
    if dim < 1:
        raise ValueError(f"{path}: dim must be positive")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != dim:
            raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric value") from None
    arr = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    try:
        return TorusPointSet(arr)
    except UsageError as exc:
        raise ValueError(f"{path}: {exc}") from None
