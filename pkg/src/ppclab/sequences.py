"""Generators for Kronecker, perturbed, van der Corput, Halton, i.i.d. and file point sets.

Element ``n`` of every sequence is addressed directly (1-based), so a prefix
of a long generation equals a short generation and any subset of indices can
be regenerated independently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Union

import numpy as np

from .geometry import RandomSource, TorusPointSet, UsageError, frac, read_points_csv
from .numtheory import AlphaVector, parse_alpha

__all__ = [
    "Kronecker",
    "Perturbed",
    "VanDerCorput",
    "Halton",
    "IIDUniform",
    "FilePoints",
    "SequenceSpec",
    "perturbed_kronecker",
    "radical_inverse",
    "generate",
    "generate_at",
    "prefix",
    "parse_spec",
    "spec_dim",
    "is_stochastic",
    "with_seed",
]


@dataclass(frozen=True)
class Kronecker:
    alpha: AlphaVector

    def text(self) -> str:
        return f"kronecker:{self.alpha.name}"


@dataclass(frozen=True)
class VanDerCorput:
    base: int = 2

    def __post_init__(self):
        if self.base < 2:
            raise UsageError(f"van der Corput base must be >= 2, got {self.base}")

    def text(self) -> str:
        return f"vdc:{self.base}"


@dataclass(frozen=True)
class Halton:
    bases: tuple[int, ...]

    def __post_init__(self):
        bases = tuple(int(b) for b in self.bases)
        object.__setattr__(self, "bases", bases)
        if not bases or any(b < 2 for b in bases):
            raise UsageError("Halton bases must be integers >= 2")
        for i, a in enumerate(bases):
            for b in bases[i + 1 :]:
                if math.gcd(a, b) != 1:
                    raise UsageError(f"Halton bases {a} and {b} are not coprime")

    def text(self) -> str:
        return "halton:" + ",".join(map(str, self.bases))


@dataclass(frozen=True)
class IIDUniform:
    dim: int
    seed: int

    def __post_init__(self):
        if self.dim < 1:
            raise UsageError("iid dimension must be >= 1")

    def text(self) -> str:
        return f"iid:d={self.dim}:seed={self.seed}"


@dataclass(frozen=True)
class FilePoints:
    path: str

    def text(self) -> str:
        return f"file:{self.path}"


@dataclass(frozen=True)
class Perturbed:
    """``frac(z_n + epsilon * U(seed, n, .))`` for a deterministic core sequence ``z``.

    With a :class:`Kronecker` core this is the perturbed Kronecker sequence.
    ``epsilon`` is not reduced mod 1.
    """

    core: "SequenceSpec"
    epsilon: float
    seed: int

    def __post_init__(self):
        if not (self.epsilon > 0) or not math.isfinite(self.epsilon):
            raise UsageError(f"epsilon must be > 0, got {self.epsilon}")
        if isinstance(self.core, (Perturbed, IIDUniform, FilePoints)):
            raise UsageError("the perturbed core must be a deterministic generator")

    def text(self) -> str:
        core = self.core.alpha.name if isinstance(self.core, Kronecker) else self.core.text()
        return f"perturbed:{core}:eps={self.epsilon!r}:seed={self.seed}"


SequenceSpec = Union[Kronecker, Perturbed, VanDerCorput, Halton, IIDUniform, FilePoints]


def perturbed_kronecker(alpha: AlphaVector, epsilon: float, seed: int) -> Perturbed:
    return Perturbed(Kronecker(alpha), epsilon, seed)


def spec_dim(spec: SequenceSpec) -> int:
    if isinstance(spec, Kronecker):
        return spec.alpha.dim
    if isinstance(spec, Perturbed):
        return spec_dim(spec.core)
    if isinstance(spec, VanDerCorput):
        return 1
    if isinstance(spec, Halton):
        return len(spec.bases)
    if isinstance(spec, IIDUniform):
        return spec.dim
    if isinstance(spec, FilePoints):
        return read_points_csv(spec.path).dim
    raise TypeError(f"not a sequence spec: {spec!r}")


def is_stochastic(spec: SequenceSpec) -> bool:
    return isinstance(spec, (Perturbed, IIDUniform))


def with_seed(spec: SequenceSpec, seed: int) -> SequenceSpec:
    """Same spec with a different seed; deterministic specs are returned unchanged."""
    if is_stochastic(spec):
        return replace(spec, seed=int(seed))
    return spec


def radical_inverse(n, base: int) -> np.ndarray:
    """Digit-reversal of ``n`` in ``base`` as a float in ``[0, 1)``.

    Digits are reversed into an integer numerator over ``base**K`` and divided once.
    """
    n = np.asarray(n, dtype=np.int64)
    if n.size and n.min() < 0:
        raise UsageError("radical inverse needs non-negative indices")
    top = int(n.max()) if n.size else 0
    K = 1
    while base**K <= top:
        K += 1
    if base**K >= 2**63:
        raise UsageError("index too large for exact radical inverse")
    rev = np.zeros_like(n)
    m = n.copy()
    for _ in range(K):
        rev = rev * base + m % base
        m //= base
    return rev.astype(np.float64) / float(base**K)


def generate_at(spec: SequenceSpec, indices) -> np.ndarray:
    """Coordinates of the 1-based elements ``indices`` as an ``(len, d)`` array."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise UsageError("indices must be one-dimensional")
    if idx.size and idx.min() < 1:
        raise UsageError("sequence indices are 1-based")
    if isinstance(spec, Kronecker):
        return spec.alpha.kronecker(idx)
    if isinstance(spec, VanDerCorput):
        return radical_inverse(idx, spec.base)[:, None]
    if isinstance(spec, Halton):
        return np.column_stack([radical_inverse(idx, b) for b in spec.bases])
    if isinstance(spec, IIDUniform):
        return RandomSource(spec.seed).block(idx, spec.dim)
    if isinstance(spec, Perturbed):
        core = generate_at(spec.core, idx)
        noise = RandomSource(spec.seed).block(idx, core.shape[1])
        return frac(core + spec.epsilon * noise)
    if isinstance(spec, FilePoints):
        pts = read_points_csv(spec.path)
        if idx.size and idx.max() > len(pts):
            raise ValueError(f"{spec.path} holds only {len(pts)} points")
        return pts.coords[idx - 1]
    raise TypeError(f"not a sequence spec: {spec!r}")


_CHUNK = 1 << 18


def generate(spec: SequenceSpec, N: int) -> TorusPointSet:
    """The first ``N`` elements of ``spec``."""
    if N < 1:
        raise UsageError("N must be >= 1")
    if isinstance(spec, FilePoints):
        pts = read_points_csv(spec.path)
        if N > len(pts):
            raise ValueError(f"{spec.path} holds only {len(pts)} points, {N} requested")
        return prefix(pts, N)
    parts = [generate_at(spec, np.arange(lo + 1, min(lo + _CHUNK, N) + 1)) for lo in range(0, N, _CHUNK)]
    return TorusPointSet(np.concatenate(parts, axis=0))


def prefix(points: TorusPointSet, M: int) -> TorusPointSet:
    if M > len(points):
        raise UsageError(f"prefix length {M} exceeds N={len(points)}")
    if M < 1:
        raise UsageError("prefix length must be >= 1")
    return TorusPointSet(points.coords[:M])


def _kv(token: str, key: str) -> str:
    if not token.startswith(key + "="):
        raise UsageError(f"expected '{key}=...' in sequence spec, got {token!r}")
    return token[len(key) + 1 :]


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{what} must be an integer, got {text!r}") from None


def parse_spec(text: str) -> SequenceSpec:
    """Parse the textual form of a sequence spec.

    Accepted forms::

        kronecker:golden            kronecker:0.4142,0.7320   (custom alpha)
        perturbed:golden:eps=0.1:seed=42
        perturbed:vdc:2:eps=0.2:seed=1
        perturbed:halton:2,3:eps=0.2:seed=1
        vdc:2    halton:2,3    iid:d=2:seed=7    file:<path>
    """
    text = text.strip()
    kind, _, rest = text.partition(":")
    if kind == "file":
        if not rest:
            raise UsageError("file spec needs a path")
        return FilePoints(rest)
    tokens = rest.split(":") if rest else []
    if kind == "kronecker":
        if len(tokens) != 1:
            raise UsageError(f"bad kronecker spec {text!r}")
        return Kronecker(parse_alpha(tokens[0]))
    if kind == "vdc":
        if len(tokens) != 1:
            raise UsageError(f"bad vdc spec {text!r}")
        return VanDerCorput(_int(tokens[0], "vdc base"))
    if kind == "halton":
        if len(tokens) != 1:
            raise UsageError(f"bad halton spec {text!r}")
        return Halton(tuple(_int(b, "halton base") for b in tokens[0].split(",")))
    if kind == "iid":
        if len(tokens) != 2:
            raise UsageError(f"bad iid spec {text!r}")
        return IIDUniform(_int(_kv(tokens[0], "d"), "iid d"), _int(_kv(tokens[1], "seed"), "seed"))
    if kind == "perturbed":
        core_tokens = [t for t in tokens if "=" not in t]
        opts = dict(t.split("=", 1) for t in tokens if "=" in t)
        if set(opts) != {"eps", "seed"} or not core_tokens:
            raise UsageError(f"perturbed spec needs a core, eps= and seed=: {text!r}")
        if len(core_tokens) == 1 and core_tokens[0] not in ("vdc", "halton", "kronecker"):
            core = Kronecker(parse_alpha(core_tokens[0]))
        else:
            core = parse_spec(":".join(core_tokens))
        try:
            eps = float(opts["eps"])
        except ValueError:
            raise UsageError(f"eps must be a number, got {opts['eps']!r}") from None
        return Perturbed(core, eps, _int(opts["seed"], "seed"))
    raise UsageError(f"unknown sequence kind {kind!r}")
