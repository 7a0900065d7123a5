"""Seeded Monte Carlo harnesses over pair correlation statistics.

Every experiment generates each seed's sequence once at the largest ladder
rung and evaluates prefixes, so a row depends only on ``(spec, seed, N)``.
Seeds may run on worker threads; rows are assembled in config order, so
reports are identical for any thread count.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import UsageError
from .paircorr import PairCorrQuery, pair_corr
from .sequences import Perturbed, SequenceSpec, generate, is_stochastic, prefix, spec_dim, with_seed

__all__ = [
    "ExperimentConfig",
    "ExperimentRow",
    "SummaryRow",
    "ExperimentReport",
    "run_ppc_convergence",
    "run_expectation_check",
    "run_variance_decay",
    "run_beta_sweep",
    "git_blob_hash",
    "expected_pair_corr",
    "finite_n_expectation_1d",
    "write_report",
    "REPORT_COLUMNS",
    "SUMMARY_COLUMNS",
]

REPORT_COLUMNS = ("experiment", "spec", "seed", "N", "d", "beta", "s", "F", "target", "abs_err")
SUMMARY_COLUMNS = ("N", "s", "mean_F", "var_F", "max_abs_err", "n_seeds")
DEFAULT_LADDER = (10**3, 10**4, 10**5, 10**6)
VARIANCE_SLOPE_LIMIT = -0.4
MIN_VARIANCE_SEEDS = 30
MIN_VARIANCE_RUNGS = 4
EXACT_EXPECTATION_MAX_N = 2000


@dataclass(frozen=True)
class ExperimentConfig:
    spec: SequenceSpec
    N_ladder: tuple[int, ...] = DEFAULT_LADDER
    s_values: tuple[float, ...] = (1.0,)
    beta: Optional[float] = None
    seeds: tuple[int, ...] = ()
    tolerance: float = 0.05
    out: Optional[str] = None
    betas: tuple[float, ...] = ()
    method: str = "auto"
    threads: int = 1

    def __post_init__(self):
        ladder = tuple(int(n) for n in self.N_ladder)
        object.__setattr__(self, "N_ladder", ladder)
        object.__setattr__(self, "s_values", tuple(float(s) for s in self.s_values))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not ladder or any(n < 2 for n in ladder):
            raise UsageError("ladder entries must be >= 2")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise UsageError("ladder must be strictly increasing")
        if is_stochastic(self.spec) and not self.seeds:
            raise UsageError("seeds must be nonempty for a stochastic spec")
        if self.tolerance <= 0:
            raise UsageError("tolerance must be > 0")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")

    @property
    def dim(self) -> int:
        return spec_dim(self.spec)

    def effective_beta(self) -> float:
        return 1.0 / self.dim if self.beta is None else float(self.beta)

    def canonical_text(self) -> str:
        """Stable ``key=value`` rendering used for the content hash (``threads``/``out`` excluded)."""
        lines = [
            f"spec={self.spec.text()}",
            "ladder=" + ",".join(map(str, self.N_ladder)),
            "s=" + ",".join(repr(s) for s in self.s_values),
            f"beta={'' if self.beta is None else repr(float(self.beta))}",
            "betas=" + ",".join(repr(b) for b in self.betas),
            "seeds=" + ",".join(map(str, self.seeds)),
            f"tolerance={self.tolerance!r}",
            f"method={self.method}",
        ]
        return "\n".join(lines) + "\n"


def git_blob_hash(text: str) -> str:
    data = text.encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


@dataclass(frozen=True)
class ExperimentRow:
    experiment: str
    spec: str
    seed: Optional[int]
    N: int
    d: int
    beta: float
    s: float
    F: float
    target: float

    @property
    def abs_err(self) -> float:
        return abs(self.F - self.target)

    def values(self):
        seed = "" if self.seed is None else self.seed
        return (self.experiment, self.spec, seed, self.N, self.d, self.beta, self.s, self.F, self.target, self.abs_err)


@dataclass(frozen=True)
class SummaryRow:
    N: int
    s: float
    mean_F: float
    var_F: float
    max_abs_err: float
    n_seeds: int
    beta: float = 0.0


@dataclass
class ExperimentReport:
    experiment: str
    rows: list[ExperimentRow]
    summary: list[SummaryRow]
    metadata: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def summary_for(self, N: int, s: float, beta: Optional[float] = None) -> SummaryRow:
        for row in self.summary:
            if row.N == N and row.s == s and (beta is None or row.beta == beta):
                return row
        raise KeyError((N, s, beta))

    def rows_for(self, N: int, s: float, beta: Optional[float] = None) -> list[ExperimentRow]:
        return [r for r in self.rows if r.N == N and r.s == s and (beta is None or r.beta == beta)]

    @property
    def passed(self) -> bool:
        return bool(self.checks.get("passed", True))


def _seed_rows(name: str, cfg: ExperimentConfig, seed, betas) -> list[ExperimentRow]:
    spec = with_seed(cfg.spec, seed) if seed is not None else cfg.spec
    full = generate(spec, cfg.N_ladder[-1])
    d = full.dim
    text = spec.text()
    rows = []
    for N in cfg.N_ladder:
        pts = prefix(full, N)
        for beta in betas:
            res = pair_corr(pts, PairCorrQuery(beta, cfg.s_values, cfg.method))
            for e in res.entries:
                rows.append(ExperimentRow(name, text, seed, N, d, beta, e.s, e.F, e.target))
    return rows


def _collect(name: str, cfg: ExperimentConfig, betas) -> list[ExperimentRow]:
    seeds = list(cfg.seeds) if is_stochastic(cfg.spec) else [None]
    if cfg.threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(lambda sd: _seed_rows(name, cfg, sd, betas), seeds))
    else:
        parts = [_seed_rows(name, cfg, sd, betas) for sd in seeds]
    # seed-major order from config; regroup (beta, N, s)-major for stable output
    rows = [r for part in parts for r in part]
    key = {b: i for i, b in enumerate(betas)}
    rows.sort(key=lambda r: (key[r.beta], r.N, r.s))
    return rows


def _summarise(rows: list[ExperimentRow]) -> list[SummaryRow]:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r.beta, r.N, r.s), []).append(r)
    out = []
    for (beta, N, s), grp in groups.items():
        F = np.array([r.F for r in grp])
        var = float(np.var(F, ddof=1)) if F.size > 1 else 0.0
        out.append(SummaryRow(N, s, float(F.mean()), var, float(max(r.abs_err for r in grp)), F.size, beta))
    return out


def _report(name: str, cfg: ExperimentConfig, rows) -> ExperimentReport:
    meta = {
        "experiment": name,
        "spec": cfg.spec.text(),
        "config_hash": git_blob_hash(cfg.canonical_text()),
    }
    return ExperimentReport(name, rows, _summarise(rows), meta)


def run_ppc_convergence(cfg: ExperimentConfig) -> ExperimentReport:
    """Pair correlation at ``beta`` (default ``1/d``) per seed and rung, compared with ``(2s)^d``.

    ``checks['passed']`` requires every seed at the top rung to satisfy
    ``|F - (2s)^d| / (2s)^d < tolerance``.
    """
    beta = cfg.effective_beta()
    rows = _collect("ppc_convergence", cfg, [beta])
    rep = _report("ppc_convergence", cfg, rows)
    top = cfg.N_ladder[-1]
    worst = max(r.abs_err / r.target for r in rows if r.N == top)
    rep.checks = {"top_N": top, "max_rel_err_top": worst, "passed": worst < cfg.tolerance}
    return rep


def _perturbation_eps(spec: SequenceSpec) -> Optional[float]:
    return spec.epsilon if isinstance(spec, Perturbed) else None


def finite_n_expectation_1d(s: float, eps: float, N: int) -> float:
    """``2s (1 - s**2 / (eps**2 N**2))``, the finite-N expectation for d = 1 at ``beta = 1``."""
    return 2.0 * s * (1.0 - s**2 / (eps**2 * N**2))


def _triangle_cdf(u):
    """CDF of ``X - X'`` for independent uniforms on ``[0, 1]``."""
    u = np.clip(u, -1.0, 1.0)
    return np.where(u <= 0.0, 0.5 * (1.0 + u) ** 2, 1.0 - 0.5 * (1.0 - u) ** 2)


def expected_pair_corr(core, eps: float, s: float, beta: Optional[float] = None) -> float:
    """Exact ``E[F]`` for ``frac(z_n + eps * X_n)`` given the core points ``z``.

    Each coordinate of ``eps (X_l - X_m)`` has the triangular law, so the
    probability that a pair lands within the window is a product over
    coordinates of CDF differences summed over the torus images. O(N^2 d).
    """
    z = core.coords
    N, d = z.shape
    beta = 1.0 / d if beta is None else beta
    t = s / float(N) ** beta
    if t >= 0.5:
        raise UsageError("window must be below 1/2")
    K = int(math.ceil(eps + t)) + 1
    shifts = np.arange(-K, K + 1, dtype=np.float64)
    total = 0.0
    for l in range(N):
        delta = z[l][None, :] - np.delete(z, l, axis=0)
        prob = np.ones(delta.shape[0])
        for i in range(d):
            c = shifts[None, :] - delta[:, i : i + 1]
            p = _triangle_cdf((c + t) / eps) - _triangle_cdf((c - t) / eps)
            prob *= p.sum(axis=1)
        total += prob.sum()
    return total / float(N) ** (2.0 - d * beta)


def run_expectation_check(cfg: ExperimentConfig) -> ExperimentReport:
    """Seed mean of ``F`` against ``(2s)^d`` with a normal band ``3 * sqrt(var / n_seeds)``.

    In d = 1 with a perturbed spec the mean is also compared with the
    finite-N value from :func:`finite_n_expectation_1d`, and for small
    perturbed samples with the exact value from :func:`expected_pair_corr`.
    """
    if not is_stochastic(cfg.spec):
        raise UsageError("the expectation check needs a stochastic spec")
    if len(cfg.seeds) < 2:
        raise UsageError("the expectation check needs at least two seeds")
    beta = cfg.effective_beta()
    rows = _collect("expectation", cfg, [beta])
    rep = _report("expectation", cfg, rows)
    eps = _perturbation_eps(cfg.spec)
    bands = []
    for row in rep.summary:
        half = 3.0 * math.sqrt(row.var_F / row.n_seeds)
        target = (2.0 * row.s) ** cfg.dim
        entry = {
            "N": row.N,
            "s": row.s,
            "mean_F": row.mean_F,
            "target": target,
            "band": half,
            "within": abs(row.mean_F - target) <= half,
        }
        if cfg.dim == 1 and eps is not None and beta == 1.0:
            corrected = finite_n_expectation_1d(row.s, eps, row.N)
            entry["corrected"] = corrected
            entry["within_corrected"] = abs(row.mean_F - corrected) <= half
        if eps is not None and row.N <= EXACT_EXPECTATION_MAX_N and row.s / row.N**beta < 0.5:
            core = generate(cfg.spec.core, row.N)
            exact = expected_pair_corr(core, eps, row.s, beta)
            entry["exact"] = exact
            entry["within_exact"] = abs(row.mean_F - exact) <= half
        bands.append(entry)
    rep.checks = {"bands": bands, "passed": all(b["within"] for b in bands)}
    return rep


def run_variance_decay(cfg: ExperimentConfig) -> ExperimentReport:
    """Sample variance of ``F`` per rung and the least-squares slope of ``log Var`` against ``log N``."""
    if len(cfg.N_ladder) < MIN_VARIANCE_RUNGS:
        raise UsageError(f"insufficient rungs: need >= {MIN_VARIANCE_RUNGS} ladder entries (ladder)")
    if not is_stochastic(cfg.spec) or len(cfg.seeds) < MIN_VARIANCE_SEEDS:
        raise UsageError(f"insufficient seeds: need >= {MIN_VARIANCE_SEEDS} (seeds)")
    beta = cfg.effective_beta()
    rows = _collect("variance_decay", cfg, [beta])
    rep = _report("variance_decay", cfg, rows)
    slopes = {}
    for s in cfg.s_values:
        pts = [(row.N, row.var_F) for row in rep.summary if row.s == s]
        logN = np.log([n for n, _ in pts])
        with np.errstate(divide="ignore"):
            logV = np.log([v for _, v in pts])
        slopes[s] = float(np.polyfit(logN, logV, 1)[0]) if np.all(np.isfinite(logV)) else float("nan")
    rep.checks = {
        "slopes": slopes,
        "slope_limit": VARIANCE_SLOPE_LIMIT,
        "passed": all(v <= VARIANCE_SLOPE_LIMIT for v in slopes.values()),
    }
    return rep


def run_beta_sweep(cfg: ExperimentConfig) -> ExperimentReport:
    """``F`` at every ``beta`` in ``cfg.betas`` along the ladder; deterministic specs need no seeds."""
    betas = list(cfg.betas) or [cfg.effective_beta()]
    d = cfg.dim
    if any(b < 0 or b > 1.0 / d + 1e-12 for b in betas):
        raise UsageError(f"every beta must lie in [0, 1/d] (betas)")
    rows = _collect("beta_sweep", cfg, betas)
    rep = _report("beta_sweep", cfg, rows)
    top = cfg.N_ladder[-1]
    worst = {b: max(r.abs_err / r.target for r in rows if r.N == top and r.beta == b) for b in betas}
    rep.checks = {"max_rel_err_top": worst, "passed": all(v < cfg.tolerance for v in worst.values())}
    return rep


EXPERIMENTS = {
    "ppc": run_ppc_convergence,
    "expectation": run_expectation_check,
    "variance": run_variance_decay,
    "beta": run_beta_sweep,
}


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def report_csv(rep: ExperimentReport) -> str:
    return _csv_text(REPORT_COLUMNS, (r.values() for r in rep.rows))


def summary_csv(rep: ExperimentReport) -> str:
    sweep = rep.experiment == "beta_sweep"
    header = (("beta",) if sweep else ()) + SUMMARY_COLUMNS
    body = (
        ((r.beta,) if sweep else ()) + (r.N, r.s, r.mean_F, r.var_F, r.max_abs_err, r.n_seeds) for r in rep.summary
    )
    return _csv_text(header, body)


def _flatten(prefix_key: str, value, out: list):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix_key}.{k}" if prefix_key else str(k), v, out)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix_key}[{i}]", v, out)
    else:
        out.append(f"{prefix_key}={_fmt(value)}")


def meta_text(rep: ExperimentReport) -> str:
    lines: list = []
    _flatten("", rep.metadata, lines)
    _flatten("checks", rep.checks, lines)
    return "\n".join(lines) + "\n"


def write_report(rep: ExperimentReport, path) -> list[Path]:
    """Write ``<path>`` (rows), ``<stem>.summary.csv`` and ``<stem>.meta.txt``."""
    path = Path(path)
    stem = path.with_suffix("") if path.suffix == ".csv" else path
    files = [
        (path, report_csv(rep)),
        (stem.with_name(stem.name + ".summary.csv"), summary_csv(rep)),
        (stem.with_name(stem.name + ".meta.txt"), meta_text(rep)),
    ]
    for p, text in files:
        p.write_text(text, encoding="utf-8", newline="")
    return [p for p, _ in files]
