"""``ppclab`` command line: sequences, pair correlation, discrepancy, kernels and experiments.

Every subcommand accepts ``--config FILE`` with ``key=value`` lines (``#``
starts a comment). Keys are the subcommand's long option names without the
leading dashes, with ``-`` and ``_`` interchangeable. A flag given on the
command line always wins over the same key in the config file; keys that the
subcommand does not know are rejected.

Exit status: 0 on success, 2 on a usage error (one line naming the key), 1
on a runtime failure such as file I/O or a refused computation.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import discrepancy as disc
from . import kernels
from .experiments import EXPERIMENTS, ExperimentConfig, report_csv, write_report
from .geometry import TorusPointSet, UsageError, write_points_csv
from .numtheory import lemma22_ratio, parse_alpha
from .paircorr import CSV_COLUMNS as PPC_COLUMNS
from .paircorr import PairCorrQuery, pair_corr
from .sequences import generate, parse_spec, prefix, spec_dim


class CliUsageError(Exception):
    """Bad flag, config key or value; maps to exit status 2."""


# ---------------------------------------------------------------- converters


def _err(key, msg):
    return CliUsageError(f"{key}: {msg}")


def _to_int(key, text):
    try:
        v = float(text) if any(c in text for c in ".eE") else int(text)
    except ValueError:
        raise _err(key, f"expected an integer, got {text!r}") from None
    if isinstance(v, float):
        if not v.is_integer():
            raise _err(key, f"expected an integer, got {text!r}")
        v = int(v)
    return v


def _to_float(key, text):
    try:
        v = float(text)
    except ValueError:
        raise _err(key, f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise _err(key, f"expected a finite number, got {text!r}")
    return v


def _beta(key, text):
    # accept fractions such as 1/2
    if "/" in text:
        num, _, den = text.partition("/")
        return _to_float(key, num) / _to_float(key, den)
    return _to_float(key, text)


def _int_list(key, text):
    """Comma list of integers; ``a..b`` expands to an inclusive range."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ".." in part:
            lo, _, hi = part.partition("..")
            out.extend(range(_to_int(key, lo), _to_int(key, hi) + 1))
        else:
            out.append(_to_int(key, part))
    if not out:
        raise _err(key, "empty list")
    return out


def _float_list(key, text):
    out = [_beta(key, p.strip()) for p in text.split(",") if p.strip()]
    if not out:
        raise _err(key, "empty list")
    return out


def _spec(key, text):
    try:
        return parse_spec(text)
    except (UsageError, ValueError) as exc:
        raise _err(key, str(exc)) from None


def _str(key, text):
    return text


# ---------------------------------------------------------------- options

# name -> (converter, help)
_OPTIONS = {
    "spec": (_spec, "sequence spec, e.g. kronecker:golden or perturbed:golden:eps=0.1:seed=42"),
    "n": (_to_int, "number of points"),
    "beta": (_beta, "scaling exponent (default 1/d); fractions like 1/2 accepted"),
    "betas": (_float_list, "comma list of exponents for the beta sweep"),
    "s": (_float_list, "comma list of s values"),
    "method": (_str, "pair counting method: naive, grid or auto"),
    "seeds": (_int_list, "comma list of seeds; a..b expands to a range"),
    "ladder": (_int_list, "comma list of increasing N values"),
    "tolerance": (_to_float, "relative tolerance for pass/fail checks"),
    "out": (_str, "output path (stdout when omitted)"),
    "mode": (_str, "discrepancy mode"),
    "m": (_to_int, "frequency cutoff of the KET monitor"),
    "c_d": (_to_float, "KET constant (default 4*3^(d-1))"),
    "lemma": (_str, "kernel to evaluate"),
    "x": (_float_list, "argument(s); a comma list is a point for 'density'"),
    "r": (_int_list, "frequency or frequencies"),
    "rp": (_int_list, "second frequency r' (list or a..b range)"),
    "eps": (_float_list, "perturbation size(s)"),
    "case": (_str, "overlap case, e.g. 'k=m;l!=n' or 'distinct' (all cases when omitted)"),
    "alpha": (_str, "alpha preset or comma list of decimals"),
    "delta": (_to_float, "exponent delta"),
    "c": (_to_float, "constant C in the bound C*N^(1+delta)"),
    "sigma": (_float_list, "comma list of sigma values in [0, 1)"),
    "r_max": (_to_int, "truncation point of the series"),
    "experiment": (_str, "ppc, expectation, variance or beta"),
    "threads": (_to_int, "worker threads (fallback: PPCLAB_THREADS)"),
}

_COMMANDS = {
    "generate": ("write the first n points of a sequence as point CSV", ("spec", "n", "out")),
    "ppc": ("pair correlation F at each s", ("spec", "n", "beta", "s", "method", "out")),
    "disc": ("discrepancy of the first n points, or along a ladder", ("spec", "n", "ladder", "mode", "m", "c_d", "out")),
    "kernel": (
        "closed-form kernels and bound checks",
        ("lemma", "x", "r", "rp", "eps", "case", "alpha", "n", "delta", "c", "sigma", "r_max", "out"),
    ),
    "experiment": (
        "seeded Monte Carlo experiment with report, summary and metadata files",
        ("experiment", "spec", "ladder", "s", "beta", "betas", "seeds", "tolerance", "method", "out"),
    ),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message.splitlines()[0])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ppclab", description="Pair correlation lab on the unit torus.", allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, (help_text, keys) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, allow_abbrev=False)
        p.add_argument("--config", metavar="FILE", help="key=value config file; flags win")
        for key in keys + ("threads",):
            flag = "--" + key.replace("_", "-")
            aliases = [flag, "--" + key] if "_" in key else [flag]
            p.add_argument(*aliases, dest=key, default=None, metavar=key.upper(), help=_OPTIONS[key][1])
    return parser


def read_config(path) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower().replace("-", "_")
        if not sep or not key:
            raise CliUsageError(f"config line {lineno}: expected key=value")
        if key in out:
            raise _err(key, f"repeated in config (line {lineno})")
        out[key] = value.strip()
    return out


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Merge config and flags for ``command`` and convert every value."""
    keys = _COMMANDS[command][1] + ("threads",)
    raw = {}
    if ns.config is not None:
        cfg = read_config(ns.config)
        for key, value in cfg.items():
            if key not in keys:
                raise _err(key, f"unknown config key for '{command}'")
            raw[key] = value
    for key in keys:
        value = getattr(ns, key)
        if value is not None:
            raw[key] = value
    if "threads" not in raw and os.environ.get("PPCLAB_THREADS"):
        raw["threads"] = os.environ["PPCLAB_THREADS"]
    vals = {key: None for key in keys}
    for key, text in raw.items():
        if key in ("spec", "out") or text != "":
            vals[key] = _OPTIONS[key][0](key, text)
    if vals["threads"] is None:
        vals["threads"] = 1
    elif vals["threads"] < 1:
        raise _err("threads", "must be >= 1")
    return vals


# ---------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def _need(vals, *keys):
    for key in keys:
        if vals[key] is None:
            raise _err(key, "required")


def _single(vals, key):
    v = vals[key]
    if v is not None and len(v) != 1:
        raise _err(key, "expects a single value here")
    return None if v is None else v[0]


# ---------------------------------------------------------------- commands


def cmd_generate(vals) -> int:
    _need(vals, "spec", "n")
    if vals["n"] < 1:
        raise _err("n", "must be >= 1")
    pts = generate(vals["spec"], vals["n"])
    if vals["out"]:
        write_points_csv(pts, vals["out"])
    else:
        buf = io.StringIO()
        buf.write(f"dim={pts.dim}\n")
        for row in pts.coords:
            buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        sys.stdout.write(buf.getvalue())
    return 0


def cmd_ppc(vals) -> int:
    _need(vals, "spec", "n", "s")
    N = vals["n"]
    if N < 2:
        raise _err("n", f"pair correlation needs n >= 2, got {N}")
    d = spec_dim(vals["spec"])
    beta = 1.0 / d if vals["beta"] is None else vals["beta"]
    if not 0.0 <= beta <= 1.0 / d + 1e-12:
        raise _err("beta", f"must lie in [0, 1/d] with d={d}, got {beta}")
    s = vals["s"]
    if any(v <= 0 for v in s) or s != sorted(s):
        raise _err("s", "values must be positive and ascending")
    method = vals["method"] or "auto"
    if method not in ("naive", "grid", "auto"):
        raise _err("method", f"unknown method {method!r}")
    query = PairCorrQuery(beta, tuple(s), method)
    res = pair_corr(generate(vals["spec"], N), query)
    _emit(_csv(PPC_COLUMNS, res.rows()), vals["out"])
    return 0


_DISC_MODES = ("exact1d_star", "exact1d_extreme", "brute", "brute_star", "ket_bound")


def _disc_one(pts: TorusPointSet, mode: str, m, C_d):
    if mode == "exact1d_star":
        return disc.star_disc_1d(pts)
    if mode == "exact1d_extreme":
        return disc.extreme_disc_1d(pts)
    if mode == "brute":
        return disc.brute_disc(pts, anchored=False)
    if mode == "brute_star":
        return disc.brute_disc(pts, anchored=True)
    return disc.ket_bound(pts, m, C_d)


def cmd_disc(vals) -> int:
    _need(vals, "spec")
    if (vals["n"] is None) == (vals["ladder"] is None):
        raise _err("n", "give exactly one of n or ladder")
    rungs = [vals["n"]] if vals["ladder"] is None else vals["ladder"]
    key = "n" if vals["ladder"] is None else "ladder"
    if any(r < 1 for r in rungs) or any(b <= a for a, b in zip(rungs, rungs[1:])):
        raise _err(key, "values must be >= 1 and increasing")
    d = spec_dim(vals["spec"])
    mode = vals["mode"] or ("exact1d_extreme" if d == 1 else "ket_bound")
    if mode not in _DISC_MODES:
        raise _err("mode", f"choose from {', '.join(_DISC_MODES)}")
    if mode.startswith("exact1d") and d != 1:
        raise _err("mode", f"{mode} needs d = 1, spec has d = {d}")
    m = 32 if vals["m"] is None else vals["m"]
    if m < 1:
        raise _err("m", "must be >= 1")
    full = generate(vals["spec"], rungs[-1])
    rows = [_disc_one(prefix(full, n), mode, m, vals["c_d"]).row() for n in rungs]
    _emit(_csv(disc.CSV_COLUMNS, rows), vals["out"])
    return 0


_LEMMAS = ("sinc", "lemma21", "remark22", "density", "lemma22", "lemma23", "lemma24")


def _kernel_rows(vals):
    lemma = vals["lemma"]
    if lemma == "sinc":
        _need(vals, "x")
        return [("sinc", x, None, None, kernels.sinc_pi(x), None, None, None) for x in vals["x"]]
    if lemma == "density":
        _need(vals, "x", "eps")
        eps = _single(vals, "eps")
        if eps <= 0:
            raise _err("eps", "must be > 0")
        x = vals["x"]
        label = ";".join(_fmt(v) for v in x)
        return [("density", label, eps, None, kernels.triangular_density(x, eps), None, None, None)]
    if lemma == "remark22":
        _need(vals, "r", "eps")
        if 0 in vals["r"]:
            raise _err("r", "must be nonzero")
        return [
            ("remark22", r, e, None, kernels.remark22_expectation(r, e), None, None, None)
            for e in vals["eps"]
            for r in vals["r"]
        ]
    if lemma == "lemma21":
        _need(vals, "r", "rp", "eps")
        if 0 in vals["r"]:
            raise _err("r", "must be nonzero")
        if 0 in vals["rp"]:
            raise _err("rp", "must be nonzero")
        if any(e <= 0 for e in vals["eps"]):
            raise _err("eps", "must be > 0")
        try:
            cases = list(kernels.OverlapCase) if vals["case"] is None else [kernels.OverlapCase.parse(vals["case"])]
        except UsageError as exc:
            raise _err("case", str(exc)) from None
        return [
            (f"lemma21:{c.value}", r, e, rp, kernels.lemma21_expectation(r, rp, e, c), None, None, None)
            for c in cases
            for e in vals["eps"]
            for r in vals["r"]
            for rp in vals["rp"]
        ]
    if lemma == "lemma22":
        _need(vals, "alpha", "r", "n", "delta")
        alpha = _alpha(vals["alpha"])
        r = vals["r"]
        if len(r) != alpha.dim or min(r) < 1:
            raise _err("r", f"needs {alpha.dim} positive component(s)")
        ratio = lemma22_ratio(alpha, r, vals["n"], vals["delta"])
        label = ";".join(map(str, r))
        return [(f"lemma22:{alpha.name}", label, vals["delta"], vals["n"], ratio, None, None, None)]
    if lemma == "lemma23":
        _need(vals, "alpha", "n", "eps")
        alpha = _alpha(vals["alpha"])
        if alpha.dim != 1:
            raise _err("alpha", "lemma23 needs a one-dimensional alpha")
        eps = _single(vals, "eps")
        if eps <= 0:
            raise _err("eps", "must be > 0")
        R = 10**5 if vals["r_max"] is None else vals["r_max"]
        if R < 1:
            raise _err("r_max", "must be >= 1")
        delta = 0.5 if vals["delta"] is None else vals["delta"]
        C = 1.0 if vals["c"] is None else vals["c"]
        res = kernels.lemma23_lhs(alpha, eps, vals["n"], R, C=C, delta=delta)
        return [("lemma23", alpha.name, eps, vals["n"], res.lhs, res.rhs, res.tail, res.satisfied)]
    if lemma == "lemma24":
        _need(vals, "rp", "sigma")
        rps = vals["rp"]
        if 0 in rps:
            raise _err("rp", "must be nonzero")
        sig = vals["sigma"]
        if any(not 0.0 <= s < 1.0 for s in sig):
            raise _err("sigma", "values must lie in [0, 1)")
        R = 10**6 if vals["r_max"] is None else vals["r_max"]
        if R < 4 * max(abs(v) for v in rps):
            raise _err("r_max", "must be >= 4 |rp|")
        res = kernels.lemma24_grid(rps, sig, R)
        return [("lemma24", b.params["sigma"], R, b.params["rp"], b.lhs, b.rhs, b.tail, b.satisfied) for b in res]
    raise _err("lemma", f"choose from {', '.join(_LEMMAS)}")


def _alpha(text):
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return parse_alpha(text)
    except (UsageError, ValueError) as exc:
        raise _err("alpha", str(exc)) from None


def cmd_kernel(vals) -> int:
    _need(vals, "lemma")
    if vals["lemma"] in ("lemma22", "lemma23") and vals["n"] is not None and vals["n"] < 1:
        raise _err("n", "must be >= 1")
    rows = _kernel_rows(vals)
    _emit(_csv(kernels.CSV_COLUMNS, rows), vals["out"])
    return 0


def cmd_experiment(vals) -> int:
    _need(vals, "experiment", "spec")
    name = vals["experiment"]
    if name not in EXPERIMENTS:
        raise _err("experiment", f"choose from {', '.join(EXPERIMENTS)}")
    kwargs = {}
    if vals["ladder"] is not None:
        kwargs["N_ladder"] = tuple(vals["ladder"])
    if vals["s"] is not None:
        kwargs["s_values"] = tuple(vals["s"])
    for key, field in (("beta", "beta"), ("tolerance", "tolerance"), ("out", "out")):
        if vals[key] is not None:
            kwargs[field] = vals[key]
    if vals["betas"] is not None:
        kwargs["betas"] = tuple(vals["betas"])
    if vals["seeds"] is not None:
        kwargs["seeds"] = tuple(vals["seeds"])
    if vals["method"] is not None:
        if vals["method"] not in ("naive", "grid", "auto"):
            raise _err("method", f"unknown method {vals['method']!r}")
        kwargs["method"] = vals["method"]
    try:
        cfg = ExperimentConfig(vals["spec"], threads=vals["threads"], **kwargs)
    except UsageError as exc:
        raise CliUsageError(str(exc)) from None
    d = cfg.dim
    if cfg.beta is not None and not 0.0 <= cfg.beta <= 1.0 / d + 1e-12:
        raise _err("beta", f"must lie in [0, 1/d] with d={d}")
    rep = EXPERIMENTS[name](cfg)
    if vals["out"]:
        write_report(rep, vals["out"])
    else:
        sys.stdout.write(report_csv(rep))
    return 0


_HANDLERS = {
    "generate": cmd_generate,
    "ppc": cmd_ppc,
    "disc": cmd_disc,
    "kernel": cmd_kernel,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            raise CliUsageError("a subcommand is required: " + ", ".join(_COMMANDS))
        vals = resolve(ns.command, ns)
    except CliUsageError as exc:
        print(f"ppclab: usage error: {exc}", file=sys.stderr)
        return 2
    except (OSError, UnicodeDecodeError) as exc:
        print(f"ppclab: error: cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        return _HANDLERS[ns.command](vals)
    except CliUsageError as exc:
        print(f"ppclab: usage error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, OSError, ValueError, ArithmeticError, MemoryError) as exc:
        print(f"ppclab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
