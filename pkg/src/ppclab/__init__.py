"""Pair correlation statistics for deterministic and randomly perturbed sequences on the torus."""

from .discrepancy import (
    DiscrepancyResult,
    brute_disc,
    extreme_disc_1d,
    ket_bound,
    low_disc_scaling,
    star_disc_1d,
)
from .experiments import (
    ExperimentConfig,
    ExperimentReport,
    expected_pair_corr,
    run_beta_sweep,
    run_expectation_check,
    run_ppc_convergence,
    run_variance_decay,
    write_report,
)
from .geometry import RandomSource, TorusPointSet, UsageError, read_points_csv, torus_dist_sup, write_points_csv
from .kernels import (
    BoundCheckResult,
    OverlapCase,
    classify_overlap,
    lemma21_expectation,
    lemma23_lhs,
    lemma24_check,
    remark22_expectation,
    sinc_pi,
    triangular_density,
)
from .numtheory import (
    AlphaVector,
    ContinuedFraction,
    PrecisionError,
    alpha_preset,
    badness_profile,
    cf_expand,
    geometric_exp_sum,
    lemma22_ratio,
    weyl_sum,
)
from .paircorr import PairCorrQuery, PairCorrResult, pair_corr, pair_corr_naive
from .sequences import (
    Halton,
    IIDUniform,
    Kronecker,
    Perturbed,
    VanDerCorput,
    FilePoints,
    generate,
    parse_spec,
    perturbed_kronecker,
    prefix,
)

__version__ = "0.1.0"
