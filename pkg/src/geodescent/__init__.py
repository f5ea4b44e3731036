"""Geometric descent: accelerated smooth strongly convex minimization via
two-ball minimum-enclosing-ball updates, with baselines and a benchmark
harness."""

from .geometry import Ball, contains, lemma_shrink_ball, min_enclosing_ball, sample_intersection
from .linesearch import LineRestriction, LineSearchResult, exact_line_search, ls_point
from .objectives import (
    GradientResult,
    Oracle,
    OracleSpec,
    grad_step,
    quadratic_oracle,
    smoothed_hinge,
    smoothed_hinge_erm_oracle,
    smoothed_hinge_prime,
    strong_convexity_ball,
    worst_case_oracle,
)
from .optimizers import (
    IterationTrace,
    StoppingRule,
    run_afg,
    run_afg_restart,
    run_geo_suboptimal,
    run_geod,
    run_geod_theory,
    run_steepest_descent,
)
from .dataio import (
    SparseDataset,
    load_libsvm,
    parse_libsvm,
    save_libsvm,
    serialize_libsvm,
    synthetic_classification,
)
from .bench import (
    BenchReport,
    RunConfig,
    aggregate_percentiles,
    emit_csv,
    emit_svg,
    iterations_to_accuracy,
    load_config,
    parse_config,
    run_bench,
)

__version__ = "0.1.0"
