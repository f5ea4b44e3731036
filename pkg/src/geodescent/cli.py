"""Command-line interface.

Subcommands:
  run       single method on a single problem; writes a trace CSV and SVG
  bench     full sweep from a config file; writes report CSV/SVG and traces
  verify    invariant suites (rates, lemma sampling, gradient checks)
  gen-data  synthetic classification data to a LIBSVM file

Exit codes: 0 success, 1 configuration error, 2 runtime error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import bench as bench_mod
from .bench import (
    DEFAULT_EPSILONS,
    ErmSpec,
    QuadraticSpec,
    RunConfig,
    WorstCaseSpec,
    emit_csv,
    emit_svg,
    iterations_to_accuracy,
    load_config,
    run_bench,
)
from .dataio import load_libsvm, save_libsvm, synthetic_classification
from .errors import ConfigError, GeodescentError
from .objectives import quadratic_oracle, smoothed_hinge_erm_oracle, worst_case_oracle
from .optimizers import (
    StoppingRule,
    run_afg,
    run_afg_restart,
    run_geo_suboptimal,
    run_geod,
    run_geod_theory,
    run_steepest_descent,
)
from .verify import run_all


def _build_parser():
    parser = argparse.ArgumentParser(prog="geodescent", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one method on one problem")
    run_p.add_argument("--problem", choices=("quadratic", "worst_case", "erm"),
                       default="quadratic")
    run_p.add_argument("--method", choices=bench_mod.METHODS, default="geod")
    run_p.add_argument("--n", type=int, default=50, help="problem dimension")
    run_p.add_argument("--kappa", type=float, default=100.0, help="quadratic condition number")
    run_p.add_argument("--beta", type=float, default=100.0, help="worst-case chain weight")
    run_p.add_argument("--alpha", type=float, default=None,
                       help="override the strong-convexity modulus")
    run_p.add_argument("--dataset", default=None, help="LIBSVM file for erm (default synthetic)")
    run_p.add_argument("--lambda", dest="lam", type=float, default=1e-4,
                       help="erm regularization coefficient")
    run_p.add_argument("--max-iters", type=int, default=None)
    run_p.add_argument("--grad-tol", type=float, default=None)
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", default="out")
    run_p.add_argument("--epsilons", default=None,
                       help="comma-separated accuracy targets for the summary table")

    bench_p = sub.add_parser("bench", help="full sweep from a config file")
    bench_p.add_argument("--config", required=True)
    bench_p.add_argument("--out", default=None, help="override the config output directory")
    bench_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    bench_p.add_argument("--workers", type=int, default=None)

    verify_p = sub.add_parser("verify", help="run the invariant suites")
    verify_p.add_argument("--seed", type=int, default=0)

    gen_p = sub.add_parser("gen-data", help="write synthetic data as LIBSVM text")
    gen_p.add_argument("--n-samples", type=int, default=200)
    gen_p.add_argument("--n-features", type=int, default=50)
    gen_p.add_argument("--separation", type=float, default=2.0)
    gen_p.add_argument("--density", type=float, default=0.2)
    gen_p.add_argument("--seed", type=int, default=0)
    gen_p.add_argument("--out", required=True)
    return parser


def _cmd_run(args):
    rng = np.random.default_rng(args.seed)
    if args.problem == "quadratic":
        eigs = np.geomspace(1.0, args.kappa, args.n)
        oracle = quadratic_oracle(eigs, rng.standard_normal(args.n))
        x0 = rng.standard_normal(args.n)
    elif args.problem == "worst_case":
        oracle = worst_case_oracle(args.n, args.beta)
        x0 = np.zeros(args.n)
    else:
        if args.dataset is not None:
            data = load_libsvm(args.dataset)
        else:
            data = synthetic_classification(200, args.n, seed=args.seed)
        oracle = smoothed_hinge_erm_oracle(data, args.lam)
        x0 = np.zeros(oracle.dimension)
    if args.alpha is not None:
        oracle.alpha = args.alpha

    stop = StoppingRule(max_iters=args.max_iters, grad_tol=args.grad_tol)
    method = args.method
    if method == "geod":
        trace = run_geod(oracle, x0, stop)
    elif method == "geod_theory":
        trace = run_geod_theory(oracle, x0, stop)
    elif method == "geo_subopt":
        if oracle.x_star is not None:
            r0_sq = 1.5 * float(np.sum((oracle.x_star - x0) ** 2))
        else:
            r0_sq = 2.02 * oracle.value(x0) / oracle.alpha
        trace = run_geo_suboptimal(oracle, x0, r0_sq, stop)
    elif method == "sd":
        trace = run_steepest_descent(oracle, x0, stop)
    elif method == "afg":
        trace = run_afg(oracle, x0, kappa_hint=oracle.beta_estimate() / oracle.alpha, stop=stop)
    else:
        trace = run_afg_restart(oracle, x0, kappa_hint=oracle.beta_estimate() / oracle.alpha,
                                stop=stop)

    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{args.problem}_{method}_trace.csv")
    svg_path = os.path.join(args.out, f"{args.problem}_{method}_trace.svg")
    emit_csv(trace, csv_path)
    emit_svg(trace, svg_path)
    print(f"{method} on {args.problem}: {trace.k[-1]} iterations, "
          f"final f = {trace.final_f:.12g}, stop reason: {trace.stop_reason}")
    print(f"trace written to {csv_path} and {svg_path}")

    if oracle.f_star is not None:
        eps = (tuple(float(t) for t in args.epsilons.split(","))
               if args.epsilons else DEFAULT_EPSILONS)
        eps = tuple(sorted(set(eps), reverse=True))
        print("iterations to accuracy (relative to the known optimum):")
        for e, k in iterations_to_accuracy(trace, oracle.f_star, eps):
            shown = "censored" if math.isinf(k) else int(k)
            print(f"  eps={e:g}: {shown}")
    return 0


def _cmd_bench(args):
    config = load_config(args.config)
    if args.out is not None:
        config.out_dir = args.out
    if args.seed is not None:
        config.seed = args.seed
    if args.workers is not None:
        config.workers = args.workers
    if config.out_dir is None:
        config.out_dir = "bench_out"
    report = run_bench(config)
    print(f"bench complete: {len(report.runs)} runs; outputs in {config.out_dir}")
    for method, eps, med, p90 in report.summary:
        med_s = "censored" if math.isinf(med) else f"{med:g}"
        p90_s = "censored" if math.isinf(p90) else f"{p90:g}"
        print(f"  {method:12s} eps={eps:g}: median {med_s}, p90 {p90_s}")
    return 0


def _cmd_verify(args):
    results = run_all(seed=args.seed)
    failed = False
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed = failed or not ok
    return 3 if failed else 0


def _cmd_gen_data(args):
    ds = synthetic_classification(args.n_samples, args.n_features,
                                  separation=args.separation, density=args.density,
                                  seed=args.seed)
    save_libsvm(ds, args.out)
    print(f"wrote {ds.n_samples} samples x {ds.n_features} features to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_gen_data(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except GeodescentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def entry():
    sys.exit(main())
