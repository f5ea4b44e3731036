"""Benchmark harness: method x problem x hyperparameter sweeps, iterations to
accuracy, percentile aggregation, CSV and SVG emission.

A sweep is described by a RunConfig (parseable from a flat key=value file).
For each problem variant every method runs on a fresh oracle; the accelerated
baselines get their momentum parameter tuned over powers of two of the
strong-convexity estimate when the smoothness constant is itself an estimate.
Iterations-to-accuracy uses the relative criterion
f(k) - f_ref <= eps * (1 + |f_ref|); runs that never reach a target are
censored and sort as +inf in percentile aggregation (linear interpolation
between order statistics, the numpy convention).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .dataio import load_libsvm, synthetic_classification
from .errors import BadReference, ConfigError, EmptyResults, InvalidParameter
from .objectives import quadratic_oracle, smoothed_hinge_erm_oracle, worst_case_oracle
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
from .svgplot import Panel, write_svg

METHODS = ("geod", "geod_theory", "geo_subopt", "sd", "afg", "afg_restart")

# Documented worst-case sparse products per iteration on ERM problems, with
# margin caching active (GeoD: one gradient plus two line-restriction setups).
MATVEC_BUDGET = {
    "geod": 3,
    "geod_theory": 5,
    "geo_subopt": 3,
    "sd": 3,
    "afg": 3,
    "afg_restart": 6,  # a restarted iteration redoes the step from x_k
}

DEFAULT_EPSILONS = tuple(10.0 ** -k for k in range(2, 11))
CENSORED_TOKEN = "censored"


@dataclass
class QuadraticSpec:
    n: int = 20
    kappa: float = 100.0


@dataclass
class WorstCaseSpec:
    n: int = 200
    betas: tuple = (1e2, 1e4)


@dataclass
class ErmSpec:
    dataset: Optional[str] = None  # LIBSVM path; None means synthetic
    lambdas: tuple = (1e-4, 1e-6, 1e-8)
    n_datasets: int = 1
    n_samples: int = 120
    n_features: int = 40
    density: float = 0.25
    separation: float = 1.5


@dataclass
class TuningSpec:
    policy: str = "auto"  # auto | always | off
    min_exp: int = -20
    max_exp: int = 4
    max_iters: Optional[int] = None  # budget for tuning runs; None = main budget


@dataclass
class RunConfig:
    problem: object
    methods: tuple = ("geod", "sd", "afg", "afg_restart")
    stop: StoppingRule = field(default_factory=StoppingRule)
    tuning: TuningSpec = field(default_factory=TuningSpec)
    epsilons: tuple = DEFAULT_EPSILONS
    seed: int = 0
    out_dir: Optional[str] = None
    workers: int = 4


@dataclass
class RunResult:
    problem: str
    variant: str
    method: str
    iterations: list  # [(eps, k or inf), ...]
    best_param: Optional[float]  # tuned alpha estimate, None when not tuned
    f_star_ref: float
    trace: IterationTrace


@dataclass
class BenchReport:
    epsilons: tuple
    runs: list
    summary: list  # [(method, eps, median, p90)], deterministic order
    seed: int
    config_echo: str = ""


def iterations_to_accuracy(trace: IterationTrace, f_star_ref, epsilons):
    """Smallest k with f(k) - f_ref <= eps * (1 + |f_ref|) per eps; censored
    entries are math.inf."""
    epsilons = [float(e) for e in epsilons]
    if not epsilons or any(e <= 0.0 for e in epsilons):
        raise InvalidParameter("epsilons must be positive")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise InvalidParameter("epsilons must be strictly decreasing")
    f = trace.f_values
    f_star_ref = float(f_star_ref)
    f_min = float(f.min())
    if f_star_ref > f_min + 1e-9 * (1.0 + abs(f_min)):
        raise BadReference(f"f_star_ref={f_star_ref!r} exceeds trace minimum {f_min!r}")
    gaps = np.minimum.accumulate(f - f_star_ref)
    ks = np.asarray(trace.k)
    out = []
    for eps in epsilons:
        hit = np.nonzero(gaps <= eps * (1.0 + abs(f_star_ref)))[0]
        out.append((eps, float(ks[hit[0]]) if hit.size else math.inf))
    return out


def aggregate_percentiles(values, q):
    """Order statistic by linear interpolation on the sorted values; censored
    entries (inf) sort last, and a result touching them is censored (inf)."""
    values = [math.inf if v is None else float(v) for v in values]
    if not values:
        raise EmptyResults("no values to aggregate")
    if not 0.0 < q < 1.0:
        raise InvalidParameter(f"q must lie in (0, 1), got {q}")
    s = sorted(values)
    pos = q * (len(s) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    frac = pos - lo
    if frac == 0.0:
        return s[lo]
    if math.isinf(s[hi]):
        return math.inf
    return s[lo] + frac * (s[hi] - s[lo])


@dataclass
class ProblemVariant:
    problem: str
    variant: str
    make_oracle: Callable
    x0: np.ndarray
    f_star: Optional[float]
    r0_sq: Optional[float]  # guarantee for geo_subopt


def _variants(config: RunConfig):
    spec = config.problem
    out = []
    if isinstance(spec, QuadraticSpec):
        rng = np.random.default_rng(config.seed)
        n, kappa = int(spec.n), float(spec.kappa)
        eigs = np.geomspace(1.0, kappa, n)
        b = rng.standard_normal(n)
        x0 = rng.standard_normal(n)
        probe = quadratic_oracle(eigs, b)
        out.append(ProblemVariant(
            "quadratic", f"kappa={kappa:g}",
            lambda eigs=eigs, b=b: quadratic_oracle(eigs, b),
            x0, probe.f_star,
            1.5 * float(np.sum((probe.x_star - x0) ** 2))))
    elif isinstance(spec, WorstCaseSpec):
        for beta in spec.betas:
            probe = worst_case_oracle(spec.n, beta)
            x0 = np.zeros(spec.n)
            out.append(ProblemVariant(
                "worst_case", f"beta={float(beta):g}",
                lambda n=spec.n, beta=beta: worst_case_oracle(n, beta),
                x0, probe.f_star,
                1.5 * float(np.sum(probe.x_star ** 2))))
    elif isinstance(spec, ErmSpec):
        datasets = []
        if spec.dataset is not None:
            datasets.append(("file", load_libsvm(spec.dataset)))
        else:
            for i in range(int(spec.n_datasets)):
                ds = synthetic_classification(
                    spec.n_samples, spec.n_features, separation=spec.separation,
                    density=spec.density, seed=config.seed + 1009 * i)
                datasets.append((f"ds{i}", ds))
        for name, ds in datasets:
            for lam in spec.lambdas:
                lam = float(lam)
                if lam <= 0.0:
                    raise ConfigError(f"lambda must be > 0, got {lam}")
                x0 = np.zeros(ds.n_features)
                # |x*|^2 <= 2 f(0) / lam since the regularizer is below f.
                probe = smoothed_hinge_erm_oracle(ds, lam)
                r0_sq = 2.0 * probe.value(x0) / lam * 1.01
                out.append(ProblemVariant(
                    "erm", f"{name},lam={lam:g}",
                    lambda ds=ds, lam=lam: smoothed_hinge_erm_oracle(ds, lam),
                    x0, None, r0_sq))
    else:
        raise ConfigError(f"unknown problem spec {type(spec).__name__}")
    return out


def _needs_tuning(policy, oracle):
    if policy == "always":
        return True
    if policy == "off":
        return False
    if policy == "auto":
        return oracle.beta is None
    raise ConfigError(f"unknown tuning policy {policy!r}")


def _tune_kappa_hint(config, variant, method, beta_hat):
    """Pick the alpha estimate among beta_hat * 2^e by best achieved value
    within the tuning budget; returns (kappa_hint, alpha_hat)."""
    t = config.tuning
    budget = t.max_iters if t.max_iters is not None else config.stop.max_iters
    stop = StoppingRule(max_iters=budget, grad_tol=config.stop.grad_tol,
                        target_value=config.stop.target_value)
    best = None
    seen = set()
    for e in range(int(t.min_exp), int(t.max_exp) + 1):
        alpha_hat = beta_hat * 2.0**e
        kappa_hint = max(beta_hat / alpha_hat, 1.0)
        if kappa_hint in seen:
            continue
        seen.add(kappa_hint)
        oracle = variant.make_oracle()
        if method == "afg":
            trace = run_afg(oracle, variant.x0, kappa_hint, stop, beta=beta_hat)
        else:
            trace = run_afg_restart(oracle, variant.x0, kappa_hint, stop)
        f = trace.f_values
        best_idx = int(np.argmin(f))
        score = (float(f[best_idx]), best_idx, e)
        if best is None or score < best[0]:
            best = (score, kappa_hint, alpha_hat)
    return best[1], best[2]


def _run_one(config, variant: ProblemVariant, method):
    oracle = variant.make_oracle()
    stop = config.stop
    best_param = None
    if method == "geod":
        trace = run_geod(oracle, variant.x0, stop)
    elif method == "geod_theory":
        trace = run_geod_theory(oracle, variant.x0, stop)
    elif method == "geo_subopt":
        trace = run_geo_suboptimal(oracle, variant.x0, variant.r0_sq, stop)
    elif method == "sd":
        trace = run_steepest_descent(oracle, variant.x0, stop)
    elif method in ("afg", "afg_restart"):
        beta_hat = oracle.beta_estimate()
        if _needs_tuning(config.tuning.policy, oracle):
            kappa_hint, best_param = _tune_kappa_hint(config, variant, method, beta_hat)
        else:
            kappa_hint = oracle.beta / oracle.alpha
        if method == "afg":
            trace = run_afg(oracle, variant.x0, kappa_hint, stop, beta=beta_hat)
        else:
            trace = run_afg_restart(oracle, variant.x0, kappa_hint, stop)
    else:
        raise ConfigError(f"unknown method {method!r}")
    return trace, best_param


def _reference_f(config, variant: ProblemVariant, run_minima):
    """Closed form where available, else a 10x-length high-accuracy geod run;
    the best value seen anywhere wins."""
    if variant.f_star is not None:
        return variant.f_star
    oracle = variant.make_oracle()
    base_iters = config.stop.max_iters if config.stop.max_iters is not None \
        else 10 * oracle.dimension + 1000
    ref_stop = StoppingRule(max_iters=10 * base_iters, grad_tol=1e-14)
    ref = run_geod(oracle, variant.x0, ref_stop)
    return min(float(ref.f_values.min()), *run_minima)


def _verify_censoring(variant, trace, result_rows, f_ref):
    """Re-evaluate f at each recorded iterate that claims an accuracy."""
    oracle = variant.make_oracle()
    ks = list(trace.k)
    for eps, k in result_rows:
        if math.isinf(k):
            continue
        idx = ks.index(int(k))
        f_check = oracle.value(trace.points[idx])
        if f_check - f_ref > eps * (1.0 + abs(f_ref)) * (1.0 + 1e-9) + 1e-12:
            raise BadReference(
                f"{variant.variant}/{trace.method}: recorded iterate at k={k} "
                f"re-evaluates to {f_check!r}, above the eps={eps:g} target")


def validate_config(config: RunConfig):
    if not config.methods:
        raise ConfigError("methods list is empty")
    for m in config.methods:
        if m not in METHODS:
            raise ConfigError(f"unknown method {m!r}; valid: {', '.join(METHODS)}")
    eps = [float(e) for e in config.epsilons]
    if not eps or any(e <= 0.0 for e in eps):
        raise ConfigError("epsilons must be positive")
    config.epsilons = tuple(sorted(set(eps), reverse=True))
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    if isinstance(config.problem, ErmSpec) and config.problem.dataset is not None:
        if not os.path.exists(config.problem.dataset):
            raise ConfigError(f"dataset file not found: {config.problem.dataset}")
    return config


def run_bench(config: RunConfig) -> BenchReport:
    validate_config(config)
    variants = _variants(config)
    jobs = [(variant, method) for variant in variants for method in config.methods]

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        traces = list(pool.map(lambda vm: _run_one(config, vm[0], vm[1]), jobs))

    runs = []
    by_variant = {}
    for (variant, method), (trace, best_param) in zip(jobs, traces):
        by_variant.setdefault(variant.variant, []).append((variant, method, trace, best_param))

    for variant_label in sorted(by_variant):
        group = by_variant[variant_label]
        variant = group[0][0]
        minima = [float(t.f_values.min()) for _, _, t, _ in group]
        f_ref = _reference_f(config, variant, minima)
        for variant, method, trace, best_param in group:
            rows = iterations_to_accuracy(trace, f_ref, config.epsilons)
            _verify_censoring(variant, trace, rows, f_ref)
            runs.append(RunResult(variant.problem, variant.variant, method,
                                  rows, best_param, f_ref, trace))

    runs.sort(key=lambda r: (r.problem, r.variant, r.method))
    summary = []
    for method in config.methods:
        for eps in config.epsilons:
            vals = [k for r in runs if r.method == method
                    for e, k in r.iterations if e == eps]
            if not vals:
                continue
            med = aggregate_percentiles(vals, 0.5)
            p90 = aggregate_percentiles(vals, 0.9)
            summary.append((method, eps, med, p90))

    report = BenchReport(config.epsilons, runs, summary, config.seed)
    if config.out_dir is not None:
        _write_outputs(config, report)
    return report


def _fmt_iter(k):
    if math.isinf(k):
        return CENSORED_TOKEN
    return repr(int(k)) if float(k).is_integer() else repr(float(k))


def trace_csv(trace: IterationTrace) -> str:
    lines = ["k,f_at_x_plus,grad_norm,radius_sq,oracle_calls,grad_evals,ls_count,ls_probes,matvecs"]
    for i in range(len(trace)):
        r2 = trace.radius_sq[i]
        lines.append(",".join([
            str(trace.k[i]), repr(trace.f_at_x_plus[i]), repr(trace.grad_norm[i]),
            "" if math.isnan(r2) else repr(r2),
            str(trace.oracle_calls[i]), str(trace.grad_evals[i]),
            str(trace.ls_count[i]), str(trace.ls_probes[i]), str(trace.matvecs[i]),
        ]))
    return "\n".join(lines) + "\n"


def report_csv(report: BenchReport) -> str:
    lines = [
        "# geodescent bench report",
        f"# seed: {report.seed}",
        "# percentile interpolation: linear between order statistics (numpy convention)",
        f"# runs that never reach a target are serialized as the token: {CENSORED_TOKEN}",
        "kind,problem,variant,method,epsilon,iterations,best_param,f_star_ref,median,p90",
    ]
    for r in report.runs:
        for eps, k in r.iterations:
            lines.append(",".join([
                "run", r.problem, r.variant, r.method, f"{eps:g}", _fmt_iter(k),
                "" if r.best_param is None else repr(r.best_param),
                repr(r.f_star_ref), "", "",
            ]))
    for method, eps, med, p90 in report.summary:
        lines.append(",".join([
            "summary", "", "", method, f"{eps:g}", "", "", "",
            _fmt_iter(med), _fmt_iter(p90),
        ]))
    return "\n".join(lines) + "\n"


def emit_csv(obj, path):
    text = trace_csv(obj) if isinstance(obj, IterationTrace) else report_csv(obj)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _trace_panel(title, labeled_traces, f_ref):
    panel = Panel(title, "iteration", "f - f_ref", ylog=True)
    for label, trace in labeled_traces:
        f = trace.f_values
        gap = np.maximum(f - f_ref, 1e-300)
        ks = np.asarray(trace.k, dtype=float)
        stride = max(1, len(ks) // 512)
        panel.add(label, ks[::stride], gap[::stride])
    return panel


def emit_svg(obj, path):
    """Report: iterations-vs-accuracy panels (median and 90th percentile).
    Trace: accuracy-vs-iteration, referenced to the trace minimum."""
    if isinstance(obj, IterationTrace):
        f_ref = float(obj.f_values.min())
        write_svg([_trace_panel(obj.method, [(obj.method, obj)], f_ref)], path)
        return
    report = obj
    panels = []
    for q, name in ((0.5, "median"), (0.9, "90th percentile")):
        panel = Panel(f"iterations to accuracy ({name})",
                      "target accuracy", "iterations", xlog=True, ylog=True)
        methods = sorted({m for m, _, _, _ in report.summary},
                         key=lambda m: config_method_order(m))
        for method in methods:
            xs, ys = [], []
            for m, eps, med, p90 in report.summary:
                if m != method:
                    continue
                stat = med if q == 0.5 else p90
                if not math.isinf(stat) and stat > 0.0:
                    xs.append(eps)
                    ys.append(stat)
            panel.add(method, xs, ys)
        panels.append(panel)
    write_svg(panels, path)


def config_method_order(method):
    return METHODS.index(method) if method in METHODS else len(METHODS)


def _write_outputs(config: RunConfig, report: BenchReport):
    out = config.out_dir
    os.makedirs(out, exist_ok=True)
    os.makedirs(os.path.join(out, "traces"), exist_ok=True)
    emit_csv(report, os.path.join(out, "report.csv"))
    emit_svg(report, os.path.join(out, "report.svg"))
    by_variant = {}
    for r in report.runs:
        by_variant.setdefault((r.problem, r.variant), []).append(r)
    for (problem, variant), rs in sorted(by_variant.items()):
        safe = variant.replace(",", "_").replace("=", "-")
        for r in rs:
            emit_csv(r.trace, os.path.join(out, "traces", f"{problem}_{safe}_{r.method}.csv"))
        panel = _trace_panel(f"{problem} {variant}",
                             [(r.method, r.trace) for r in rs], rs[0].f_star_ref)
        write_svg([panel], os.path.join(out, f"convergence_{problem}_{safe}.svg"))


_CONFIG_KEYS = {
    "problem", "methods", "seed", "out", "max_iters", "grad_tol", "epsilons",
    "workers", "tuning", "tuning_min_exp", "tuning_max_exp", "tuning_max_iters",
    "n", "kappa", "beta", "dataset", "lambda", "n_datasets", "n_samples",
    "n_features", "density", "separation",
}


def _parse_scalar_list(raw):
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def parse_config(text) -> RunConfig:
    """Flat key = value format; '#' starts a comment; lists are comma separated."""
    kv = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"config line {line_no}: expected key = value, got {body!r}")
        key, _, value = body.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"config line {line_no}: unknown key {key!r}")
        kv[key] = value.strip()

    problem_kind = kv.get("problem", "worst_case")
    try:
        if problem_kind == "worst_case":
            problem = WorstCaseSpec(
                n=int(kv.get("n", 200)),
                betas=_parse_scalar_list(kv["beta"]) if "beta" in kv else (1e2, 1e4))
        elif problem_kind == "quadratic":
            problem = QuadraticSpec(n=int(kv.get("n", 20)), kappa=float(kv.get("kappa", 100.0)))
        elif problem_kind == "erm":
            dataset = kv.get("dataset")
            if dataset in (None, "synthetic"):
                dataset = None
            problem = ErmSpec(
                dataset=dataset,
                lambdas=_parse_scalar_list(kv["lambda"]) if "lambda" in kv else (1e-4, 1e-6, 1e-8),
                n_datasets=int(kv.get("n_datasets", 1)),
                n_samples=int(kv.get("n_samples", 120)),
                n_features=int(kv.get("n_features", 40)),
                density=float(kv.get("density", 0.25)),
                separation=float(kv.get("separation", 1.5)))
        else:
            raise ConfigError(f"unknown problem {problem_kind!r}")

        stop = StoppingRule(
            max_iters=int(kv["max_iters"]) if "max_iters" in kv else None,
            grad_tol=float(kv["grad_tol"]) if "grad_tol" in kv else None)
        tuning = TuningSpec(
            policy=kv.get("tuning", "auto"),
            min_exp=int(kv.get("tuning_min_exp", -20)),
            max_exp=int(kv.get("tuning_max_exp", 4)),
            max_iters=int(kv["tuning_max_iters"]) if "tuning_max_iters" in kv else None)
        config = RunConfig(
            problem=problem,
            methods=tuple(tok for tok in kv.get("methods", "geod,sd,afg,afg_restart")
                          .replace(",", " ").split()),
            stop=stop,
            tuning=tuning,
            epsilons=_parse_scalar_list(kv["epsilons"]) if "epsilons" in kv else DEFAULT_EPSILONS,
            seed=int(kv.get("seed", 0)),
            out_dir=kv.get("out"),
            workers=int(kv.get("workers", 4)))
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc
    return validate_config(config)


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
