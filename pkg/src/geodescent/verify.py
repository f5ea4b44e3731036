"""Self-check suites behind the `verify` CLI subcommand: localization-ball
rate and containment checks, shrink-lemma sampling, gradient checks, and the
parser round trip.  Smaller than the acceptance test suite but the same
properties.
"""

from __future__ import annotations

import numpy as np

from .dataio import parse_libsvm, serialize_libsvm, synthetic_classification
from .geometry import Ball, lemma_shrink_ball, min_enclosing_ball, sample_intersection
from .objectives import quadratic_oracle, smoothed_hinge_erm_oracle, worst_case_oracle
from .optimizers import StoppingRule, run_geo_suboptimal, run_geod_theory


def _random_quadratic(rng, n, kappa):
    eigs = np.concatenate(([1.0, kappa], np.exp(rng.uniform(0.0, np.log(kappa), n - 2))))
    return quadratic_oracle(eigs, rng.standard_normal(n))


def check_theory_rate(seed=0, runs=15, iters=150):
    """R_{k+1}^2 <= (1 - 1/sqrt(kappa)) R_k^2 and x* containment."""
    rng = np.random.default_rng(seed)
    for _ in range(runs):
        n = int(rng.integers(2, 30))
        kappa = float(rng.choice([10.0, 100.0, 1000.0]))
        oracle = _random_quadratic(rng, n, kappa)
        x0 = rng.standard_normal(n) * 2.0
        trace = run_geod_theory(oracle, x0, StoppingRule(max_iters=iters))
        r2 = np.asarray(trace.radius_sq)
        shrink = 1.0 - 1.0 / np.sqrt(kappa)
        if not np.all(r2[1:] <= shrink * r2[:-1] + 1e-9 * r2[0]):
            return False, f"shrink rate violated (kappa={kappa:g}, n={n})"
    return True, f"{runs} runs"


def check_suboptimal_rate(seed=0, runs=15, iters=150):
    """|x* - x_k|^2 <= (1 - 1/kappa)^k R_0^2 for the suboptimal method."""
    rng = np.random.default_rng(seed)
    for _ in range(runs):
        n = int(rng.integers(2, 20))
        kappa = float(rng.choice([10.0, 100.0]))
        oracle = _random_quadratic(rng, n, kappa)
        x0 = rng.standard_normal(n)
        r0_sq = 1.2 * float(np.sum((oracle.x_star - x0) ** 2))
        trace = run_geo_suboptimal(oracle, x0, r0_sq, StoppingRule(max_iters=iters))
        rate = 1.0 - 1.0 / kappa
        for k, pt in zip(trace.k, trace.points):
            bound = rate**k * r0_sq + 1e-9 * r0_sq
            if float(np.sum((oracle.x_star - pt) ** 2)) > bound:
                return False, f"distance bound violated at k={k} (kappa={kappa:g})"
    return True, f"{runs} runs"


def check_lemma_sampling(seed=0, instances=500, points=30):
    """Shrink-lemma ball bound and sampled containment."""
    rng = np.random.default_rng(seed)
    done = 0
    while done < instances:
        dim = int(rng.integers(2, 8))
        g = float(rng.uniform(0.1, 1.2))
        eps = float(rng.uniform(0.05, 0.95))
        delta = float(rng.uniform(0.0, 0.2)) if rng.random() < 0.5 else 0.0
        r1_sq = 1.0 - eps * g * g - delta
        r2_sq = g * g * (1.0 - eps) - delta
        if r1_sq <= 1e-4 or r2_sq <= 1e-4:
            continue
        r1, r2 = np.sqrt(r1_sq), np.sqrt(r2_sq)
        hi = r1 + r2 - 1.5 * min(r1, r2)
        if hi < g:
            continue
        norm_a = float(rng.uniform(g, hi))
        direction = rng.standard_normal(dim)
        a = norm_a * direction / np.linalg.norm(direction)
        ball = lemma_shrink_ball(a, g, eps, delta)
        if ball.radius_sq > 1.0 - np.sqrt(eps) - delta + 1e-12:
            return False, f"radius bound violated (g={g:g}, eps={eps:g}, delta={delta:g})"
        pts = sample_intersection(Ball(np.zeros(dim), r1_sq), Ball(a, r2_sq),
                                  points, seed=int(rng.integers(1 << 31)))
        d = pts - ball.center
        if not np.all(np.einsum("ij,ij->i", d, d) <= ball.radius_sq + 1e-9):
            return False, "sampled point escaped the lemma ball"
        done += 1
    return True, f"{instances} instances x {points} points"


def check_enclosing_ball_sampling(seed=0, instances=500, points=30):
    """Minimum enclosing ball containment and radius minimality bound."""
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        dim = int(rng.integers(2, 12))
        r_a = float(rng.uniform(0.3, 3.0))
        r_b = float(rng.uniform(0.3, 3.0))
        q = float(rng.uniform(max(0.3, 0.05 ** (1.0 / dim)), 0.97))
        dist = max(r_a + r_b - 2.0 * q * min(r_a, r_b), 0.0)
        ca = rng.standard_normal(dim)
        u = rng.standard_normal(dim)
        cb = ca + dist * u / np.linalg.norm(u)
        a, b = Ball(ca, r_a**2), Ball(cb, r_b**2)
        out = min_enclosing_ball(a, b)
        if out.radius_sq > min(a.radius_sq, b.radius_sq) + 1e-12:
            return False, "enclosing radius exceeds the smaller input"
        pts = sample_intersection(a, b, points, seed=int(rng.integers(1 << 31)))
        d = pts - out.center
        if not np.all(np.einsum("ij,ij->i", d, d) <= out.radius_sq + 1e-9):
            return False, "sampled intersection point escaped the enclosing ball"
    return True, f"{instances} pairs x {points} points"


def check_gradients(seed=0, points=150):
    """Central finite differences vs analytic gradients, all oracle families."""
    rng = np.random.default_rng(seed)
    data = synthetic_classification(40, 10, density=0.4, seed=seed)
    oracles = [
        _random_quadratic(rng, 8, 50.0),
        smoothed_hinge_erm_oracle(data, lam=1e-3),
        worst_case_oracle(20, 100.0),
    ]
    for oracle in oracles:
        for _ in range(points // len(oracles)):
            x = rng.standard_normal(oracle.dimension)
            g = oracle.eval(x).gradient
            h = 1e-5 * (1.0 + float(np.linalg.norm(x)))
            fd = np.empty_like(x)
            for i in range(x.shape[0]):
                e = np.zeros_like(x)
                e[i] = h
                fd[i] = (oracle.value(x + e) - oracle.value(x - e)) / (2.0 * h)
            denom = max(1.0, float(np.linalg.norm(fd)))
            if float(np.linalg.norm(g - fd)) / denom > 1e-5:
                return False, f"gradient mismatch for {type(oracle).__name__}"
    return True, f"{points} points across 3 families"


def check_parser_roundtrip(seed=0, datasets=30):
    rng = np.random.default_rng(seed)
    for i in range(datasets):
        ds = synthetic_classification(int(rng.integers(1, 20)), int(rng.integers(1, 10)),
                                      density=0.5, seed=seed + i)
        back = parse_libsvm(serialize_libsvm(ds), n_features=ds.n_features)
        if serialize_libsvm(back) != serialize_libsvm(ds):
            return False, f"round trip altered dataset {i}"
    return True, f"{datasets} datasets"


SUITES = [
    ("theory-rate", check_theory_rate),
    ("suboptimal-rate", check_suboptimal_rate),
    ("lemma-sampling", check_lemma_sampling),
    ("enclosing-ball-sampling", check_enclosing_ball_sampling),
    ("gradient-checks", check_gradients),
    ("parser-roundtrip", check_parser_roundtrip),
]


def run_all(seed=0):
    """Returns [(name, passed, detail)] for every suite."""
    results = []
    for name, fn in SUITES:
        try:
            ok, detail = fn(seed=seed)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
