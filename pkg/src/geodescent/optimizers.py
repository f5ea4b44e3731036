"""First-order optimizers: geometric descent, its fixed-step theory variant,
the suboptimal geometric method, and the baselines used for comparison.

run_geod alternates a combining line search, a gradient line search, and a
two-ball minimum-enclosing-ball update; each iteration costs exactly one
gradient evaluation and two line searches.  run_geod_theory replaces the
gradient line search with the fixed 1/beta step and uses the theoretical
radius updates, which guarantees the squared localization radius shrinks by
(1 - 1/sqrt(kappa)) per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AlphaTooLarge,
    DisjointBalls,
    InvalidParameter,
    NegativeRadius,
    NonFiniteInput,
    PreconditionViolated,
    RateViolation,
)
from .geometry import Ball, min_enclosing_ball
from .linesearch import search_between


@dataclass
class StoppingRule:
    """Stopping criteria; unset fields resolve to defaults at run start.

    Defaults: max_iters = 10 * dimension + 1000 and
    grad_tol = 1e-10 * (1 + |grad f(x0)|).
    """

    max_iters: Optional[int] = None
    grad_tol: Optional[float] = None
    target_value: Optional[float] = None
    radius_tol: Optional[float] = None

    def resolved(self, dimension, g0_norm):
        max_iters = self.max_iters if self.max_iters is not None else 10 * dimension + 1000
        grad_tol = self.grad_tol if self.grad_tol is not None else 1e-10 * (1.0 + g0_norm)
        if max_iters < 0 or grad_tol < 0:
            raise InvalidParameter("stopping thresholds must be >= 0")
        if self.radius_tol is not None and self.radius_tol < 0:
            raise InvalidParameter("radius_tol must be >= 0")
        return _ResolvedStop(max_iters, grad_tol, self.target_value, self.radius_tol)


@dataclass
class _ResolvedStop:
    max_iters: int
    grad_tol: float
    target_value: Optional[float]
    radius_tol: Optional[float]


class IterationTrace:
    """Per-iteration record of an optimizer run.

    f_at_x_plus holds the objective at the iterate each method reports
    (x_k^+ for geod variants, x_k otherwise).  Counter columns are cumulative
    oracle counter snapshots, so per-iteration costs are first differences.
    """

    def __init__(self, method, has_radius=False):
        self.method = method
        self.has_radius = has_radius
        self.k = []
        self.f_at_x_plus = []
        self.grad_norm = []
        self.radius_sq = []
        self.oracle_calls = []
        self.grad_evals = []
        self.ls_count = []
        self.ls_probes = []
        self.matvecs = []
        self.points = []
        self.centers = []  # localization ball centers, geometric methods only
        self.converged = False
        self.stop_reason = "max_iters"
        self.meta = {}

    def append(self, k, f, grad_norm, point, counters, ls_count, ls_probes,
               radius_sq=None, center=None):
        self.k.append(int(k))
        self.f_at_x_plus.append(float(f))
        self.grad_norm.append(float(grad_norm))
        self.radius_sq.append(float(radius_sq) if radius_sq is not None else math.nan)
        self.oracle_calls.append(counters["eval_calls"] + counters["value_calls"])
        self.grad_evals.append(counters["eval_calls"])
        self.ls_count.append(int(ls_count))
        self.ls_probes.append(int(ls_probes))
        self.matvecs.append(counters["matvec_products"])
        self.points.append(np.array(point))
        self.centers.append(None if center is None else np.array(center))

    def __len__(self):
        return len(self.k)

    @property
    def f_values(self):
        return np.asarray(self.f_at_x_plus)

    @property
    def final_point(self):
        return self.points[-1]

    @property
    def final_f(self):
        return self.f_at_x_plus[-1]

    def finish(self, reason):
        self.stop_reason = reason
        self.converged = reason != "max_iters"
        return self


def _as_point(oracle, x0):
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise NonFiniteInput("x0 contains non-finite entries")
    if x0.shape != (oracle.dimension,):
        raise InvalidParameter(f"x0 shape {x0.shape}, oracle dimension {oracle.dimension}")
    return x0


class _LsMeter:
    """Counts line searches and probes for trace accounting."""

    def __init__(self, oracle):
        self.oracle = oracle
        self.count = 0
        self.probes = 0

    def search(self, x, y):
        res = search_between(self.oracle, x, y)
        self.count += 1
        self.probes += res.probes
        return res

    def degenerate(self):
        # LS(x, x) returns x by contract; still one invocation of the map.
        self.count += 1


def _clamped_radius_sq(value, scale):
    """Theory says these squared radii are nonnegative; cancellation noise is
    clamped, anything clearly negative signals an invalid alpha."""
    if value >= 0.0:
        return value
    if value >= -1e-9 * scale:
        return 0.0
    raise AlphaTooLarge(
        f"computed squared radius {value:.6g} is negative beyond roundoff; "
        "the supplied strong-convexity modulus exceeds the true one")


def run_geod(oracle, x0, stop: StoppingRule | None = None) -> IterationTrace:
    """Geometric descent with line searches; needs only alpha.

    Per loop iteration: one combining line search LS(x+, c), one gradient
    evaluation at the combined point, one gradient line search, then the
    minimum enclosing ball of the gradient ball A and the carried ball B.
    The recorded f(x_k^+) values are strictly decreasing.
    """
    stop = stop or StoppingRule()
    x0 = _as_point(oracle, x0)
    alpha = oracle.alpha
    ls = _LsMeter(oracle)
    trace = IterationTrace("geod", has_radius=True)

    r0 = oracle.eval(x0)
    g0, f0 = r0.gradient, r0.value
    g0_norm = float(np.linalg.norm(g0))
    rule = stop.resolved(oracle.dimension, g0_norm)

    if g0_norm == 0.0:
        trace.append(0, f0, 0.0, x0, oracle.counters.snapshot(), ls.count, ls.probes,
                     0.0, center=x0)
        return trace.finish("grad_tol")

    res0 = ls.search(x0, x0 - g0)
    x_plus, f_plus = res0.point, res0.value
    c = x0 - g0 / alpha
    gnorm_sq = g0_norm**2
    r2 = _clamped_radius_sq(
        gnorm_sq / alpha**2 - (2.0 / alpha) * (f0 - f_plus),
        1.0 + gnorm_sq / alpha**2)
    trace.append(0, f_plus, g0_norm, x_plus, oracle.counters.snapshot(), ls.count, ls.probes,
                 r2, center=c)
    if g0_norm <= rule.grad_tol:
        return trace.finish("grad_tol")
    if rule.target_value is not None and f_plus <= rule.target_value:
        return trace.finish("target_value")
    if rule.radius_tol is not None and r2 <= rule.radius_tol:
        return trace.finish("radius_tol")

    for k in range(1, rule.max_iters + 1):
        if np.array_equal(x_plus, c):
            ls.degenerate()
            x = x_plus
        else:
            x = ls.search(x_plus, c).point
        r = oracle.eval(x)
        g, f_x = r.gradient, r.value
        g_norm = float(np.linalg.norm(g))

        if g_norm == 0.0:
            if f_x < f_plus:
                trace.append(k, f_x, 0.0, x, oracle.counters.snapshot(), ls.count, ls.probes,
                             0.0, center=x)
            return trace.finish("grad_tol")

        res_g = ls.search(x, x - g)
        x_plus_new, f_plus_new = res_g.point, res_g.value

        if not f_plus_new < f_plus:
            # No strict progress left: converged to numerical precision.
            return trace.finish("stalled")

        gnorm_sq = g_norm**2
        ra2 = _clamped_radius_sq(
            gnorm_sq / alpha**2 - (2.0 / alpha) * (f_x - f_plus_new),
            1.0 + gnorm_sq / alpha**2)
        rb2 = r2 - (2.0 / alpha) * (f_plus - f_plus_new)
        if rb2 <= 0.0:
            # Carried localization ball collapsed: c is the answer to
            # numerical precision.
            trace.append(k, f_plus_new, g_norm, x_plus_new,
                         oracle.counters.snapshot(), ls.count, ls.probes, 0.0, center=c)
            return trace.finish("radius_collapsed")

        try:
            ball = min_enclosing_ball(Ball(x - g / alpha, ra2), Ball(c, rb2))
        except (DisjointBalls, NegativeRadius) as exc:
            raise AlphaTooLarge(
                "localization balls are disjoint; the supplied alpha exceeds "
                "the true strong-convexity modulus") from exc
        c, r2 = ball.center, ball.radius_sq
        x_plus, f_plus = x_plus_new, f_plus_new
        trace.append(k, f_plus, g_norm, x_plus, oracle.counters.snapshot(),
                     ls.count, ls.probes, r2, center=c)

        if g_norm <= rule.grad_tol:
            return trace.finish("grad_tol")
        if rule.target_value is not None and f_plus <= rule.target_value:
            return trace.finish("target_value")
        if rule.radius_tol is not None and r2 <= rule.radius_tol:
            return trace.finish("radius_tol")
    return trace.finish("max_iters")


def run_geod_theory(oracle, x0, stop: StoppingRule | None = None) -> IterationTrace:
    """Fixed-step geometric descent with the provable radius updates.

    x+ is the 1/beta gradient step, ball B shrinks by |grad|^2/(alpha^2 kappa)
    before combining, and the per-step shrink R_{k+1}^2 <= (1 - 1/sqrt(kappa))
    R_k^2 is asserted (RateViolation on failure, which would be a bug, not bad
    input).  Requires both alpha and beta.
    """
    stop = stop or StoppingRule()
    x0 = _as_point(oracle, x0)
    if oracle.beta is None:
        raise InvalidParameter("run_geod_theory needs a known smoothness beta")
    alpha, beta = oracle.alpha, oracle.beta
    kappa = beta / alpha
    ls = _LsMeter(oracle)
    trace = IterationTrace("geod_theory", has_radius=True)

    r0 = oracle.eval(x0)
    g, f_x = r0.gradient, r0.value
    g_norm = float(np.linalg.norm(g))
    rule = stop.resolved(oracle.dimension, g_norm)

    c = x0 - g / alpha
    r2 = (1.0 - 1.0 / kappa) * g_norm**2 / alpha**2
    r0_sq = r2
    x_plus = x0 - g / beta
    f_plus = oracle.value(x_plus)
    trace.append(0, f_plus, g_norm, x_plus, oracle.counters.snapshot(), ls.count, ls.probes,
                 r2, center=c)
    shrink = 1.0 - 1.0 / math.sqrt(kappa)

    for k in range(1, rule.max_iters + 1):
        if g_norm <= rule.grad_tol:
            return trace.finish("grad_tol")
        if rule.target_value is not None and f_plus <= rule.target_value:
            return trace.finish("target_value")
        if rule.radius_tol is not None and r2 <= rule.radius_tol:
            return trace.finish("radius_tol")
        if r2 == 0.0:
            return trace.finish("radius_collapsed")

        if np.array_equal(c, x_plus):
            x = c
            r = oracle.eval(x)
        else:
            res = ls.search(c, x_plus)
            x = res.point
            r = oracle.eval(x)
        g, f_x = r.gradient, r.value
        g_norm = float(np.linalg.norm(g))
        gnorm_sq = g_norm**2

        x_plus = x - g / beta
        f_plus = oracle.value(x_plus)
        ra2 = (1.0 - 1.0 / kappa) * gnorm_sq / alpha**2
        rb2 = r2 - gnorm_sq / (alpha**2 * kappa)
        rb2 = _clamped_radius_sq(rb2, 1.0 + r2)
        if rb2 == 0.0:
            trace.append(k, f_plus, g_norm, x_plus, oracle.counters.snapshot(),
                         ls.count, ls.probes, 0.0, center=c)
            return trace.finish("radius_collapsed")
        try:
            ball = min_enclosing_ball(Ball(x - g / alpha, ra2), Ball(c, rb2))
        except (DisjointBalls, NegativeRadius) as exc:
            raise AlphaTooLarge(
                "localization balls are disjoint; the supplied alpha exceeds "
                "the true strong-convexity modulus") from exc
        if ball.radius_sq > shrink * r2 + 1e-9 * r0_sq:
            raise RateViolation(
                f"step {k}: radius_sq {ball.radius_sq:.6g} exceeds "
                f"{shrink:.6g} * {r2:.6g} + slack")
        c, r2 = ball.center, ball.radius_sq
        trace.append(k, f_plus, g_norm, x_plus, oracle.counters.snapshot(),
                     ls.count, ls.probes, r2, center=c)
    return trace.finish("max_iters")


def run_geo_suboptimal(oracle, x0, r0_sq, stop: StoppingRule | None = None) -> IterationTrace:
    """Suboptimal geometric method: intersect the carried ball B(x, R^2) with
    the shrunk gradient ball and move to the enclosing ball's center.

    The caller guarantees |x* - x0|^2 <= r0_sq.  The squared radius contracts
    by (1 - 1/kappa) per iteration; one gradient evaluation, no line search.
    """
    stop = stop or StoppingRule()
    x0 = _as_point(oracle, x0)
    if oracle.beta is None:
        raise InvalidParameter("run_geo_suboptimal needs a known smoothness beta")
    r0_sq = float(r0_sq)
    if r0_sq < 0.0:
        raise PreconditionViolated("r0_sq must be >= 0")
    alpha = oracle.alpha
    kappa = oracle.beta / alpha
    trace = IterationTrace("geo_subopt", has_radius=True)

    x, r2 = x0, r0_sq
    r = oracle.eval(x)
    g, f_x = r.gradient, r.value
    g_norm = float(np.linalg.norm(g))
    rule = stop.resolved(oracle.dimension, g_norm)
    trace.append(0, f_x, g_norm, x, oracle.counters.snapshot(), 0, 0, r2, center=x)

    for k in range(1, rule.max_iters + 1):
        if g_norm <= rule.grad_tol:
            return trace.finish("grad_tol")
        if rule.target_value is not None and f_x <= rule.target_value:
            return trace.finish("target_value")
        if rule.radius_tol is not None and r2 <= rule.radius_tol:
            return trace.finish("radius_tol")

        gnorm_sq = g_norm**2
        grad_ball = Ball(x - g / alpha, (1.0 - 1.0 / kappa) * gnorm_sq / alpha**2)
        try:
            ball = min_enclosing_ball(grad_ball, Ball(x, r2))
        except (DisjointBalls, NegativeRadius) as exc:
            raise AlphaTooLarge(
                "localization balls are disjoint; alpha or r0_sq is invalid") from exc
        x, r2 = ball.center, ball.radius_sq
        r = oracle.eval(x)
        g, f_x = r.gradient, r.value
        g_norm = float(np.linalg.norm(g))
        trace.append(k, f_x, g_norm, x, oracle.counters.snapshot(), 0, 0, r2, center=x)
    return trace.finish("max_iters")


def run_steepest_descent(oracle, x0, stop: StoppingRule | None = None) -> IterationTrace:
    """Gradient descent with an exact line search along -grad."""
    stop = stop or StoppingRule()
    x = _as_point(oracle, x0)
    ls = _LsMeter(oracle)
    trace = IterationTrace("sd")

    r = oracle.eval(x)
    g, f_x = r.gradient, r.value
    g_norm = float(np.linalg.norm(g))
    rule = stop.resolved(oracle.dimension, g_norm)
    trace.append(0, f_x, g_norm, x, oracle.counters.snapshot(), ls.count, ls.probes)

    for k in range(1, rule.max_iters + 1):
        if g_norm <= rule.grad_tol:
            return trace.finish("grad_tol")
        if rule.target_value is not None and f_x <= rule.target_value:
            return trace.finish("target_value")
        res = ls.search(x, x - g)
        x, f_x = res.point, res.value
        r = oracle.eval(x)
        g = r.gradient
        g_norm = float(np.linalg.norm(g))
        trace.append(k, f_x, g_norm, x, oracle.counters.snapshot(), ls.count, ls.probes)
    return trace.finish("max_iters")


def _momentum_coefficient(kappa_hint):
    kappa_hint = float(kappa_hint)
    if kappa_hint < 1.0:
        raise InvalidParameter(f"kappa_hint must be >= 1, got {kappa_hint}")
    rk = math.sqrt(kappa_hint)
    return (rk - 1.0) / (rk + 1.0)


def run_afg(oracle, x0, kappa_hint, stop: StoppingRule | None = None,
            beta=None) -> IterationTrace:
    """Accelerated full gradient, constant-momentum scheme.

    x_{k+1} = y_k - grad f(y_k)/beta and y_{k+1} = x_{k+1} + theta (x_{k+1} -
    x_k) with theta = (sqrt(k)-1)/(sqrt(k)+1) from kappa_hint.  beta defaults
    to the oracle's (estimated) smoothness.  The f trace may overshoot; that
    is the price of momentum.
    """
    stop = stop or StoppingRule()
    x = _as_point(oracle, x0)
    theta = _momentum_coefficient(kappa_hint)
    beta = float(beta) if beta is not None else oracle.beta_estimate()
    trace = IterationTrace("afg")
    trace.meta["kappa_hint"] = float(kappa_hint)

    y = x
    r = oracle.eval(y)
    g_norm = float(np.linalg.norm(r.gradient))
    rule = stop.resolved(oracle.dimension, g_norm)
    trace.append(0, r.value, g_norm, x, oracle.counters.snapshot(), 0, 0)

    for k in range(1, rule.max_iters + 1):
        if g_norm <= rule.grad_tol:
            return trace.finish("grad_tol")
        if rule.target_value is not None and trace.final_f <= rule.target_value:
            return trace.finish("target_value")
        x_new = y - r.gradient / beta
        f_new = oracle.value(x_new)
        y = x_new + theta * (x_new - x)
        x = x_new
        trace.append(k, f_new, g_norm, x, oracle.counters.snapshot(), 0, 0)
        r = oracle.eval(y)
        g_norm = float(np.linalg.norm(r.gradient))
    return trace.finish("max_iters")


def run_afg_restart(oracle, x0, kappa_hint, stop: StoppingRule | None = None) -> IterationTrace:
    """Accelerated gradient with exact line searches and function restarts.

    The gradient step is x_{k+1} = LS(y_k, y_k - grad f(y_k)).  If the probed
    step would increase f, the step is redone from x_k without momentum and
    the momentum memory resets (y = x); the f trace is therefore monotone by
    construction.
    """
    stop = stop or StoppingRule()
    x = _as_point(oracle, x0)
    theta = _momentum_coefficient(kappa_hint)
    ls = _LsMeter(oracle)
    trace = IterationTrace("afg_restart")
    trace.meta["kappa_hint"] = float(kappa_hint)

    y = x
    r = oracle.eval(y)
    f_x = r.value
    g_norm = float(np.linalg.norm(r.gradient))
    rule = stop.resolved(oracle.dimension, g_norm)
    trace.append(0, f_x, g_norm, x, oracle.counters.snapshot(), ls.count, ls.probes)
    restarts = 0

    for k in range(1, rule.max_iters + 1):
        if g_norm <= rule.grad_tol:
            break
        if rule.target_value is not None and f_x <= rule.target_value:
            trace.finish("target_value")
            trace.meta["restarts"] = restarts
            return trace
        res = ls.search(y, y - r.gradient)
        if res.value > f_x:
            # Momentum overshot: redo the step from x without momentum.
            restarts += 1
            r_x = oracle.eval(x)
            if float(np.linalg.norm(r_x.gradient)) == 0.0:
                break
            res = ls.search(x, x - r_x.gradient)
            x, f_x = res.point, res.value
            y = x
            g_rec = float(np.linalg.norm(r_x.gradient))
        else:
            x_new = res.point
            y = x_new + theta * (x_new - x)
            x, f_x = x_new, res.value
            g_rec = g_norm
        trace.append(k, f_x, g_rec, x, oracle.counters.snapshot(), ls.count, ls.probes)
        r = oracle.eval(y)
        g_norm = float(np.linalg.norm(r.gradient))
    else:
        trace.finish("max_iters")
        trace.meta["restarts"] = restarts
        return trace
    trace.finish("grad_tol")
    trace.meta["restarts"] = restarts
    return trace
