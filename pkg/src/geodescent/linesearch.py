"""Exact line search: 1-D minimization of a convex differentiable restriction.

The minimizer of f along the line through two points is found by bracketing a
sign change of the directional derivative (geometric expansion from unit
scale, both orientations) and then bisecting on the derivative.  Probes are
cheap by contract: oracles precompute whatever makes each (value, derivative)
query a single O(n_samples) pass or O(1) arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonConvexDetected, ZeroDirection

TOL_GRAD = 1e-10
TOL_T = 1e-12
MAX_PROBES = 200

_MAX_BRACKET = 1e18
_CONVEXITY_SLACK = 1e-6


@dataclass
class LineRestriction:
    """phi(t) = f(base + t * direction) with a fused (value, derivative) probe.

    `on_result` is an optional oracle hook invoked with (t_star, point) once a
    search resolves, letting the oracle reuse restriction precomputations for
    the returned point (e.g. cached margin vectors).
    """

    base: np.ndarray
    direction: np.ndarray
    eval: Callable[[float], tuple]
    on_result: Optional[Callable] = None

    def point_at(self, t):
        return self.base + t * self.direction


@dataclass
class LineSearchResult:
    t_star: float
    point: np.ndarray
    value: float
    derivative_at_t: float
    probes: int
    converged: bool = True


def exact_line_search(line: LineRestriction, tol_grad=TOL_GRAD, tol_t=TOL_T,
                      max_probes=MAX_PROBES) -> LineSearchResult:
    """Minimize a convex differentiable phi over t in R.

    Stops when |phi'(t)| <= tol_grad * (1 + |phi'(0)|) or the bracket width
    falls below tol_t * (1 + bracket magnitude).  Returns the probed point
    with the smallest value, so the result never increases phi relative to
    t = 0.  If the probe budget runs out, the best point so far is returned
    flagged as non-converged.
    """
    direction = np.asarray(line.direction, dtype=float)
    if not direction.any():
        raise ZeroDirection("line search direction is zero")

    probes = 0

    def probe(t):
        nonlocal probes
        probes += 1
        return line.eval(t)

    f0, d0 = probe(0.0)
    deriv_stop = tol_grad * (1.0 + abs(d0))
    max_abs_d = abs(d0)

    def result(t, f, d, converged):
        return LineSearchResult(t, line.point_at(t), f, d, probes, converged)

    if abs(d0) <= deriv_stop:
        return result(0.0, f0, d0, True)

    # Expansion: walk toward the minimizer (sign of d0 picks the side) until
    # the derivative changes sign. Convexity makes phi' monotone along t; a
    # clear monotonicity violation is reported instead of silently looping.
    # The inner end always has phi <= phi(0) because phi decreases toward the
    # minimizer along the walk.
    sgn = 1.0 if d0 < 0.0 else -1.0
    t_in, f_in, d_in = 0.0, f0, d0
    t_out = sgn
    bracketed = False
    while probes < max_probes:
        f_t, d_t = probe(t_out)
        max_abs_d = max(max_abs_d, abs(d_t))
        if d_t == 0.0 or (d_t > 0.0) != (d0 > 0.0):
            bracketed = True
            break
        slack = _CONVEXITY_SLACK * (1.0 + max_abs_d)
        if sgn > 0.0 and d_t < d_in - slack:
            raise NonConvexDetected(f"phi' decreased from {d_in:.6g} to {d_t:.6g} at t={t_out:.6g}")
        if sgn < 0.0 and d_t > d_in + slack:
            raise NonConvexDetected(f"phi' increased from {d_in:.6g} to {d_t:.6g} at t={t_out:.6g}")
        t_in, f_in, d_in = t_out, f_t, d_t
        t_out *= 2.0
        if abs(t_out) > _MAX_BRACKET:
            break
    if not bracketed:
        return result(t_in, f_in, d_in, False)
    if d_t == 0.0:
        return result(t_out, f_t, d_t, True)

    # Orient so that d(lo) < 0 < d(hi), then bisect on the derivative.  The
    # result is the better bracket endpoint: endpoints converge onto the
    # minimizer, and picking by value (with |phi'| as tie-break, since phi is
    # flat to machine precision near the optimum) keeps the guarantee
    # value <= phi(0) up to roundoff.
    if sgn > 0.0:
        lo, f_lo, d_lo, hi, f_hi, d_hi = t_in, f_in, d_in, t_out, f_t, d_t
    else:
        lo, f_lo, d_lo, hi, f_hi, d_hi = t_out, f_t, d_t, t_in, f_in, d_in

    converged = False
    while probes < max_probes:
        width = hi - lo
        if width <= tol_t * (1.0 + max(abs(lo), abs(hi))):
            converged = True
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            converged = True
            break
        f_m, d_m = probe(mid)
        max_abs_d = max(max_abs_d, abs(d_m))
        slack = _CONVEXITY_SLACK * (1.0 + max_abs_d)
        if d_m < d_lo - slack or d_m > d_hi + slack:
            raise NonConvexDetected(
                f"phi'({mid:.6g})={d_m:.6g} outside bracket derivative range "
                f"[{d_lo:.6g}, {d_hi:.6g}]")
        if d_m == 0.0:
            return result(mid, f_m, d_m, True)
        if d_m > 0.0:
            hi, f_hi, d_hi = mid, f_m, d_m
        else:
            lo, f_lo, d_lo = mid, f_m, d_m

    if (f_lo, abs(d_lo)) <= (f_hi, abs(d_hi)):
        return result(lo, f_lo, d_lo, converged)
    return result(hi, f_hi, d_hi, converged)


def search_between(oracle, x, y, tol_grad=TOL_GRAD, tol_t=TOL_T,
                   max_probes=MAX_PROBES) -> LineSearchResult:
    """Line-search step returning the full result; requires x != y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    line = oracle.restrict(x, y - x)
    res = exact_line_search(line, tol_grad=tol_grad, tol_t=tol_t, max_probes=max_probes)
    if line.on_result is not None:
        line.on_result(res.t_star, res.point)
    return res


def ls_point(oracle, x, y) -> np.ndarray:
    """The LS map: argmin of f over the whole line through x and y.

    Returns x unchanged when x == y.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.array_equal(x, y):
        return x
    return search_between(oracle, x, y).point
