"""Objective oracles: value, gradient, strong-convexity constant, and an
amortized line restriction.

Three families: convex quadratics (test workhorse), regularized smoothed-hinge
empirical risk, and the chain quadratic that is worst-case for first-order
methods.  ERM restrictions precompute the two margin vectors A@base and
A@direction once; every probe after that is a single O(n_samples) pass with no
further matrix products, which is what makes "exact" line searches affordable.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import (
    DimensionMismatch,
    EmptyDataset,
    InvalidDimension,
    InvalidParameter,
    NonFiniteInput,
    NonPositiveLambda,
    NotPositiveDefinite,
)
from .geometry import Ball
from .linesearch import LineRestriction


@dataclass(frozen=True)
class OracleSpec:
    """Problem constants: dimension, strong convexity alpha, smoothness beta
    (None when unknown), optimal value f_star (None when unknown)."""

    dimension: int
    alpha: float
    beta: Optional[float] = None
    f_star: Optional[float] = None


@dataclass
class GradientResult:
    value: float
    gradient: np.ndarray


class OracleCounters:
    """Cumulative oracle-call accounting, safe under concurrent evaluation."""

    __slots__ = ("_lock", "eval_calls", "value_calls", "restrict_calls", "matvec_products")

    def __init__(self):
        self._lock = threading.Lock()
        self.eval_calls = 0
        self.value_calls = 0
        self.restrict_calls = 0
        self.matvec_products = 0

    def add(self, eval_calls=0, value_calls=0, restrict_calls=0, matvec_products=0):
        with self._lock:
            self.eval_calls += eval_calls
            self.value_calls += value_calls
            self.restrict_calls += restrict_calls
            self.matvec_products += matvec_products

    def snapshot(self):
        with self._lock:
            return {
                "eval_calls": self.eval_calls,
                "value_calls": self.value_calls,
                "restrict_calls": self.restrict_calls,
                "matvec_products": self.matvec_products,
            }


class Oracle:
    """Base oracle; subclasses implement _value_and_grad and _restrict."""

    def __init__(self, dimension, alpha, beta=None, f_star=None, x_star=None):
        self.dimension = int(dimension)
        self.alpha = float(alpha)
        self.beta = None if beta is None else float(beta)
        self.f_star = None if f_star is None else float(f_star)
        if x_star is not None:
            x_star = np.array(x_star, dtype=float)
            x_star.flags.writeable = False
        self.x_star = x_star
        self.counters = OracleCounters()

    @property
    def spec(self) -> OracleSpec:
        return OracleSpec(self.dimension, self.alpha, self.beta, self.f_star)

    @property
    def kappa(self):
        return None if self.beta is None else self.beta / self.alpha

    def _check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dimension,):
            raise DimensionMismatch(f"point shape {x.shape}, oracle dimension {self.dimension}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInput("point contains non-finite entries")
        return x

    def eval(self, x) -> GradientResult:
        """Analytic value and gradient; counts one oracle call."""
        x = self._check_point(x)
        value, grad = self._value_and_grad(x)
        self.counters.add(eval_calls=1)
        return GradientResult(float(value), grad)

    def value(self, x) -> float:
        x = self._check_point(x)
        v = self._value(x)
        self.counters.add(value_calls=1)
        return float(v)

    def restrict(self, base, direction) -> LineRestriction:
        """Line restriction phi(t) = f(base + t*direction) with cheap probes."""
        base = self._check_point(base)
        direction = self._check_point(direction)
        line = self._restrict(base, direction)
        self.counters.add(restrict_calls=1)
        return line

    def beta_estimate(self) -> float:
        if self.beta is not None:
            return self.beta
        raise InvalidParameter(f"{type(self).__name__} has no smoothness estimate")

    # Subclass hooks. _value defaults to the gradient path; _restrict to
    # full evaluations per probe (counted), which subclasses override with
    # amortized versions.
    def _value_and_grad(self, x):
        raise NotImplementedError

    def _value(self, x):
        return self._value_and_grad(x)[0]

    def _restrict(self, base, direction):
        def ev(t):
            r = self.eval(base + t * direction)
            return r.value, float(r.gradient @ direction)

        return LineRestriction(base, direction, ev)


def grad_step(oracle: Oracle, x, step) -> np.ndarray:
    """x - step * grad f(x); step 1/beta gives x+, step 1/alpha gives x++."""
    step = float(step)
    if step <= 0.0:
        raise InvalidParameter(f"step must be > 0, got {step}")
    r = oracle.eval(x)
    return np.asarray(x, dtype=float) - step * r.gradient


def strong_convexity_ball(oracle: Oracle, x) -> Ball:
    """Localization ball for x*: B(x++, (|grad|^2/alpha^2) * (1 - 1/kappa)).

    This drops the unobservable -(2/alpha)(f(x+) - f(x*)) slack, which only
    tightens the true ball, so containment of x* is preserved.
    """
    if oracle.beta is None:
        raise InvalidParameter("strong_convexity_ball needs a known smoothness beta")
    x = np.asarray(x, dtype=float)
    r = oracle.eval(x)
    g = r.gradient
    alpha = oracle.alpha
    gnorm_sq = float(g @ g)
    radius_sq = (gnorm_sq / alpha**2) * (1.0 - 1.0 / oracle.kappa)
    return Ball(x - g / alpha, radius_sq, scale=1.0 + gnorm_sq / alpha**2)


class QuadraticOracle(Oracle):
    """f(x) = 0.5 x'Qx - b'x with known optimum; Q diagonal or dense SPD."""

    def __init__(self, Q, b):
        Q = np.asarray(Q, dtype=float)
        b = np.asarray(b, dtype=float)
        if Q.ndim == 1:
            if np.any(Q <= 0.0):
                raise NotPositiveDefinite("diagonal entries must be > 0")
            if b.shape != Q.shape:
                raise DimensionMismatch(f"b shape {b.shape} vs diagonal {Q.shape}")
            self.diag = Q.copy()
            self.dense = None
            alpha, beta = float(Q.min()), float(Q.max())
            x_star = b / Q
        elif Q.ndim == 2:
            if Q.shape[0] != Q.shape[1] or b.shape != (Q.shape[0],):
                raise DimensionMismatch(f"Q shape {Q.shape}, b shape {b.shape}")
            if not np.allclose(Q, Q.T, atol=1e-12 * (1.0 + np.abs(Q).max())):
                raise NotPositiveDefinite("Q must be symmetric")
            eigs = np.linalg.eigvalsh(Q)
            if eigs[0] <= 0.0:
                raise NotPositiveDefinite(f"smallest eigenvalue {eigs[0]:.6g} <= 0")
            self.diag = None
            self.dense = Q.copy()
            alpha, beta = float(eigs[0]), float(eigs[-1])
            x_star = np.linalg.solve(Q, b)
        else:
            raise DimensionMismatch(f"Q must be 1-D or 2-D, got ndim {Q.ndim}")
        self.b = b.copy()
        f_star = 0.5 * float(x_star @ self._apply_q(x_star)) - float(b @ x_star)
        super().__init__(b.shape[0], alpha, beta=beta, f_star=f_star, x_star=x_star)

    def _apply_q(self, v):
        return self.diag * v if self.diag is not None else self.dense @ v

    def _value_and_grad(self, x):
        qx = self._apply_q(x)
        value = 0.5 * float(x @ qx) - float(self.b @ x)
        return value, qx - self.b

    def _value(self, x):
        return 0.5 * float(x @ self._apply_q(x)) - float(self.b @ x)

    def _restrict(self, base, direction):
        # phi(t) = f0 + t g'd + 0.5 t^2 d'Qd: three scalars, O(1) probes.
        qb = self._apply_q(base)
        f0 = 0.5 * float(base @ qb) - float(self.b @ base)
        gd = float((qb - self.b) @ direction)
        dqd = float(direction @ self._apply_q(direction))

        def ev(t):
            return f0 + t * (gd + 0.5 * t * dqd), gd + t * dqd

        return LineRestriction(base, direction, ev)


def quadratic_oracle(Q, b) -> QuadraticOracle:
    return QuadraticOracle(Q, b)


def smoothed_hinge(z):
    """0 for z >= 1; 1/2 - z for z <= 0; (1-z)^2 / 2 between."""
    w = 1.0 - np.asarray(z, dtype=float)
    return np.where(w <= 0.0, 0.0, np.where(w >= 1.0, w - 0.5, 0.5 * w * w))


def smoothed_hinge_prime(z):
    return -np.clip(1.0 - np.asarray(z, dtype=float), 0.0, 1.0)


class SmoothedHingeErmOracle(Oracle):
    """f(x) = (1/n) sum_i phi(b_i a_i'x) + (lam/2)|x|^2 with alpha = lam.

    Smoothness is unknown by default; beta_estimate() returns
    lam + sigma_max(A)^2 / n from 100 power-iteration steps.  Margin vectors
    A@x are cached by content for points produced by line searches, so a
    typical optimizer iteration costs at most a handful of sparse products.
    """

    _CACHE_CAP = 16

    def __init__(self, dataset, lam):
        lam = float(lam)
        if lam <= 0.0:
            raise NonPositiveLambda(f"lambda must be > 0, got {lam}")
        if dataset.n_samples < 1:
            raise EmptyDataset("dataset has no samples")
        super().__init__(dataset.n_features, alpha=lam)
        self.lam = lam
        self.matrix = dataset.to_csr()
        self.labels = np.asarray(dataset.labels, dtype=float)
        self.n_samples = dataset.n_samples
        self._cache_lock = threading.Lock()
        self._margin_cache = OrderedDict()
        self._beta_estimate = None

    def _cache_margins(self, x, z):
        with self._cache_lock:
            self._margin_cache[x.tobytes()] = z
            while len(self._margin_cache) > self._CACHE_CAP:
                self._margin_cache.popitem(last=False)

    def _margins(self, x):
        key = x.tobytes()
        with self._cache_lock:
            z = self._margin_cache.get(key)
        if z is None:
            z = self.matrix @ x
            self.counters.add(matvec_products=1)
            self._cache_margins(x, z)
        return z

    def _value_and_grad(self, x):
        z = self._margins(x)
        u = self.labels * z
        value = float(np.mean(smoothed_hinge(u))) + 0.5 * self.lam * float(x @ x)
        w = smoothed_hinge_prime(u) * self.labels / self.n_samples
        self.counters.add(matvec_products=1)
        grad = self.matrix.T @ w + self.lam * x
        return value, grad

    def _value(self, x):
        z = self._margins(x)
        u = self.labels * z
        return float(np.mean(smoothed_hinge(u))) + 0.5 * self.lam * float(x @ x)

    def _restrict(self, base, direction):
        zb = self._margins(base)
        zd = self.matrix @ direction
        self.counters.add(matvec_products=1)
        p = self.labels * zb
        q = self.labels * zd
        lam = self.lam
        bb = float(base @ base)
        bd = float(base @ direction)
        dd = float(direction @ direction)
        inv_n = 1.0 / self.n_samples

        def ev(t):
            # Fused piecewise pass: with w = 1 - u and c = clip(w, 0, 1),
            # phi(u) = c^2/2 + max(w - 1, 0) and phi'(u) = -c.
            w = 1.0 - (p + t * q)
            c = np.clip(w, 0.0, 1.0)
            hinge_sum = 0.5 * float(c @ c) + float(np.maximum(w - 1.0, 0.0).sum())
            value = hinge_sum * inv_n + 0.5 * lam * (bb + t * (2.0 * bd + t * dd))
            deriv = -float(c @ q) * inv_n + lam * (bd + t * dd)
            return value, deriv

        def register(t, point):
            self._cache_margins(point, zb + t * zd)

        return LineRestriction(base, direction, ev, on_result=register)

    def beta_estimate(self) -> float:
        if self._beta_estimate is None:
            rng = np.random.default_rng(0)
            v = rng.standard_normal(self.dimension)
            v /= np.linalg.norm(v)
            for _ in range(100):
                w = self.matrix.T @ (self.matrix @ v)
                self.counters.add(matvec_products=2)
                nw = np.linalg.norm(w)
                if nw == 0.0:
                    break
                v = w / nw
            av = self.matrix @ v
            self.counters.add(matvec_products=1)
            self._beta_estimate = self.lam + float(av @ av) / self.n_samples
        return self._beta_estimate


def smoothed_hinge_erm_oracle(dataset, lam) -> SmoothedHingeErmOracle:
    return SmoothedHingeErmOracle(dataset, lam)


class WorstCaseOracle(Oracle):
    """Chain quadratic: f(x) = (w/2)((1-x_1)^2 + sum (x_i - x_{i+1})^2 + x_n^2)
    + |x|^2 / 2, the classic hard instance for gradient methods.

    Gradient is w(Lx - e1) + x with L = tridiag(-1, 2, -1), applied
    matrix-free in O(n).  alpha = 1; beta = 1 + w * lambda_max(L).  The
    optimum solves the tridiagonal system (wL + I) x = w e1.
    """

    def __init__(self, n, chain_weight):
        n = int(n)
        if n < 2:
            raise InvalidDimension(f"n must be >= 2, got {n}")
        chain_weight = float(chain_weight)
        if chain_weight <= 0.0:
            raise InvalidParameter(f"chain weight must be > 0, got {chain_weight}")
        self.chain_weight = chain_weight
        lam_max = 2.0 * (1.0 + math.cos(math.pi / (n + 1)))
        beta = 1.0 + chain_weight * lam_max

        # (wL + I) x* = w e1 via the LAPACK banded solver.
        ab = np.zeros((3, n))
        ab[0, 1:] = -chain_weight
        ab[1, :] = 2.0 * chain_weight + 1.0
        ab[2, :-1] = -chain_weight
        rhs = np.zeros(n)
        rhs[0] = chain_weight
        x_star = scipy.linalg.solve_banded((1, 1), ab, rhs)

        super().__init__(n, alpha=1.0, beta=beta, x_star=x_star)
        self.f_star = self._value(x_star)

    def _apply_chain(self, v):
        out = 2.0 * v
        out[1:] -= v[:-1]
        out[:-1] -= v[1:]
        return out

    def _value(self, x):
        w = self.chain_weight
        chain = (1.0 - x[0]) ** 2 + float(np.sum(np.diff(x) ** 2)) + x[-1] ** 2
        return 0.5 * w * chain + 0.5 * float(x @ x)

    def _value_and_grad(self, x):
        grad = self.chain_weight * self._apply_chain(x) + x
        grad[0] -= self.chain_weight
        return self._value(x), grad

    def _restrict(self, base, direction):
        f0, g0 = self._value_and_grad(base)
        gd = float(g0 @ direction)
        dhd = self.chain_weight * float(direction @ self._apply_chain(direction)) \
            + float(direction @ direction)

        def ev(t):
            return f0 + t * (gd + 0.5 * t * dhd), gd + t * dhd

        return LineRestriction(base, direction, ev)


def worst_case_oracle(n, beta) -> WorstCaseOracle:
    return WorstCaseOracle(n, beta)
