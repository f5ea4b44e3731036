"""Balls in R^n and the minimum enclosing ball of a two-ball intersection.

A ball is stored as (center, squared radius). All operations are pure; Ball
values are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import InitVar, dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    DisjointBalls,
    NegativeRadius,
    NonFiniteInput,
    PreconditionViolated,
    SamplingStalled,
)

# Computed squared radii in [-RADIUS_CLAMP_REL * scale, 0) clamp to zero;
# anything below that threshold is an error (exact tangency is reached up to
# roundoff in late optimizer iterations, deeper negatives mean broken inputs).
RADIUS_CLAMP_REL = 1e-12

_STALL_MIN_ATTEMPTS = 1_000_000
_STALL_RATE = 1e-6
_MAX_ATTEMPTS = 50_000_000


def _clamp_radius_sq(radius_sq, scale=1.0):
    r2 = float(radius_sq)
    if math.isnan(r2):
        raise NonFiniteInput("radius_sq is nan")
    if r2 >= 0.0:
        return r2
    if r2 >= -RADIUS_CLAMP_REL * scale:
        return 0.0
    raise NegativeRadius(f"radius_sq={r2!r} below clamp threshold {-RADIUS_CLAMP_REL * scale!r}")


@dataclass(frozen=True, eq=False)
class Ball:
    """Euclidean ball B(center, radius_sq); the second argument is the radius squared."""

    center: np.ndarray
    radius_sq: float
    scale: InitVar[float] = 1.0

    def __post_init__(self, scale):
        center = np.array(self.center, dtype=float)
        if center.ndim != 1:
            raise DimensionMismatch(f"ball center must be a vector, got shape {center.shape}")
        if not np.all(np.isfinite(center)):
            raise NonFiniteInput("ball center contains non-finite entries")
        center.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius_sq", _clamp_radius_sq(self.radius_sq, scale))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def radius(self):
        return math.sqrt(self.radius_sq)

    def __repr__(self):
        return f"Ball(center={np.array2string(self.center, precision=6)}, radius_sq={self.radius_sq:.6g})"


def _check_same_dim(a: Ball, b: Ball):
    if a.dim != b.dim:
        raise DimensionMismatch(f"ball dimensions differ: {a.dim} vs {b.dim}")


def _check_intersect(a: Ball, b: Ball):
    """Scale-aware disjointness test; returns the center distance."""
    dist = float(np.linalg.norm(a.center - b.center))
    reach = a.radius + b.radius
    tol = 1e-9 * (1.0 + a.radius + b.radius)
    if dist > reach + tol:
        raise DisjointBalls(f"center distance {dist:.6g} exceeds radius sum {reach:.6g} + tol")
    return dist


def contains(ball: Ball, point, tol=0.0) -> bool:
    """True iff |point - center|^2 <= radius_sq + tol."""
    point = np.asarray(point, dtype=float)
    if point.shape != ball.center.shape:
        raise DimensionMismatch(f"point shape {point.shape} vs ball dim {ball.dim}")
    d = point - ball.center
    return float(d @ d) <= ball.radius_sq + tol


def min_enclosing_ball(A: Ball, B: Ball) -> Ball:
    """Minimum enclosing ball of the intersection of two balls.

    Three-way case split on the squared center distance d2:
      (i)  d2 >= |R_A^2 - R_B^2|: the ball through the intersection rim,
           centered on the segment between the centers;
      (ii) d2 <  R_A^2 - R_B^2:   B lies in the half of A past the rim, return B;
      (iii) otherwise:            return A (also the tie-break for coincident
           equal balls, a case that vanishes under the shrink lemma's
           precondition).

    Raises DisjointBalls when the balls do not intersect (up to a scale-aware
    tolerance); the caller's strong-convexity modulus is then suspect.
    """
    _check_same_dim(A, B)
    _check_intersect(A, B)
    diff = A.center - B.center
    d2 = float(diff @ diff)
    gap = A.radius_sq - B.radius_sq
    if d2 >= abs(gap) and d2 > 0.0:
        c = 0.5 * (A.center + B.center) - (gap / (2.0 * d2)) * diff
        h = d2 + B.radius_sq - A.radius_sq
        r2 = B.radius_sq - h * h / (4.0 * d2)
        # The disjointness tolerance admits barely-tangent pairs whose exact
        # lens is a point; their computed r2 can be a hair negative.
        return Ball(c, max(r2, 0.0))
    if d2 < gap:
        return B
    return A


def lemma_shrink_ball(a, g, eps, delta=0.0) -> Ball:
    """Ball containing B(0, 1 - eps*g^2 - delta) ∩ B(a, g^2*(1-eps) - delta).

    Requires |a| >= g.  When g^2 <= 1/2 the second ball itself works; otherwise
    the ball is centered where the rim plane crosses the segment [0, a].  The
    output squared radius is at most 1 - sqrt(eps) - delta.  A negative
    computed radius means the lens is empty or degenerate, and clamps to zero
    (a point trivially encloses an empty set).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise DimensionMismatch(f"a must be a vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput("a contains non-finite entries")
    g = float(g)
    eps = float(eps)
    delta = float(delta)
    if g < 0.0:
        raise PreconditionViolated(f"g must be >= 0, got {g}")
    if not 0.0 < eps < 1.0:
        raise PreconditionViolated(f"eps must lie in (0, 1), got {eps}")
    if delta < 0.0:
        raise PreconditionViolated(f"delta must be >= 0, got {delta}")
    norm_a = float(np.linalg.norm(a))
    if norm_a < g:
        raise PreconditionViolated(f"|a|={norm_a:.6g} < g={g:.6g}")
    g2 = g * g
    if g2 <= 0.5:
        return Ball(a, max(g2 * (1.0 - eps) - delta, 0.0))
    x = (1.0 + norm_a * norm_a - g2) / (2.0 * norm_a)
    center = (x / norm_a) * a
    r2 = 1.0 - eps * g2 - delta - x * x
    return Ball(center, max(r2, 0.0))


def _uniform_in_ball(rng, ball: Ball, count):
    n = ball.dim
    dirs = rng.standard_normal((count, n))
    norms = np.linalg.norm(dirs, axis=1)
    norms[norms == 0.0] = 1.0
    radii = ball.radius * rng.random(count) ** (1.0 / n)
    return ball.center + dirs * (radii / norms)[:, None]


def sample_intersection(A: Ball, B: Ball, count, seed) -> np.ndarray:
    """Exactly `count` points of A ∩ B by rejection from the smaller ball.

    Deterministic for a fixed seed.  Raises SamplingStalled when the observed
    acceptance rate drops below 1e-6 (degenerate lens); the caller should
    shrink the configuration.
    """
    _check_same_dim(A, B)
    if A.dim < 1:
        raise DimensionMismatch("dimension must be >= 1")
    count = int(count)
    if count < 0:
        raise PreconditionViolated("count must be >= 0")
    _check_intersect(A, B)
    small, other = (A, B) if A.radius_sq <= B.radius_sq else (B, A)
    rng = np.random.default_rng(seed)
    out = np.empty((count, A.dim))
    got = 0
    attempts = 0
    batch = max(4 * count, 1024)
    while got < count:
        pts = _uniform_in_ball(rng, small, batch)
        d = pts - other.center
        keep = pts[np.einsum("ij,ij->i", d, d) <= other.radius_sq]
        take = min(count - got, keep.shape[0])
        out[got : got + take] = keep[:take]
        got += take
        attempts += batch
        if attempts >= _STALL_MIN_ATTEMPTS and got / attempts < _STALL_RATE:
            raise SamplingStalled(f"accepted {got} of {attempts} draws")
        if attempts >= _MAX_ATTEMPTS:
            raise SamplingStalled(f"attempt budget exhausted ({attempts} draws, {got} accepted)")
    return out
