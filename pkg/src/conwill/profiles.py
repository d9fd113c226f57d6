"""Recovery phase fields u = q_eps(d(x)/eps) from signed-distance shapes.

The optimal transition profile is q(t) = tanh(t/sqrt(2)), the stationary
1D solution of q'' = W'(q) with (q')² = 2W(q). The clipped profile q_eps
follows q up to t1 = delta/(3 eps), reaches exactly ±1 at t2 = delta/(2 eps),
and in between moves convexly from q toward 1 under a C² smoothstep, so it
inherits q's value and first two derivatives at the inner knot and lands at
(1, 0, 0) at the outer knot. It is odd, C², monotone, and bounded by 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import ModelParams, warn_if_underresolved
from .errors import DomainError
from .grid import DomainMask, Grid2D, ScalarField

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------- shapes

@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("circle radius must be positive")


@dataclass(frozen=True)
class TwoCircles:
    c1: tuple[float, float]
    r1: float
    c2: tuple[float, float]
    r2: float

    def __post_init__(self):
        if not (self.r1 > 0 and self.r2 > 0):
            raise ValueError("circle radii must be positive")
        gap = math.hypot(self.c1[0] - self.c2[0], self.c1[1] - self.c2[1])
        if gap <= self.r1 + self.r2:
            raise ValueError("the two discs must be disjoint")


@dataclass(frozen=True)
class Stripe:
    """Region between two parallel lines: |n·x − offset| < width/2."""

    normal: tuple[float, float]
    offset: float
    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("stripe width must be positive")
        n = math.hypot(*self.normal)
        if n == 0:
            raise ValueError("stripe normal must be nonzero")
        object.__setattr__(self, "normal", (self.normal[0] / n, self.normal[1] / n))


@dataclass(frozen=True)
class Dumbbell:
    """Two discs joined by a straight neck of the given half-width."""

    c1: tuple[float, float]
    r1: float
    c2: tuple[float, float]
    r2: float
    neck_halfwidth: float

    def __post_init__(self):
        if not (self.r1 > 0 and self.r2 > 0 and self.neck_halfwidth > 0):
            raise ValueError("dumbbell lengths must be positive")
        if self.neck_halfwidth >= min(self.r1, self.r2):
            raise ValueError("neck half-width must be below both radii")
        if self.c1 == self.c2:
            raise ValueError("dumbbell centers must differ")


Shape = Circle | TwoCircles | Stripe | Dumbbell


def _sd_circle(cx, cy, r, X, Y):
    return r - np.hypot(X - cx, Y - cy)


def _sd_box(c1, c2, halfwidth, X, Y):
    # rotated-rectangle SDF, positive inside; box spans the segment c1-c2
    ax, ay = c2[0] - c1[0], c2[1] - c1[1]
    L = math.hypot(ax, ay)
    ax, ay = ax / L, ay / L
    mx, my = 0.5 * (c1[0] + c2[0]), 0.5 * (c1[1] + c2[1])
    s = (X - mx) * ax + (Y - my) * ay  # along the axis
    t = -(X - mx) * ay + (Y - my) * ax  # across
    dx = np.abs(s) - 0.5 * L
    dy = np.abs(t) - halfwidth
    outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
    inside = np.minimum(np.maximum(dx, dy), 0.0)
    return -(outside + inside)


def signed_distance(shape: Shape, X, Y):
    """Signed distance to the shape boundary, positive inside.

    Exact for circle, two_circles, and stripe; for the dumbbell it is the
    max-composition of the two disc SDFs and the neck-box SDF, exact near
    the boundary except at the junction creases.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if isinstance(shape, Circle):
        return _sd_circle(*shape.center, shape.radius, X, Y)
    if isinstance(shape, TwoCircles):
        return np.maximum(
            _sd_circle(*shape.c1, shape.r1, X, Y), _sd_circle(*shape.c2, shape.r2, X, Y)
        )
    if isinstance(shape, Stripe):
        nx, ny = shape.normal
        return 0.5 * shape.width - np.abs(nx * X + ny * Y - shape.offset)
    if isinstance(shape, Dumbbell):
        d = np.maximum(
            _sd_circle(*shape.c1, shape.r1, X, Y), _sd_circle(*shape.c2, shape.r2, X, Y)
        )
        return np.maximum(d, _sd_box(shape.c1, shape.c2, shape.neck_halfwidth, X, Y))
    raise TypeError(f"unknown shape {shape!r}")


def min_feature_radius(shape: Shape) -> float:
    """Smallest geometric scale that bounds the clipping width delta.

    The dumbbell neck is excluded on purpose: a delta above the neck
    half-width only means the neck core never saturates to +1, which is
    the correct field for a thin neck.
    """
    if isinstance(shape, Circle):
        return shape.radius
    if isinstance(shape, TwoCircles):
        return min(shape.r1, shape.r2)
    if isinstance(shape, Stripe):
        return 0.5 * shape.width
    if isinstance(shape, Dumbbell):
        return min(shape.r1, shape.r2)
    raise TypeError(f"unknown shape {shape!r}")


def default_delta(shape: Shape) -> float:
    """Default clipping width: min(0.2, 0.8 × smallest feature radius)."""
    return min(0.2, 0.8 * min_feature_radius(shape))


@dataclass(frozen=True)
class ProfileParams:
    """Clipping width of the profile (length units)."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")


# ---------------------------------------------------------------- profiles

def optimal_profile(t):
    """q(t) = tanh(t/sqrt(2))."""
    return np.tanh(np.asarray(t, dtype=np.float64) / SQRT2)


def optimal_profile_prime(t):
    """q'(t) = (1 − q²)/sqrt(2)."""
    q = optimal_profile(t)
    return (1.0 - q * q) / SQRT2


def _smoothstep(s):
    """C² ramp on [0,1]: 0 at 0 and 1 at 1, first and second derivative zero at both ends."""
    s = np.asarray(s, dtype=np.float64)
    return s**3 * (10.0 + s * (6.0 * s - 15.0))


def clipped_profile(t, eps: float, delta: float):
    """q_eps(t): equals q for |t| ≤ delta/(3 eps), exactly ±1 beyond delta/(2 eps)."""
    if not (eps > 0 and delta > 0):
        raise ValueError("eps and delta must be positive")
    t_in = np.asarray(t, dtype=np.float64)
    t_arr = np.atleast_1d(t_in)
    t1 = delta / (3.0 * eps)
    t2 = delta / (2.0 * eps)
    width = t2 - t1
    a = np.abs(t_arr)

    out = np.where(a >= t2, 1.0, 0.0)
    core = a <= t1
    out[core] = optimal_profile(a[core])
    mid = (~core) & (a < t2)
    if np.any(mid):
        # convex move from q toward 1: the derivative q'(1-g) + g'(1-q)/width
        # has no negative term, so monotonicity survives every width regime
        g = _smoothstep((a[mid] - t1) / width)
        q = optimal_profile(a[mid])
        out[mid] = q + g * (1.0 - q)
    out *= np.sign(t_arr)  # odd extension; sign(0) = 0 matches q(0) = 0
    return out.reshape(t_in.shape) if t_in.shape else float(out[0])


# ---------------------------------------------------------------- recovery

def build_recovery(
    shape: Shape,
    p: ModelParams,
    grid: Grid2D,
    mask: DomainMask,
    delta: float | None = None,
) -> ScalarField:
    """Phase field q_eps(d(x)/eps) on the grid, exactly −1 outside the domain.

    Raises DomainError if the set where the field exceeds −1 touches
    non-domain cells, i.e. the shape (plus its delta/2 tube) is not
    compactly inside the domain.
    """
    if delta is None:
        delta = default_delta(shape)
    ProfileParams(delta)
    r_min = min_feature_radius(shape)
    if delta >= r_min:
        raise ValueError(
            f"delta = {delta} must stay below the smallest feature radius {r_min}"
        )
    warn_if_underresolved(p, grid)
    X, Y = grid.cell_centers()
    d = signed_distance(shape, X, Y)
    touched = d > -0.5 * delta  # cells where the field exceeds −1
    if np.any(touched & ~mask.inside):
        raise DomainError(
            "shape is not compactly inside the domain: its transition tube"
            " reaches non-domain cells"
        )
    vals = clipped_profile(d / p.eps, p.eps, delta)
    return ScalarField(grid, np.where(mask.inside, vals, -1.0))
