"""Uniform-grid scalar fields, domain masks, and discrete operators.

Arrays are indexed [j, i] with shape (ny, nx); j runs along y, i along x.
The cell center of index (i, j) is origin + ((i+0.5)h, (j+0.5)h).

Cells outside the domain always read at their stored value (−1 for an
admissible phase field); stencil reads past the array edge replicate the
edge cell, which realizes a zero-flux ghost ring. Domain masks built by
the factories below keep a 2-cell outside collar, so for admissible
fields the two conventions agree and every out-of-domain neighbor is −1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell-centered grid over an axis-aligned rectangle."""

    nx: int
    ny: int
    h: float
    origin: tuple[float, float] = (-1.0, -1.0)

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise ValueError(f"grid needs nx, ny >= 3, got {self.nx}x{self.ny}")
        if not self.h > 0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    def xs(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.h

    def ys(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.h

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """X and Y coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.xs(), self.ys(), indexing="xy")


@dataclass(frozen=True)
class DomainMask:
    """Boolean per cell; True marks cell centers belonging to the domain."""

    inside: np.ndarray

    def __post_init__(self):
        if self.inside.dtype != np.bool_ or self.inside.ndim != 2:
            raise ValueError("mask must be a 2D boolean array")

    @property
    def n_inside(self) -> int:
        return int(np.count_nonzero(self.inside))


COLLAR = 2  # outside cells kept between the domain and the array edge


def _clip_collar(inside: np.ndarray) -> np.ndarray:
    inside = inside.copy()
    inside[:COLLAR, :] = False
    inside[-COLLAR:, :] = False
    inside[:, :COLLAR] = False
    inside[:, -COLLAR:] = False
    return inside


def disc_mask(grid: Grid2D, center=(0.0, 0.0), radius=1.0) -> DomainMask:
    """Disc domain, intersected with the 2-cell collar."""
    X, Y = grid.cell_centers()
    inside = np.hypot(X - center[0], Y - center[1]) <= radius
    return DomainMask(_clip_collar(inside))


def rect_mask(grid: Grid2D) -> DomainMask:
    """Whole rectangle minus the 2-cell collar."""
    return DomainMask(_clip_collar(np.ones(grid.shape, dtype=bool)))


def full_mask(grid: Grid2D) -> DomainMask:
    """Every cell inside; stencils then rely on the replicated ghost ring."""
    return DomainMask(np.ones(grid.shape, dtype=bool))


@dataclass
class ScalarField:
    """Per-cell real values on a grid."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != self.grid.shape:
            raise ShapeError(
                f"field shape {self.values.shape} != grid shape {self.grid.shape}"
            )

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def constant_field(grid: Grid2D, value: float) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, float(value)))


def admissible_field(grid: Grid2D, mask: DomainMask, values: np.ndarray) -> ScalarField:
    """Field with the given inside values and exactly −1 outside."""
    check_shapes(grid, mask, values)
    return ScalarField(grid, np.where(mask.inside, values, -1.0))


def check_shapes(grid: Grid2D, mask: DomainMask, *arrays) -> None:
    if mask.inside.shape != grid.shape:
        raise ShapeError(f"mask shape {mask.inside.shape} != grid shape {grid.shape}")
    for a in arrays:
        if np.shape(a) != grid.shape:
            raise ShapeError(f"array shape {np.shape(a)} != grid shape {grid.shape}")


def _ghosted(values: np.ndarray) -> np.ndarray:
    return np.pad(values, 1, mode="edge")


def laplacian(u: ScalarField, mask: DomainMask) -> ScalarField:
    """5-point Laplacian at inside cells, 0 at outside cells.

    Neighbors are read at their stored values, so composing the operator
    with itself realizes the clamped bilaplacian used by the implicit
    flow solve.
    """
    check_shapes(u.grid, mask, u.values)
    h2 = u.grid.h * u.grid.h
    p = _ghosted(u.values)
    lap = (
        p[1:-1, 2:] + p[1:-1, :-2] + p[2:, 1:-1] + p[:-2, 1:-1] - 4.0 * u.values
    ) / h2
    return ScalarField(u.grid, np.where(mask.inside, lap, 0.0))


def grad_norm_sq(u: ScalarField, mask: DomainMask) -> ScalarField:
    """|∇u|² by central differences; 0 at outside cells."""
    check_shapes(u.grid, mask, u.values)
    two_h = 2.0 * u.grid.h
    p = _ghosted(u.values)
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / two_h
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / two_h
    return ScalarField(u.grid, np.where(mask.inside, gx * gx + gy * gy, 0.0))


def dirichlet_form(u: ScalarField) -> float:
    """Sum of squared nearest-neighbor differences over all in-array edges.

    This is the discrete Dirichlet energy whose exact per-cell gradient is
    −2h²·laplacian; the diffuse perimeter uses it so that its analytic
    first variation matches the finite-difference one to round-off.
    """
    v = u.values
    ex = v[:, 1:] - v[:, :-1]
    ey = v[1:, :] - v[:-1, :]
    return float(np.sum(ex * ex) + np.sum(ey * ey))


def integrate(f: ScalarField, mask: DomainMask) -> float:
    """Midpoint-rule integral over inside cells."""
    check_shapes(f.grid, mask, f.values)
    return float(np.sum(f.values, where=mask.inside) * f.grid.h * f.grid.h)
