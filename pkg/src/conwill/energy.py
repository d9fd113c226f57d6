"""Diffuse energies of the phase field and their L² first variations.

The diffuse perimeter of a field u is

    s_eps(u) = (1/c0) ∫ ε/2 |∇u|² + W(u)/ε,   W(u) = (u²−1)²/4,

with c0 = ∫_{−1}^{1} √(2W) = 2√2/3 so that s_eps of a flat transition
layer is its length. The diffuse bending energy is

    w_eps(u) = (1/(c0 ε)) ∫ v²,   v = −εΔu + W'(u)/ε,

where v is the chemical potential, the diffuse analogue of mean
curvature. The gradient part of s_eps is discretized as the sum of
squared nearest-neighbor differences (grid.dirichlet_form); that choice
makes grad_s_eps = v/c0 the exact per-cell derivative of s_eps, so the
finite-difference fidelity checks hold to round-off rather than to
truncation order.

The pointwise discrepancy ε/2 |∇u|² − W(u)/ε (central-difference
gradient) is reported as a diagnostic and never penalized.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .grid import (
    DomainMask,
    Grid2D,
    ScalarField,
    check_shapes,
    dirichlet_form,
    grad_norm_sq,
    integrate,
    laplacian,
)

C0 = 2.0 * math.sqrt(2.0) / 3.0


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of the energy: ε, σ, κ, target area S, and c0."""

    eps: float
    sigma: float = 2.0
    kappa: float = 1.0
    target_area: float = 1.0
    c0: float = C0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not (0.0 < self.sigma < 4.0):
            raise ValueError("sigma must lie in (0,4)")
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.target_area > 0:
            raise ValueError(f"target_area must be positive, got {self.target_area}")
        if abs(self.c0 - C0) > 1e-14:
            raise ValueError(f"c0 must equal 2*sqrt(2)/3 = {C0!r}, got {self.c0!r}")


def warn_if_underresolved(p: ModelParams, grid: Grid2D) -> None:
    # interface width below ~2 cells cannot carry the tanh layer
    if p.eps < 2.0 * grid.h:
        warnings.warn(
            f"eps = {p.eps} is below 2h = {2.0 * grid.h}: interface under-resolved",
            stacklevel=2,
        )


def warn_if_unbounded(u: ScalarField) -> None:
    m = float(np.max(np.abs(u.values)))
    if m > 1.5:
        warnings.warn(
            f"max |u| = {m} exceeds 1.5; bounded-energy fields stay below that"
            " (likely a too-large time step)",
            stacklevel=2,
        )


def double_well(u):
    """W(u) = (u²−1)²/4."""
    u = np.asarray(u, dtype=np.float64)
    q = u * u - 1.0
    return 0.25 * q * q


def double_well_prime(u):
    """W'(u) = u³ − u."""
    u = np.asarray(u, dtype=np.float64)
    return u * u * u - u


def double_well_second(u):
    """W''(u) = 3u² − 1."""
    u = np.asarray(u, dtype=np.float64)
    return 3.0 * u * u - 1.0


def chemical_potential(u: ScalarField, p: ModelParams, mask: DomainMask) -> ScalarField:
    """v = −εΔu + W'(u)/ε at inside cells, 0 outside."""
    lap = laplacian(u, mask)
    v = -p.eps * lap.values + double_well_prime(u.values) / p.eps
    return ScalarField(u.grid, np.where(mask.inside, v, 0.0))


def s_eps(u: ScalarField, p: ModelParams, mask: DomainMask) -> float:
    """Diffuse perimeter (1/c0) ∫ ε/2 |∇u|² + W(u)/ε."""
    check_shapes(u.grid, mask, u.values)
    grad_part = 0.5 * p.eps * dirichlet_form(u)  # h² from the square cancels dx
    well = ScalarField(u.grid, double_well(u.values))
    return (grad_part + integrate(well, mask) / p.eps) / p.c0


def w_eps(u: ScalarField, p: ModelParams, mask: DomainMask) -> float:
    """Diffuse bending energy (1/(c0 ε)) ∫ v²."""
    v = chemical_potential(u, p, mask)
    return integrate(ScalarField(u.grid, v.values * v.values), mask) / (p.c0 * p.eps)


def discrepancy(u: ScalarField, p: ModelParams, mask: DomainMask):
    """Integrals (signed, positive part, absolute) of ε/2 |∇u|² − W(u)/ε, over c0."""
    gns = grad_norm_sq(u, mask)
    dens = 0.5 * p.eps * gns.values - double_well(u.values) / p.eps
    dens = np.where(mask.inside, dens, 0.0)
    h2 = u.grid.h * u.grid.h
    xi_signed = float(np.sum(dens)) * h2 / p.c0
    xi_plus = float(np.sum(np.maximum(dens, 0.0))) * h2 / p.c0
    xi_abs = float(np.sum(np.abs(dens))) * h2 / p.c0
    return xi_signed, xi_plus, xi_abs


def grad_s_eps(u: ScalarField, p: ModelParams, mask: DomainMask) -> ScalarField:
    """First variation of s_eps: v/c0. Exact discrete gradient of s_eps."""
    v = chemical_potential(u, p, mask)
    return ScalarField(u.grid, v.values / p.c0)


def grad_w_eps(u: ScalarField, p: ModelParams, mask: DomainMask) -> ScalarField:
    """First variation of w_eps: (2/(c0 ε)) (ε Δw − W''(u) w / ε), w = εΔu − W'(u)/ε."""
    lap_u = laplacian(u, mask)
    w_vals = np.where(
        mask.inside, p.eps * lap_u.values - double_well_prime(u.values) / p.eps, 0.0
    )
    lap_w = laplacian(ScalarField(u.grid, w_vals), mask)
    g = (2.0 / (p.c0 * p.eps)) * (
        p.eps * lap_w.values - double_well_second(u.values) * w_vals / p.eps
    )
    return ScalarField(u.grid, np.where(mask.inside, g, 0.0))


def area_penalty(u: ScalarField, p: ModelParams, mask: DomainMask):
    """ε^{−σ}(s_eps − S)² and its gradient 2ε^{−σ}(s_eps − S)·grad_s_eps."""
    gap = s_eps(u, p, mask) - p.target_area
    scale = p.eps ** (-p.sigma)
    value = scale * gap * gap
    gs = grad_s_eps(u, p, mask)
    return value, ScalarField(u.grid, 2.0 * scale * gap * gs.values)


@dataclass(frozen=True)
class EnergyReport:
    """All energy terms of one field at one time."""

    s_eps: float
    w_eps: float
    area_penalty: float
    c_eps: float
    total: float
    xi_signed: float
    xi_plus: float
    xi_abs: float
    n_components: int


def total_energy(u: ScalarField, p: ModelParams, mask: DomainMask, bands) -> EnergyReport:
    """Full report; c_eps and the component count come from the band list.

    `bands` is a topology.BandPenalty (or anything exposing evaluate(u, p, mask)
    returning (c_eps_total, n_components_of_first_band)).
    """
    warn_if_unbounded(u)
    s = s_eps(u, p, mask)
    w = w_eps(u, p, mask)
    gap = s - p.target_area
    pen = p.eps ** (-p.sigma) * gap * gap
    c, ncomp = bands.evaluate(u, p, mask)
    xi_signed, xi_plus, xi_abs = discrepancy(u, p, mask)
    total = w + pen + p.eps ** (-p.kappa) * c
    return EnergyReport(
        s_eps=s,
        w_eps=w,
        area_penalty=pen,
        c_eps=c,
        total=total,
        xi_signed=xi_signed,
        xi_plus=xi_plus,
        xi_abs=xi_abs,
        n_components=ncomp,
    )
