"""Connectedness-constrained diffuse Willmore flow in 2D.

A phase-field library: perimeter and bending energies of a diffuse
interface, a topological penalty that charges disconnected interface
pieces by weighted geodesic distance, and a semi-implicit gradient flow
that evolves the field under all three.
"""

from .energy import (
    C0,
    EnergyReport,
    ModelParams,
    area_penalty,
    chemical_potential,
    discrepancy,
    double_well,
    double_well_prime,
    double_well_second,
    grad_s_eps,
    grad_w_eps,
    s_eps,
    total_energy,
    w_eps,
)
from .errors import (
    ConfigError,
    ConwillError,
    DivergenceError,
    DomainError,
    ShapeError,
    SolverError,
    StaleTopologyError,
)
from .flow import FlowConfig, FlowDriver, FlowState
from .grid import (
    COLLAR,
    DomainMask,
    Grid2D,
    ScalarField,
    admissible_field,
    constant_field,
    dirichlet_form,
    disc_mask,
    full_mask,
    grad_norm_sq,
    integrate,
    laplacian,
    rect_mask,
)
from .io import (
    SeriesRow,
    SeriesWriter,
    cells_to_points,
    hausdorff_distance,
    read_field_csv,
    read_field_pgm,
    read_series,
    write_field_csv,
    write_field_pgm,
    write_series,
    write_snapshot,
)
from .profiles import (
    Circle,
    Dumbbell,
    ProfileParams,
    Stripe,
    TwoCircles,
    build_recovery,
    clipped_profile,
    default_delta,
    min_feature_radius,
    optimal_profile,
    optimal_profile_prime,
    signed_distance,
)
from .topology import (
    BandPair,
    BandPenalty,
    BumpSpec,
    ComponentLabeling,
    GeodesicField,
    WeightSpec,
    bump_phi,
    bump_phi_prime,
    c_eps,
    c_eps_subgradient,
    default_band_pairs,
    field_digest,
    geodesic_from_component,
    label_components,
    weight_F,
    weight_F_prime,
)
from .config import RunConfig, build_mask, parse_config, render_resolved

__version__ = "0.1.0"

__all__ = [
    "C0",
    "COLLAR",
    "BandPair",
    "BandPenalty",
    "BumpSpec",
    "Circle",
    "ComponentLabeling",
    "ConfigError",
    "ConwillError",
    "DivergenceError",
    "DomainError",
    "DomainMask",
    "Dumbbell",
    "EnergyReport",
    "FlowConfig",
    "FlowDriver",
    "FlowState",
    "GeodesicField",
    "Grid2D",
    "ModelParams",
    "ProfileParams",
    "RunConfig",
    "ScalarField",
    "SeriesRow",
    "SeriesWriter",
    "ShapeError",
    "SolverError",
    "StaleTopologyError",
    "Stripe",
    "TwoCircles",
    "WeightSpec",
    "admissible_field",
    "area_penalty",
    "build_mask",
    "build_recovery",
    "bump_phi",
    "bump_phi_prime",
    "c_eps",
    "c_eps_subgradient",
    "chemical_potential",
    "clipped_profile",
    "constant_field",
    "default_band_pairs",
    "default_delta",
    "dirichlet_form",
    "disc_mask",
    "discrepancy",
    "double_well",
    "double_well_prime",
    "double_well_second",
    "field_digest",
    "full_mask",
    "geodesic_from_component",
    "grad_norm_sq",
    "grad_s_eps",
    "grad_w_eps",
    "cells_to_points",
    "hausdorff_distance",
    "integrate",
    "label_components",
    "laplacian",
    "min_feature_radius",
    "optimal_profile",
    "optimal_profile_prime",
    "parse_config",
    "read_field_csv",
    "read_field_pgm",
    "read_series",
    "rect_mask",
    "render_resolved",
    "s_eps",
    "signed_distance",
    "total_energy",
    "w_eps",
    "weight_F",
    "weight_F_prime",
    "write_field_csv",
    "write_field_pgm",
    "write_series",
    "write_snapshot",
]
