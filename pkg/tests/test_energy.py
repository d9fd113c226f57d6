"""Energy terms and first variations against finite-difference oracles."""
import math

import numpy as np
import pytest

from conwill import (
    C0,
    BandPenalty,
    Circle,
    Grid2D,
    ModelParams,
    ScalarField,
    TwoCircles,
    admissible_field,
    area_penalty,
    build_recovery,
    chemical_potential,
    constant_field,
    default_band_pairs,
    disc_mask,
    discrepancy,
    double_well,
    double_well_prime,
    double_well_second,
    full_mask,
    grad_s_eps,
    grad_w_eps,
    rect_mask,
    s_eps,
    total_energy,
    w_eps,
)


def test_constants_and_well():
    assert C0 == pytest.approx(2 * math.sqrt(2) / 3, abs=1e-16)
    assert double_well(1.0) == 0.0 and double_well(-1.0) == 0.0
    assert double_well(0.0) == 0.25
    assert double_well_prime(1.0) == 0.0 and double_well_prime(-1.0) == 0.0
    assert double_well_prime(2.0) == 6.0
    assert double_well_second(0.0) == -1.0
    assert double_well_second(1.0) == 2.0
    # W' and W'' really are the derivatives of W
    u = np.linspace(-2, 2, 101)
    d = 1e-6
    fd1 = (double_well(u + d) - double_well(u - d)) / (2 * d)
    np.testing.assert_allclose(fd1, double_well_prime(u), atol=1e-7)
    fd2 = (double_well_prime(u + d) - double_well_prime(u - d)) / (2 * d)
    np.testing.assert_allclose(fd2, double_well_second(u), atol=1e-5)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(eps=0.0)
    with pytest.raises(ValueError, match=r"sigma must lie in \(0,4\)"):
        ModelParams(eps=0.1, sigma=4.0)
    with pytest.raises(ValueError, match=r"sigma must lie in \(0,4\)"):
        ModelParams(eps=0.1, sigma=0.0)
    with pytest.raises(ValueError):
        ModelParams(eps=0.1, kappa=0.0)
    with pytest.raises(ValueError):
        ModelParams(eps=0.1, target_area=-1.0)
    with pytest.raises(ValueError):
        ModelParams(eps=0.1, c0=0.9)


def _setup(n=12, eps=0.3, h=None):
    g = Grid2D(nx=n, ny=n, h=h if h else 1.0 / n, origin=(0, 0))
    return g, rect_mask(g)


def _random_admissible(g, m, seed):
    rng = np.random.default_rng(seed)
    return admissible_field(g, m, rng.uniform(-1.0, 1.0, g.shape))


def test_pure_phase_report():
    # u = -1 everywhere: every term vanishes except the area penalty
    g, m = _setup()
    p = ModelParams(eps=0.2, sigma=2.0, kappa=1.0, target_area=3.0)
    u = constant_field(g, -1.0)
    assert s_eps(u, p, m) == 0.0
    assert w_eps(u, p, m) == 0.0
    pen, grad = area_penalty(u, p, m)
    assert pen == pytest.approx(0.2 ** (-2.0) * 9.0, rel=1e-14)
    assert np.all(grad.values == 0.0)
    rep = total_energy(u, p, m, BandPenalty(default_band_pairs()))
    assert rep.s_eps == 0.0 and rep.w_eps == 0.0 and rep.c_eps == 0.0
    assert rep.xi_signed == 0.0 and rep.xi_abs == 0.0
    assert rep.n_components == 0
    assert rep.total == pytest.approx(pen, rel=1e-14)


def test_chemical_potential_properties():
    g, m = _setup()
    p = ModelParams(eps=0.25, target_area=1.0)
    u = _random_admissible(g, m, 4)
    v = chemical_potential(u, p, m)
    assert np.all(v.values[~m.inside] == 0.0)
    assert np.all(chemical_potential(constant_field(g, -1.0), p, m).values == 0.0)


def test_s_eps_transpose_symmetry():
    g, m = _setup(n=10)
    p = ModelParams(eps=0.3, target_area=1.0)
    u = _random_admissible(g, m, 9)
    ut = ScalarField(g, u.values.T.copy())
    assert s_eps(u, p, m) == pytest.approx(s_eps(ut, p, m), rel=1e-14)


def test_s_eps_nonnegative_and_zero_only_at_wells():
    g, m = _setup()
    p = ModelParams(eps=0.2, target_area=1.0)
    for seed in range(5):
        u = _random_admissible(g, m, seed)
        assert s_eps(u, p, m) > 0.0
        assert w_eps(u, p, m) >= 0.0


def test_flat_layer_dimensional_reduction():
    """2D s_eps of an x-only profile equals height × 1D line energy.

    The line energy itself lands near 1 per transition once resolved.
    """
    eps = 0.05
    n = 160
    h = 2.0 / n
    g = Grid2D(nx=n, ny=24, h=h, origin=(-1, 0))
    m = full_mask(g)
    xs = g.xs()
    row = np.tanh(xs / (math.sqrt(2) * eps))  # single flat transition at x = 0
    u = ScalarField(g, np.tile(row, (24, 1)))
    p = ModelParams(eps=eps, target_area=1.0)

    d = np.diff(row)
    line = (0.5 * eps * np.sum(d * d) / h + h * np.sum(double_well(row)) / eps) / C0
    assert s_eps(u, p, m) == pytest.approx(24 * h * line, rel=1e-13)
    assert line == pytest.approx(1.0, rel=5e-3)


def _fd_grad(fun, u, m, cells, step=1e-6):
    out = {}
    for j, i in cells:
        up = u.copy()
        up.values[j, i] += step
        um = u.copy()
        um.values[j, i] -= step
        out[(j, i)] = (fun(up) - fun(um)) / (2 * step)
    return out


def _sample_cells(m, seed, count=25):
    rng = np.random.default_rng(seed)
    jj, ii = np.nonzero(m.inside)
    pick = rng.choice(len(jj), size=min(count, len(jj)), replace=False)
    return list(zip(jj[pick], ii[pick]))


def test_grad_s_eps_is_exact():
    # the edge-difference discretization makes this exact up to FD error
    g, m = _setup(n=12)
    p = ModelParams(eps=0.35, target_area=1.0)
    u = _random_admissible(g, m, 21)
    gs = grad_s_eps(u, p, m).values
    h2 = g.h * g.h
    fd = _fd_grad(lambda w: s_eps(w, p, m), u, m, _sample_cells(m, 1))
    for (j, i), val in fd.items():
        assert gs[j, i] * h2 == pytest.approx(val, rel=1e-7, abs=1e-10)


def test_grad_w_eps_matches_fd():
    g, m = _setup(n=12)
    p = ModelParams(eps=0.4, target_area=1.0)
    u = _random_admissible(g, m, 22)
    gw = grad_w_eps(u, p, m).values
    assert np.all(gw[~m.inside] == 0.0)
    h2 = g.h * g.h
    fd = _fd_grad(lambda w: w_eps(w, p, m), u, m, _sample_cells(m, 2), step=1e-6)
    scale = max(abs(v) for v in fd.values())
    for (j, i), val in fd.items():
        assert gw[j, i] * h2 == pytest.approx(val, abs=1e-6 * scale + 1e-9)


def test_area_penalty_value_and_gradient():
    g, m = _setup(n=12)
    p = ModelParams(eps=0.3, sigma=1.5, target_area=2.0)
    u = _random_admissible(g, m, 23)
    val, grad = area_penalty(u, p, m)
    s = s_eps(u, p, m)
    assert val == pytest.approx(0.3 ** (-1.5) * (s - 2.0) ** 2, rel=1e-14)
    h2 = g.h * g.h
    fd = _fd_grad(lambda w: area_penalty(w, p, m)[0], u, m, _sample_cells(m, 3))
    scale = max(abs(v) for v in fd.values())
    for (j, i), v in fd.items():
        assert grad.values[j, i] * h2 == pytest.approx(v, abs=1e-6 * scale + 1e-12)


def test_discrepancy_order_relations():
    g, m = _setup()
    p = ModelParams(eps=0.25, target_area=1.0)
    u = _random_admissible(g, m, 30)
    xi_signed, xi_plus, xi_abs = discrepancy(u, p, m)
    assert xi_plus >= 0.0
    assert xi_abs >= xi_plus >= 0.0
    assert xi_abs >= abs(xi_signed) - 1e-15


def test_discrepancy_small_on_recovery():
    n, eps = 200, 0.04
    g = Grid2D(nx=n, ny=n, h=2.0 / n, origin=(-1, -1))
    m = disc_mask(g)
    p = ModelParams(eps=eps, target_area=1.0)
    u = build_recovery(Circle((0, 0), 0.25), p, g, m, delta=0.2)
    xi_signed, _, xi_abs = discrepancy(u, p, m)
    s = s_eps(u, p, m)
    assert xi_abs / s < 0.05
    assert abs(xi_signed) <= xi_abs


def test_total_energy_composition():
    n = 96
    g = Grid2D(nx=n, ny=n, h=2.0 / n, origin=(-1, -1))
    m = disc_mask(g)
    p = ModelParams(eps=0.0625, sigma=2.0, kappa=1.5, target_area=1.0)
    u = build_recovery(TwoCircles((-0.3, 0), 0.15, (0.3, 0), 0.15), p, g, m)
    bands = BandPenalty(default_band_pairs())
    rep = total_energy(u, p, m, bands)
    assert rep.c_eps > 0.0
    assert rep.n_components == 2
    want = rep.w_eps + rep.area_penalty + 0.0625 ** (-1.5) * rep.c_eps
    assert rep.total == pytest.approx(want, rel=1e-14)
    assert rep.area_penalty == pytest.approx(
        0.0625 ** (-2.0) * (rep.s_eps - 1.0) ** 2, rel=1e-12
    )
