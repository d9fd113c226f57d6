"""Grid, mask, and stencil operators against brute-force loop oracles."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conwill import (
    COLLAR,
    DomainMask,
    Grid2D,
    ScalarField,
    ShapeError,
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


def _random_field(grid, seed, lo=-1.0, hi=1.0):
    rng = np.random.default_rng(seed)
    return ScalarField(grid, rng.uniform(lo, hi, grid.shape))


def _stored(v, j, i):
    """Read with edge replication, matching the ghost convention."""
    ny, nx = v.shape
    return v[min(max(j, 0), ny - 1), min(max(i, 0), nx - 1)]


def oracle_laplacian(v, inside, h):
    ny, nx = v.shape
    out = np.zeros_like(v)
    for j in range(ny):
        for i in range(nx):
            if not inside[j, i]:
                continue
            s = (
                _stored(v, j, i + 1)
                + _stored(v, j, i - 1)
                + _stored(v, j + 1, i)
                + _stored(v, j - 1, i)
                - 4.0 * v[j, i]
            )
            out[j, i] = s / (h * h)
    return out


def oracle_grad_norm_sq(v, inside, h):
    ny, nx = v.shape
    out = np.zeros_like(v)
    for j in range(ny):
        for i in range(nx):
            if not inside[j, i]:
                continue
            gx = (_stored(v, j, i + 1) - _stored(v, j, i - 1)) / (2 * h)
            gy = (_stored(v, j + 1, i) - _stored(v, j - 1, i)) / (2 * h)
            out[j, i] = gx * gx + gy * gy
    return out


def oracle_dirichlet(v):
    ny, nx = v.shape
    total = 0.0
    for j in range(ny):
        for i in range(nx - 1):
            total += (v[j, i + 1] - v[j, i]) ** 2
    for j in range(ny - 1):
        for i in range(nx):
            total += (v[j + 1, i] - v[j, i]) ** 2
    return total


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2D(nx=2, ny=8, h=0.1)
    with pytest.raises(ValueError):
        Grid2D(nx=8, ny=8, h=0.0)


def test_cell_centers():
    g = Grid2D(nx=4, ny=3, h=0.5, origin=(1.0, -2.0))
    X, Y = g.cell_centers()
    assert X.shape == (3, 4)
    assert X[0, 0] == 1.25 and X[0, 3] == 2.75
    assert Y[0, 0] == -1.75 and Y[2, 0] == -0.75
    # index [j, i]: j moves y, i moves x
    assert X[1, 2] == g.xs()[2] and Y[1, 2] == g.ys()[1]


def test_mask_factories():
    g = Grid2D(nx=10, ny=10, h=0.2, origin=(-1, -1))
    m = disc_mask(g, (0.0, 0.0), 0.7)
    assert not m.inside[:COLLAR].any() and not m.inside[:, -COLLAR:].any()
    X, Y = g.cell_centers()
    r = np.hypot(X, Y)
    assert np.all(r[m.inside] <= 0.7)
    assert rect_mask(g).n_inside == (10 - 2 * COLLAR) ** 2
    assert full_mask(g).n_inside == 100


def test_mask_dtype_check():
    with pytest.raises(ValueError):
        DomainMask(np.ones((4, 4)))


def test_field_shape_check():
    g = Grid2D(nx=5, ny=4, h=0.1)
    with pytest.raises(ShapeError):
        ScalarField(g, np.zeros((5, 4)))  # transposed


def test_admissible_field_outside_value():
    g = Grid2D(nx=12, ny=12, h=0.2, origin=(-1.2, -1.2))
    m = disc_mask(g, radius=1.0)
    u = admissible_field(g, m, np.full(g.shape, 0.3))
    assert np.all(u.values[~m.inside] == -1.0)
    assert np.all(u.values[m.inside] == 0.3)


@pytest.mark.parametrize("mask_kind", ["rect", "disc", "full"])
def test_laplacian_matches_oracle(mask_kind):
    g = Grid2D(nx=9, ny=7, h=0.3, origin=(-1.4, -1.1))
    m = {"rect": rect_mask(g), "disc": disc_mask(g, radius=0.9), "full": full_mask(g)}[
        mask_kind
    ]
    u = _random_field(g, seed=3)
    got = laplacian(u, m).values
    want = oracle_laplacian(u.values, m.inside, g.h)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-13)
    assert np.all(got[~m.inside] == 0.0)


def test_laplacian_constant_is_zero():
    g = Grid2D(nx=8, ny=8, h=0.1)
    for mask in (full_mask(g), rect_mask(g), disc_mask(g, radius=0.35)):
        u = constant_field(g, -1.0)
        assert np.all(laplacian(u, mask).values == 0.0)
        u2 = constant_field(g, 0.7)
        assert np.abs(laplacian(u2, full_mask(g)).values).max() == 0.0


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(-3, 3, allow_nan=False),
    b=st.floats(-3, 3, allow_nan=False),
    seed=st.integers(0, 2**31),
)
def test_laplacian_linearity(a, b, seed):
    g = Grid2D(nx=7, ny=6, h=0.25)
    m = full_mask(g)
    rng = np.random.default_rng(seed)
    u = ScalarField(g, rng.standard_normal(g.shape))
    v = ScalarField(g, rng.standard_normal(g.shape))
    lin = ScalarField(g, a * u.values + b * v.values)
    lhs = laplacian(lin, m).values
    rhs = a * laplacian(u, m).values + b * laplacian(v, m).values
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10)


def test_laplacian_purity():
    g = Grid2D(nx=6, ny=6, h=0.5)
    u = _random_field(g, seed=11)
    before = u.values.copy()
    laplacian(u, rect_mask(g))
    np.testing.assert_array_equal(u.values, before)


def test_grad_norm_sq_matches_oracle():
    g = Grid2D(nx=8, ny=9, h=0.17, origin=(0.0, 0.0))
    m = rect_mask(g)
    u = _random_field(g, seed=5)
    got = grad_norm_sq(u, m).values
    want = oracle_grad_norm_sq(u.values, m.inside, g.h)
    np.testing.assert_allclose(got, want, rtol=0, atol=1e-13)


def test_dirichlet_form_matches_oracle():
    g = Grid2D(nx=7, ny=5, h=0.2)
    u = _random_field(g, seed=7)
    assert dirichlet_form(u) == pytest.approx(oracle_dirichlet(u.values), rel=1e-14)


def test_dirichlet_gradient_is_laplacian():
    """Per-cell derivative of the edge-difference form equals −2h²·laplacian.

    Exactness at every cell, array edges included, is what makes the
    analytic first variation of the diffuse perimeter match finite
    differences to round-off.
    """
    g = Grid2D(nx=7, ny=6, h=0.3)
    m = full_mask(g)
    u = _random_field(g, seed=13)
    lap = laplacian(u, m).values
    ny, nx = g.shape
    for j in range(ny):
        for i in range(nx):
            grad = 0.0  # exact derivative: sum of 2(u_p - u_q) over in-array q
            for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
                jj, ii = j + dj, i + di
                if 0 <= jj < ny and 0 <= ii < nx:
                    grad += 2.0 * (u.values[j, i] - u.values[jj, ii])
            assert grad == pytest.approx(-2.0 * g.h**2 * lap[j, i], abs=1e-12)


def test_integrate():
    g = Grid2D(nx=6, ny=4, h=0.5)
    m = rect_mask(g)
    f = _random_field(g, seed=2)
    want = sum(
        f.values[j, i] * g.h * g.h
        for j in range(4)
        for i in range(6)
        if m.inside[j, i]
    )
    assert integrate(f, m) == pytest.approx(want, rel=1e-14)
    assert integrate(constant_field(g, 1.0), m) == pytest.approx(
        m.n_inside * g.h * g.h, rel=1e-14
    )
