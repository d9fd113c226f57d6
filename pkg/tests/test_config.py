"""Config parsing, validation, and the resolved-document round trip."""
import dataclasses

import pytest

from conwill import (
    Circle,
    ConfigError,
    TwoCircles,
    build_mask,
    default_band_pairs,
    parse_config,
    render_resolved,
)


def failures_of(text):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    return err.value.failures


def test_empty_document_yields_defaults():
    cfg = parse_config("")
    assert (cfg.grid.nx, cfg.grid.ny) == (256, 256)
    assert cfg.grid.h == 2.0 / 256.0
    assert cfg.grid.origin == (-1.0, -1.0)
    assert cfg.mask_kind == "disc" and cfg.mask_radius == 1.0
    assert cfg.eps == 1.5e-2 and cfg.sigma == 2.0 and cfg.kappa == 1.0
    assert cfg.target_area is None  # auto
    assert cfg.shape == Circle((0.0, 0.0), 0.25)
    assert cfg.delta == 0.2  # from the default circle's radius
    assert cfg.flow.tau == 1.5e-2 * 1e-5  # auto: eps * 1e-5
    assert cfg.flow.max_steps == 1000
    assert cfg.band_pairs == tuple(default_band_pairs())
    assert cfg.penalty_on is True and cfg.subgradient_mode == "full"
    assert cfg.output_dir == "out" and cfg.seed == 0


def test_comments_and_whitespace():
    cfg = parse_config(
        """
        # leading comment
          model.eps = 0.02   # trailing comment

        topo.penalty = off
        """
    )
    assert cfg.eps == 0.02
    assert cfg.penalty_on is False
    assert cfg.flow.tau == pytest.approx(2e-7)  # auto follows eps


def test_sigma_range_message_is_exact():
    assert failures_of("model.sigma = 5") == ["model.sigma: sigma must lie in (0,4)"]
    assert failures_of("model.sigma = 0") == ["model.sigma: sigma must lie in (0,4)"]


def test_all_violations_are_collected():
    fails = failures_of(
        "model.eps = -1\nmodel.sigma = 7\nnosuch.key = 3\nflow.tau = 0\n"
    )
    assert len(fails) == 4
    assert any("model.eps" in f for f in fails)
    assert any("model.sigma" in f for f in fails)
    assert "unknown key: nosuch.key" in fails
    assert any("flow.tau" in f for f in fails)


def test_malformed_lines():
    fails = failures_of("just words\nnodot = 3\nmodel.eps =\n")
    assert len(fails) == 3
    assert all("expected `section.key = value`" in f for f in fails)


def test_duplicate_key():
    assert failures_of("model.eps = 0.1\nmodel.eps = 0.2\n") == [
        "duplicate key: model.eps"
    ]


def test_type_errors():
    assert failures_of("grid.nx = 12.5") == ["grid.nx: expected an integer, got '12.5'"]
    assert failures_of("model.eps = tiny") == [
        "model.eps: expected a number, got 'tiny'"
    ]
    assert failures_of("topo.penalty = true") == [
        "topo.penalty: expected on or off, got 'true'"
    ]
    assert failures_of("flow.tau = soon") == [
        "flow.tau: expected a number or `auto`, got 'soon'"
    ]


def test_grid_and_mode_validation():
    assert failures_of("grid.nx = 2") == ["grid.nx: must be at least 3, got 2"]
    assert failures_of("topo.mode = both") == [
        "topo.mode: expected one of frozen, full, got 'both'"
    ]
    assert failures_of("domain.mask = ball") == [
        "domain.mask: expected one of disc, rect, full, got 'ball'"
    ]


def test_shape_selection_and_validation():
    cfg = parse_config(
        "shape.type = two_circles\nshape.c1x = -0.3\nshape.c2x = 0.3\n"
        "shape.r1 = 0.2\nshape.r2 = 0.1\n"
    )
    assert cfg.shape == TwoCircles((-0.3, 0.0), 0.2, (0.3, 0.0), 0.1)
    # overlap is rejected with the shape's own message
    fails = failures_of(
        "shape.type = two_circles\nshape.c1x = -0.05\nshape.c2x = 0.05\n"
    )
    assert len(fails) == 1 and fails[0].startswith("shape: ")
    # keys of unselected shapes are accepted silently
    cfg = parse_config("shape.width = 0.4\n")
    assert cfg.shape == Circle((0.0, 0.0), 0.25)


def test_band_sections_replace_defaults():
    cfg = parse_config(
        "band1.rho1 = 0.1\nband1.rho2 = 0.7\nband1.plateau = 2.5\n"
        "band2.rho1 = -0.7\nband2.rho2 = -0.1\n"
    )
    assert len(cfg.band_pairs) == 2
    w1, w2 = cfg.band_pairs[0].wspec, cfg.band_pairs[1].wspec
    assert (w1.rho1, w1.rho2, w1.plateau) == (0.1, 0.7, 2.5)
    assert (w2.rho1, w2.rho2, w2.plateau) == (-0.7, -0.1, 1.0)  # default plateau


def test_band_section_errors():
    assert failures_of("band1.rho1 = 0.1\nband1.rho2 = 0.7\nband3.rho1 = 0.1\nband3.rho2 = 0.5\n") == [
        "band sections must be numbered band1..bandK without gaps"
    ]
    assert failures_of("band1.rho1 = 0.1\n") == [
        "band1.rho2: required when band1 is present"
    ]
    fails = failures_of("band1.rho1 = 0.9\nband1.rho2 = 0.2\n")
    assert len(fails) == 1 and fails[0].startswith("band1: ")
    assert failures_of("band1.rho1 = 0.1\nband1.rho2 = 0.7\nband1.width = 2\n") == [
        "unknown key: band1.width"
    ]


def test_params_materialization():
    cfg = parse_config("")  # target_area auto
    with pytest.raises(ValueError):
        cfg.params()
    p = cfg.params(target_area=1.7)
    assert p.target_area == 1.7 and p.eps == cfg.eps
    cfg2 = parse_config("model.target_area = 2.5\n")
    assert cfg2.params(target_area=9.0).target_area == 2.5  # explicit wins


def test_build_mask_kinds():
    base = parse_config("grid.nx = 32\ngrid.ny = 32\n")
    disc = build_mask(base)
    full = build_mask(dataclasses.replace(base, mask_kind="full"))
    rect = build_mask(dataclasses.replace(base, mask_kind="rect"))
    assert disc.n_inside < rect.n_inside < full.n_inside
    assert full.n_inside == 32 * 32


def test_resolved_round_trip_from_defaults():
    cfg = parse_config("")
    with pytest.raises(ValueError):
        render_resolved(cfg)  # auto target area needs the measured value
    doc = render_resolved(cfg, target_area=1.7)
    again = parse_config(doc)
    assert again == dataclasses.replace(cfg, target_area=1.7)
    # a second render is a fixed point
    assert render_resolved(again) == doc


def test_resolved_round_trip_explicit():
    text = (
        "grid.nx = 96\ngrid.ny = 80\ngrid.h = 0.017\n"
        "domain.mask = rect\n"
        "model.eps = 0.031\nmodel.sigma = 1.3\nmodel.kappa = 0.7\n"
        "model.target_area = 0.9424777960769379\n"
        "profile.delta = 0.11\n"
        "shape.type = dumbbell\nshape.c1x = -0.4\nshape.c2x = 0.4\n"
        "shape.r1 = 0.25\nshape.r2 = 0.25\nshape.neck_halfwidth = 0.022\n"
        "flow.tau = 3.1e-7\nflow.max_steps = 77\n"
        "band1.rho1 = 0.2\nband1.rho2 = 0.8\nband1.plateau = 4\n"
        "topo.mode = frozen\noutput.dir = results\nrun.seed = 5\n"
    )
    cfg = parse_config(text)
    assert parse_config(render_resolved(cfg)) == cfg
