"""Run configuration: `section.key = value` documents.

Grammar: one `section.key = value` assignment per line; `#` starts a
comment anywhere; blank lines are ignored. An empty document yields the
all-defaults configuration. Every violation is collected and reported
with its key path in a single ConfigError.

Sections and keys (defaults in parentheses):

  grid.nx (256)  grid.ny (256)  grid.h (2/256)
  grid.origin_x (-1)  grid.origin_y (-1)
  domain.mask = disc|rect|full (disc)  domain.radius (1)  domain.cx (0)  domain.cy (0)
  model.eps (1.5e-2)  model.sigma (2)  model.kappa (1)
  model.target_area = auto|number (auto: perimeter of the initial field)
  profile.delta = auto|number (auto: from the shape's feature size)
  shape.type = circle|two_circles|stripe|dumbbell (circle)
    circle:      shape.cx (0) shape.cy (0) shape.radius (0.25)
    two_circles: shape.c1x shape.c1y shape.r1 shape.c2x shape.c2y shape.r2
    stripe:      shape.normal_x shape.normal_y shape.offset shape.width
    dumbbell:    shape.c1x shape.c1y shape.r1 shape.c2x shape.c2y shape.r2
                 shape.neck_halfwidth
  flow.tau = auto|number (auto: eps * 1e-5)  flow.max_steps (1000)
  flow.solver_tol (1e-8)  flow.solver_max_iter (500)
  flow.geodesic_stride (1)  flow.snapshot_stride (1000)  flow.energy_log_stride (10)
  topo.penalty = on|off (on)  topo.mode = frozen|full (full)
  band<N>.rho1  band<N>.rho2  band<N>.plateau (1); sections numbered band1..bandK,
    replacing the default bands (0.2, 0.8) and (-0.8, -0.2) when present
  output.dir (out)
  run.seed (0, reserved)

Shape keys for types other than the selected one are accepted and
ignored, so one document can carry several shape blocks.
"""
from __future__ import annotations

from dataclasses import dataclass

from .energy import ModelParams
from .errors import ConfigError
from .flow import FlowConfig
from .grid import DomainMask, Grid2D, disc_mask, full_mask, rect_mask
from .profiles import Circle, Dumbbell, Shape, Stripe, TwoCircles, default_delta
from .topology import BandPair, BumpSpec, WeightSpec, default_band_pairs

FLOAT_FMT = "%.17g"

_MASK_KINDS = ("disc", "rect", "full")
_SHAPE_TYPES = ("circle", "two_circles", "stripe", "dumbbell")
_MODES = ("frozen", "full")

# key path -> (kind, default); kind: int | float | str | autofloat | onoff
_KEYS = {
    "grid.nx": ("int", 256),
    "grid.ny": ("int", 256),
    "grid.h": ("float", 2.0 / 256.0),
    "grid.origin_x": ("float", -1.0),
    "grid.origin_y": ("float", -1.0),
    "domain.mask": ("str", "disc"),
    "domain.radius": ("float", 1.0),
    "domain.cx": ("float", 0.0),
    "domain.cy": ("float", 0.0),
    "model.eps": ("float", 1.5e-2),
    "model.sigma": ("float", 2.0),
    "model.kappa": ("float", 1.0),
    "model.target_area": ("autofloat", None),
    "profile.delta": ("autofloat", None),
    "shape.type": ("str", "circle"),
    "shape.cx": ("float", 0.0),
    "shape.cy": ("float", 0.0),
    "shape.radius": ("float", 0.25),
    "shape.c1x": ("float", -0.25),
    "shape.c1y": ("float", 0.0),
    "shape.r1": ("float", 0.15),
    "shape.c2x": ("float", 0.25),
    "shape.c2y": ("float", 0.0),
    "shape.r2": ("float", 0.15),
    "shape.normal_x": ("float", 0.0),
    "shape.normal_y": ("float", 1.0),
    "shape.offset": ("float", 0.0),
    "shape.width": ("float", 0.3),
    "shape.neck_halfwidth": ("float", 0.08),
    "flow.tau": ("autofloat", None),
    "flow.max_steps": ("int", 1000),
    "flow.solver_tol": ("float", 1e-8),
    "flow.solver_max_iter": ("int", 500),
    "flow.geodesic_stride": ("int", 1),
    "flow.snapshot_stride": ("int", 1000),
    "flow.energy_log_stride": ("int", 10),
    "topo.penalty": ("onoff", True),
    "topo.mode": ("str", "full"),
    "output.dir": ("str", "out"),
    "run.seed": ("int", 0),
}


@dataclass(frozen=True)
class RunConfig:
    grid: Grid2D
    mask_kind: str
    mask_center: tuple[float, float]
    mask_radius: float
    eps: float
    sigma: float
    kappa: float
    target_area: float | None  # None: resolve against the initial field
    delta: float
    shape: Shape
    flow: FlowConfig
    band_pairs: tuple[BandPair, ...]
    penalty_on: bool
    subgradient_mode: str
    output_dir: str
    seed: int

    def params(self, target_area: float | None = None) -> ModelParams:
        """ModelParams with the target area materialized.

        `target_area` overrides only when the config says auto.
        """
        area = self.target_area
        if area is None:
            area = target_area
        if area is None:
            raise ValueError(
                "target_area is auto; pass the measured perimeter of the initial field"
            )
        return ModelParams(
            eps=self.eps, sigma=self.sigma, kappa=self.kappa, target_area=area
        )


def build_mask(cfg: RunConfig) -> DomainMask:
    if cfg.mask_kind == "disc":
        return disc_mask(cfg.grid, cfg.mask_center, cfg.mask_radius)
    if cfg.mask_kind == "rect":
        return rect_mask(cfg.grid)
    return full_mask(cfg.grid)


def _parse_lines(text: str, fail):
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            fail(f"line {lineno}: expected `section.key = value`, got {raw.strip()!r}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if "." not in key or not val:
            fail(f"line {lineno}: expected `section.key = value`, got {raw.strip()!r}")
            continue
        if key in values:
            fail(f"duplicate key: {key}")
            continue
        values[key] = val
    return values


def _convert(key: str, kind: str, raw: str, fail):
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            fail(f"{key}: expected an integer, got {raw!r}")
            return None
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            fail(f"{key}: expected a number, got {raw!r}")
            return None
    if kind == "autofloat":
        if raw == "auto":
            return None
        try:
            return float(raw)
        except ValueError:
            fail(f"{key}: expected a number or `auto`, got {raw!r}")
            return None
    if kind == "onoff":
        if raw in ("on", "off"):
            return raw == "on"
        fail(f"{key}: expected on or off, got {raw!r}")
        return None
    return raw


def _band_sections(values: dict[str, str], fail) -> tuple[BandPair, ...] | None:
    """Consume band<N>.* keys; None means no band sections were given."""
    import re

    specs: dict[int, dict[str, str]] = {}
    for key in list(values):
        section, _, field = key.partition(".")
        m = re.fullmatch(r"band([0-9]+)", section)
        if not m:
            continue
        raw = values.pop(key)
        if field not in ("rho1", "rho2", "plateau"):
            fail(f"unknown key: {key}")
            continue
        specs.setdefault(int(m.group(1)), {})[field] = raw
    if not specs:
        return None
    indices = sorted(specs)
    if indices != list(range(1, len(indices) + 1)):
        fail("band sections must be numbered band1..bandK without gaps")
        return None
    pairs = []
    for i in indices:
        sec = specs[i]
        vals = {}
        ok = True
        for field in ("rho1", "rho2"):
            if field not in sec:
                fail(f"band{i}.{field}: required when band{i} is present")
                ok = False
                continue
            v = _convert(f"band{i}.{field}", "float", sec[field], fail)
            if v is None:
                ok = False
            vals[field] = v
        plateau = _convert(f"band{i}.plateau", "float", sec.get("plateau", "1"), fail)
        if not ok or plateau is None:
            continue
        try:
            pairs.append(
                BandPair(
                    WeightSpec(vals["rho1"], vals["rho2"], plateau),
                    BumpSpec(vals["rho1"], vals["rho2"]),
                )
            )
        except ValueError as e:
            fail(f"band{i}: {e}")
    return tuple(pairs)


def _build_shape(get, fail) -> Shape | None:
    kind = get("shape.type")
    if kind not in _SHAPE_TYPES:
        fail(f"shape.type: expected one of {', '.join(_SHAPE_TYPES)}, got {kind!r}")
        return None
    try:
        if kind == "circle":
            return Circle((get("shape.cx"), get("shape.cy")), get("shape.radius"))
        if kind == "two_circles":
            return TwoCircles(
                (get("shape.c1x"), get("shape.c1y")),
                get("shape.r1"),
                (get("shape.c2x"), get("shape.c2y")),
                get("shape.r2"),
            )
        if kind == "stripe":
            return Stripe(
                (get("shape.normal_x"), get("shape.normal_y")),
                get("shape.offset"),
                get("shape.width"),
            )
        return Dumbbell(
            (get("shape.c1x"), get("shape.c1y")),
            get("shape.r1"),
            (get("shape.c2x"), get("shape.c2y")),
            get("shape.r2"),
            get("shape.neck_halfwidth"),
        )
    except ValueError as e:
        fail(f"shape: {e}")
        return None


def parse_config(text: str) -> RunConfig:
    failures: list[str] = []
    fail = failures.append

    raw = _parse_lines(text, fail)
    band_pairs = _band_sections(raw, fail)

    resolved = {}
    for key, (kind, default) in _KEYS.items():
        if key in raw:
            v = _convert(key, kind, raw.pop(key), fail)
            resolved[key] = default if v is None and kind != "autofloat" else v
        else:
            resolved[key] = default
    for key in sorted(raw):
        fail(f"unknown key: {key}")

    get = resolved.__getitem__

    for key in ("grid.nx", "grid.ny"):
        if get(key) < 3:
            fail(f"{key}: must be at least 3, got {get(key)}")
    if not get("grid.h") > 0:
        fail(f"grid.h: must be positive, got {get('grid.h')}")
    if get("domain.mask") not in _MASK_KINDS:
        fail(f"domain.mask: expected one of {', '.join(_MASK_KINDS)}, got {get('domain.mask')!r}")
    if not get("domain.radius") > 0:
        fail(f"domain.radius: must be positive, got {get('domain.radius')}")
    if not get("model.eps") > 0:
        fail(f"model.eps: must be positive, got {get('model.eps')}")
    if not 0.0 < get("model.sigma") < 4.0:
        fail("model.sigma: sigma must lie in (0,4)")
    if not get("model.kappa") > 0:
        fail(f"model.kappa: must be positive, got {get('model.kappa')}")
    area = get("model.target_area")
    if area is not None and not area > 0:
        fail(f"model.target_area: must be positive, got {area}")
    delta = get("profile.delta")
    if delta is not None and not delta > 0:
        fail(f"profile.delta: must be positive, got {delta}")
    tau = get("flow.tau")
    if tau is not None and not tau > 0:
        fail(f"flow.tau: must be positive, got {tau}")
    if get("flow.max_steps") < 0:
        fail(f"flow.max_steps: must be nonnegative, got {get('flow.max_steps')}")
    if not get("flow.solver_tol") > 0:
        fail(f"flow.solver_tol: must be positive, got {get('flow.solver_tol')}")
    if get("flow.solver_max_iter") < 1:
        fail(f"flow.solver_max_iter: must be at least 1, got {get('flow.solver_max_iter')}")
    for key in ("flow.geodesic_stride", "flow.snapshot_stride", "flow.energy_log_stride"):
        if get(key) < 1:
            fail(f"{key}: must be at least 1, got {get(key)}")
    if get("topo.mode") not in _MODES:
        fail(f"topo.mode: expected one of {', '.join(_MODES)}, got {get('topo.mode')!r}")

    shape = _build_shape(get, fail)

    if failures:
        raise ConfigError(failures)

    grid = Grid2D(
        nx=get("grid.nx"),
        ny=get("grid.ny"),
        h=get("grid.h"),
        origin=(get("grid.origin_x"), get("grid.origin_y")),
    )
    if delta is None:
        delta = default_delta(shape)
    if tau is None:
        tau = get("model.eps") * 1e-5
    flow = FlowConfig(
        tau=tau,
        max_steps=get("flow.max_steps"),
        solver_tol=get("flow.solver_tol"),
        solver_max_iter=get("flow.solver_max_iter"),
        geodesic_stride=get("flow.geodesic_stride"),
        snapshot_stride=get("flow.snapshot_stride"),
        energy_log_stride=get("flow.energy_log_stride"),
    )
    if band_pairs is None:
        band_pairs = tuple(default_band_pairs())
    return RunConfig(
        grid=grid,
        mask_kind=get("domain.mask"),
        mask_center=(get("domain.cx"), get("domain.cy")),
        mask_radius=get("domain.radius"),
        eps=get("model.eps"),
        sigma=get("model.sigma"),
        kappa=get("model.kappa"),
        target_area=area,
        delta=delta,
        shape=shape,
        flow=flow,
        band_pairs=band_pairs,
        penalty_on=get("topo.penalty"),
        subgradient_mode=get("topo.mode"),
        output_dir=get("output.dir"),
        seed=get("run.seed"),
    )


def _shape_lines(shape: Shape) -> list[str]:
    f = FLOAT_FMT
    if isinstance(shape, Circle):
        return [
            "shape.type = circle",
            f"shape.cx = {f % shape.center[0]}",
            f"shape.cy = {f % shape.center[1]}",
            f"shape.radius = {f % shape.radius}",
        ]
    if isinstance(shape, TwoCircles):
        return [
            "shape.type = two_circles",
            f"shape.c1x = {f % shape.c1[0]}",
            f"shape.c1y = {f % shape.c1[1]}",
            f"shape.r1 = {f % shape.r1}",
            f"shape.c2x = {f % shape.c2[0]}",
            f"shape.c2y = {f % shape.c2[1]}",
            f"shape.r2 = {f % shape.r2}",
        ]
    if isinstance(shape, Stripe):
        return [
            "shape.type = stripe",
            f"shape.normal_x = {f % shape.normal[0]}",
            f"shape.normal_y = {f % shape.normal[1]}",
            f"shape.offset = {f % shape.offset}",
            f"shape.width = {f % shape.width}",
        ]
    return [
        "shape.type = dumbbell",
        f"shape.c1x = {f % shape.c1[0]}",
        f"shape.c1y = {f % shape.c1[1]}",
        f"shape.r1 = {f % shape.r1}",
        f"shape.c2x = {f % shape.c2[0]}",
        f"shape.c2y = {f % shape.c2[1]}",
        f"shape.r2 = {f % shape.r2}",
        f"shape.neck_halfwidth = {f % shape.neck_halfwidth}",
    ]


def render_resolved(cfg: RunConfig, target_area: float | None = None) -> str:
    """Canonical document with every default and auto value materialized.

    Re-parsing the result reproduces the run bit-identically.
    """
    area = cfg.target_area if cfg.target_area is not None else target_area
    if area is None:
        raise ValueError("target_area is auto; pass the materialized value")
    f = FLOAT_FMT
    lines = [
        "# resolved configuration (all defaults materialized)",
        f"grid.nx = {cfg.grid.nx}",
        f"grid.ny = {cfg.grid.ny}",
        f"grid.h = {f % cfg.grid.h}",
        f"grid.origin_x = {f % cfg.grid.origin[0]}",
        f"grid.origin_y = {f % cfg.grid.origin[1]}",
        f"domain.mask = {cfg.mask_kind}",
        f"domain.radius = {f % cfg.mask_radius}",
        f"domain.cx = {f % cfg.mask_center[0]}",
        f"domain.cy = {f % cfg.mask_center[1]}",
        f"model.eps = {f % cfg.eps}",
        f"model.sigma = {f % cfg.sigma}",
        f"model.kappa = {f % cfg.kappa}",
        f"model.target_area = {f % area}",
        f"profile.delta = {f % cfg.delta}",
    ]
    lines += _shape_lines(cfg.shape)
    lines += [
        f"flow.tau = {f % cfg.flow.tau}",
        f"flow.max_steps = {cfg.flow.max_steps}",
        f"flow.solver_tol = {f % cfg.flow.solver_tol}",
        f"flow.solver_max_iter = {cfg.flow.solver_max_iter}",
        f"flow.geodesic_stride = {cfg.flow.geodesic_stride}",
        f"flow.snapshot_stride = {cfg.flow.snapshot_stride}",
        f"flow.energy_log_stride = {cfg.flow.energy_log_stride}",
        f"topo.penalty = {'on' if cfg.penalty_on else 'off'}",
        f"topo.mode = {cfg.subgradient_mode}",
    ]
    for i, pair in enumerate(cfg.band_pairs, start=1):
        lines += [
            f"band{i}.rho1 = {f % pair.wspec.rho1}",
            f"band{i}.rho2 = {f % pair.wspec.rho2}",
            f"band{i}.plateau = {f % pair.wspec.plateau}",
        ]
    lines += [
        f"output.dir = {cfg.output_dir}",
        f"run.seed = {cfg.seed}",
    ]
    return "\n".join(lines) + "\n"
