"""Command line entry points.

Subcommands:

  run <config>               integrate the flow, writing series + snapshots
  energy <config> <field>    print the energy report of a stored field
  distance <config> <field>  dump per-component geodesic distance fields
  recovery <config>          write the configured initial field and report it

Exit codes: 0 success, 1 configuration error, 2 runtime or solver error.

When model.target_area is auto it resolves to the measured perimeter of
the field at hand: the initial field for run/recovery, the loaded field
for energy/distance.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import RunConfig, build_mask, parse_config, render_resolved
from .energy import EnergyReport, ModelParams, s_eps, total_energy
from .errors import ConfigError, ConwillError
from .figures import plot_field, plot_series
from .flow import FlowDriver
from .grid import DomainMask, Grid2D, ScalarField
from .io import FLOAT_FMT, SeriesRow, SeriesWriter, read_field_csv, write_snapshot
from .profiles import build_recovery
from .topology import BandPenalty, geodesic_from_component, label_components, weight_F

REPORT_HEADER = "s_eps,w_eps,area_penalty,c_eps,total,xi_signed,xi_plus,xi_abs,n_components"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="conwill", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, extra in (
        ("run", ()),
        ("energy", ("field",)),
        ("distance", ("field",)),
        ("recovery", ()),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("config")
        for arg in extra:
            sp.add_argument(arg)
    return p


def _read_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError([f"cannot read config {path}: {e}"])
    return parse_config(text)


def _load_field(cfg: RunConfig, path: str) -> ScalarField:
    try:
        values = read_field_csv(path)
    except OSError as e:
        raise ConfigError([f"cannot read field {path}: {e}"])
    return ScalarField(cfg.grid, values)


def _initial_field(cfg: RunConfig, grid: Grid2D, mask: DomainMask) -> ScalarField:
    provisional = ModelParams(
        eps=cfg.eps, sigma=cfg.sigma, kappa=cfg.kappa, target_area=1.0
    )
    return build_recovery(cfg.shape, provisional, grid, mask, delta=cfg.delta)


def _materialized_params(cfg: RunConfig, u: ScalarField, mask: DomainMask) -> ModelParams:
    if cfg.target_area is not None:
        return cfg.params()
    provisional = ModelParams(
        eps=cfg.eps, sigma=cfg.sigma, kappa=cfg.kappa, target_area=1.0
    )
    return cfg.params(target_area=s_eps(u, provisional, mask))


def _print_report(r: EnergyReport) -> None:
    floats = (
        r.s_eps, r.w_eps, r.area_penalty, r.c_eps,
        r.total, r.xi_signed, r.xi_plus, r.xi_abs,
    )
    print(REPORT_HEADER)
    print(",".join([FLOAT_FMT % x for x in floats] + [str(r.n_components)]))


class _RunSink:
    """Streams series rows to disk and snapshots fields as the run advances."""

    def __init__(self, outdir: str, series_path: str):
        self.outdir = outdir
        self.snapdir = os.path.join(outdir, "snapshots")
        os.makedirs(self.snapdir, exist_ok=True)
        self.writer = SeriesWriter(series_path)
        self.rows: list[SeriesRow] = []
        self.last_state = None

    def on_log(self, state, report) -> None:
        row = SeriesRow(
            step=state.step,
            time=state.t,
            s_eps=report.s_eps,
            w_eps=report.w_eps,
            area_penalty=report.area_penalty,
            c_eps=report.c_eps,
            total=report.total,
            xi_abs=report.xi_abs,
            n_components=report.n_components,
        )
        self.rows.append(row)
        self.writer.write(row)

    def on_snapshot(self, state) -> None:
        base = os.path.join(self.snapdir, f"step_{state.step:08d}")
        write_snapshot(state.u, base)
        self.last_state = state

    def flush(self) -> None:
        self.writer.flush()


def cmd_run(cfg: RunConfig) -> int:
    grid, mask = cfg.grid, build_mask(cfg)
    u0 = _initial_field(cfg, grid, mask)
    params = _materialized_params(cfg, u0, mask)

    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "resolved-config.txt"), "w") as f:
        f.write(render_resolved(cfg, target_area=params.target_area))

    bands = BandPenalty(list(cfg.band_pairs))
    driver = FlowDriver(
        grid, mask, params, cfg.flow, bands,
        penalty_on=cfg.penalty_on,
        subgradient_mode=cfg.subgradient_mode,
    )
    sink = _RunSink(cfg.output_dir, os.path.join(cfg.output_dir, "series.csv"))
    try:
        state = driver.run(u0, sinks=(sink,))
    finally:
        sink.writer.close()

    write_snapshot(state.u, os.path.join(cfg.output_dir, "final"))
    plot_field(state.u, os.path.join(cfg.output_dir, "final.png"),
               title=f"step {state.step}")
    plot_series(sink.rows, os.path.join(cfg.output_dir, "energy.png"))
    _print_report(state.report)
    return 0


def cmd_energy(cfg: RunConfig, field_path: str) -> int:
    mask = build_mask(cfg)
    u = _load_field(cfg, field_path)
    params = _materialized_params(cfg, u, mask)
    bands = BandPenalty(list(cfg.band_pairs))
    _print_report(total_energy(u, params, mask, bands))
    return 0


def cmd_distance(cfg: RunConfig, field_path: str) -> int:
    mask = build_mask(cfg)
    u = _load_field(cfg, field_path)
    os.makedirs(cfg.output_dir, exist_ok=True)
    for i, pair in enumerate(cfg.band_pairs, start=1):
        labeling = label_components(u, mask, pair.wspec)
        positive = [k for k in range(1, labeling.n_components + 1)
                    if labeling.masses[k] > 0.0]
        print(f"band{i}: {labeling.n_components} components, "
              f"{len(positive)} with positive mass")
        if len(positive) < 2:
            continue
        weights = ScalarField(u.grid, weight_F(u.values, pair.wspec))
        for k in positive:
            geo = geodesic_from_component(k, labeling, weights, u.grid)
            path = os.path.join(cfg.output_dir, f"distance_band{i}_comp{k}.csv")
            np.savetxt(path, geo.d, fmt=FLOAT_FMT, delimiter=",")
            print(f"  wrote {path}")
    return 0


def cmd_recovery(cfg: RunConfig) -> int:
    grid, mask = cfg.grid, build_mask(cfg)
    u0 = _initial_field(cfg, grid, mask)
    params = _materialized_params(cfg, u0, mask)
    os.makedirs(cfg.output_dir, exist_ok=True)
    base = os.path.join(cfg.output_dir, "initial")
    write_snapshot(u0, base)
    plot_field(u0, base + ".png", title="initial field")
    bands = BandPenalty(list(cfg.band_pairs))
    _print_report(total_energy(u0, params, mask, bands))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _read_config(args.config)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "energy":
            return cmd_energy(cfg, args.field)
        if args.command == "distance":
            return cmd_distance(cfg, args.field)
        return cmd_recovery(cfg)
    except _UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except ConfigError as e:
        for failure in e.failures:
            print(f"config error: {failure}", file=sys.stderr)
        return 1
    except ConwillError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
