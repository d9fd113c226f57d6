"""File formats: field CSV/PGM snapshots, energy time series, Hausdorff helper.

All floating text uses 17 significant digits so CSV round trips are
bit-identical. PGM snapshots are binary P5, maxval 255, with the linear
map v ↦ round(255·(clamp(v,−1,1)+1)/2) and the top pixel row at max y.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .grid import Grid2D, ScalarField

FLOAT_FMT = "%.17g"


def write_field_csv(u: ScalarField, path) -> None:
    """Row-major cell values, one grid row per line, ascending y."""
    np.savetxt(path, u.values, fmt=FLOAT_FMT, delimiter=",")


def read_field_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))


def write_field_pgm(u: ScalarField, path) -> None:
    v = np.clip(u.values, -1.0, 1.0)
    img = np.rint(255.0 * (v + 1.0) / 2.0).astype(np.uint8)
    img = np.flipud(img)  # raster order: top row first = max y
    ny, nx = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        f.write(img.tobytes())


def read_field_pgm(path) -> np.ndarray:
    """8-bit pixel values, flipped back to ascending-y row order."""
    with open(path, "rb") as f:
        magic = f.readline().split()
        if magic[:1] != [b"P5"]:
            raise DomainError(f"{path}: not a binary PGM")
        dims = f.readline().split()
        nx, ny = int(dims[0]), int(dims[1])
        maxval = int(f.readline())
        if maxval != 255:
            raise DomainError(f"{path}: expected maxval 255, got {maxval}")
        data = np.frombuffer(f.read(nx * ny), dtype=np.uint8).reshape(ny, nx)
    return np.flipud(data)


def write_snapshot(u: ScalarField, base_path) -> None:
    """Write <base>.csv and <base>.pgm."""
    base = str(base_path)
    write_field_csv(u, base + ".csv")
    write_field_pgm(u, base + ".pgm")


@dataclass(frozen=True)
class SeriesRow:
    step: int
    time: float
    s_eps: float
    w_eps: float
    area_penalty: float
    c_eps: float
    total: float
    xi_abs: float
    n_components: int


SERIES_HEADER = "step,time,s_eps,w_eps,area_penalty,c_eps,total,xi_abs,n_components"


def _format_row(r: SeriesRow) -> str:
    floats = (r.time, r.s_eps, r.w_eps, r.area_penalty, r.c_eps, r.total, r.xi_abs)
    return ",".join([str(r.step)] + [FLOAT_FMT % x for x in floats] + [str(r.n_components)])


class SeriesWriter:
    """Appends one CSV row per energy log; flushed after every row."""

    def __init__(self, path):
        self._f = open(path, "w", encoding="ascii")
        self._f.write(SERIES_HEADER + "\n")
        self._f.flush()

    def write(self, row: SeriesRow) -> None:
        self._f.write(_format_row(row) + "\n")
        self._f.flush()

    def flush(self) -> None:
        self._f.flush()

    def close(self) -> None:
        self._f.close()


def write_series(rows, path) -> None:
    w = SeriesWriter(path)
    try:
        for r in rows:
            w.write(r)
    finally:
        w.close()


def read_series(path) -> list[SeriesRow]:
    rows = []
    with open(path, encoding="ascii") as f:
        header = f.readline().strip()
        if header != SERIES_HEADER:
            raise DomainError(f"{path}: unexpected series header {header!r}")
        for line in f:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            rows.append(
                SeriesRow(
                    step=int(parts[0]),
                    time=float(parts[1]),
                    s_eps=float(parts[2]),
                    w_eps=float(parts[3]),
                    area_penalty=float(parts[4]),
                    c_eps=float(parts[5]),
                    total=float(parts[6]),
                    xi_abs=float(parts[7]),
                    n_components=int(parts[8]),
                )
            )
    return rows


def cells_to_points(cells: np.ndarray, grid: Grid2D) -> np.ndarray:
    """(n, 2) array of cell-center coordinates of the True cells."""
    jj, ii = np.nonzero(cells)
    xs = grid.origin[0] + (ii + 0.5) * grid.h
    ys = grid.origin[1] + (jj + 0.5) * grid.h
    return np.column_stack([xs, ys])


def hausdorff_distance(a, b, grid: Grid2D | None = None) -> float:
    """Symmetric Hausdorff distance between two point sets.

    Each argument is either an (n, 2) coordinate array or a boolean cell
    mask (then `grid` is required to place cell centers).
    """

    def as_points(x):
        x = np.asarray(x)
        if x.dtype == np.bool_:
            if grid is None:
                raise DomainError("boolean cell sets need the grid argument")
            return cells_to_points(x, grid)
        return x.reshape(-1, 2).astype(np.float64)

    pa, pb = as_points(a), as_points(b)
    if pa.shape[0] == 0 or pb.shape[0] == 0:
        raise DomainError("hausdorff_distance needs nonempty point sets")
    d_ab = np.max(cKDTree(pb).query(pa)[0])
    d_ba = np.max(cKDTree(pa).query(pb)[0])
    return float(max(d_ab, d_ba))
