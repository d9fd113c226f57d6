"""Matplotlib renderings for the report path (field heatmaps, energy curves)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .grid import ScalarField


def plot_field(u: ScalarField, path, title: str | None = None) -> None:
    g = u.grid
    x0, y0 = g.origin
    extent = (x0, x0 + g.nx * g.h, y0, y0 + g.ny * g.h)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(
        u.values,
        origin="lower",
        extent=extent,
        cmap="RdBu_r",
        vmin=-1.0,
        vmax=1.0,
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, shrink=0.9)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)


def plot_series(rows, path) -> None:
    """Energy components over time plus component count on a twin axis."""
    steps = np.array([r.step for r in rows])
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ax.plot(steps, [r.total for r in rows], label="total", color="k", lw=1.6)
    ax.plot(steps, [r.w_eps for r in rows], label="bending", lw=1.1)
    ax.plot(steps, [r.area_penalty for r in rows], label="area penalty", lw=1.1)
    c = np.array([r.c_eps for r in rows])
    if np.any(c > 0):
        ax.plot(steps, c, label="disconnectedness", lw=1.1)
    ax.set_xlabel("step")
    ax.set_ylabel("energy")
    ax.legend(loc="upper right", fontsize=8)

    ax2 = ax.twinx()
    ncomp = [r.n_components for r in rows]
    ax2.step(steps, ncomp, where="post", color="tab:gray", alpha=0.6, lw=1.0)
    ax2.set_ylabel("interface components", color="tab:gray")
    ax2.set_ylim(0, max(ncomp) + 1)
    ax2.yaxis.set_major_locator(plt.MaxNLocator(integer=True))

    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
