"""Field snapshot heatmaps, one panel per stored time."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .io import read_study
from .style import new_figure, save_vector

__all__ = ["SnapshotResult", "plot_snapshot", "main"]


@dataclass(frozen=True)
class SnapshotResult:
    path: str
    times: Tuple[float, ...]
    grid_shape: Tuple[int, int]


def _pivot(x, y, u):
    xu = np.unique(x)
    yu = np.unique(y)
    grid = np.full((len(yu), len(xu)), np.nan)
    ix = np.searchsorted(xu, x)
    iy = np.searchsorted(yu, y)
    grid[iy, ix] = u
    return xu, yu, grid


def plot_snapshot(csv_path, out_path) -> SnapshotResult:
    study = read_study(csv_path)
    if study.tag != "snapshot":
        raise ValueError(f"{csv_path}: not a snapshot table "
                         f"(schema {study.tag})")
    t = study.columns["t"]
    times = tuple(float(v) for v in np.unique(t))
    fig, axes = new_figure(ncols=len(times), width=3.6, height=3.2)
    # one color scale across panels so amplitudes stay comparable
    vmax = float(np.abs(study.columns["U"]).max()) or 1.0
    shape = (0, 0)
    im = None
    for ax, tv in zip(axes, times):
        sel = t == tv
        xu, yu, grid = _pivot(study.columns["x"][sel],
                              study.columns["y"][sel],
                              study.columns["U"][sel])
        shape = grid.shape
        im = ax.pcolormesh(xu, yu, grid, cmap="RdBu_r",
                           vmin=-vmax, vmax=vmax, shading="nearest")
        ax.set_aspect("equal")
        ax.set_title(f"t={tv:g}", fontsize=9)
        ax.grid(False)
    fig.colorbar(im, ax=list(axes), shrink=0.8)
    # tight_layout fights the shared colorbar, skip it
    out = save_vector(fig, out_path, tight=False)
    return SnapshotResult(out, times, shape)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        description="field snapshot heatmaps from a snapshot CSV")
    ap.add_argument("csv")
    ap.add_argument("--out", required=True, help="output .svg/.pdf path")
    args = ap.parse_args(argv)
    res = plot_snapshot(args.csv, args.out)
    print(f"times {list(res.times)}, grid {res.grid_shape[0]}x{res.grid_shape[1]}")
    print(f"wrote {res.path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
