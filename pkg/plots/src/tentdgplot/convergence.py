"""Log-log convergence figures with least-squares slope annotations.

Plain convergence tables are drawn against the mesh size h.  Tables carrying
a ``mesh`` label column come from the corner-singularity study, where the
interesting abscissa is (global dofs)^(-1/3); the slope is fitted in that
variable instead so it can be read as a dof-rate.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .io import StudyCSV, read_study
from .style import marker, new_figure, save_vector

__all__ = ["PlotResult", "plot_convergence", "main"]


@dataclass(frozen=True)
class PlotResult:
    path: str
    labels: Tuple[str, ...]
    slopes: Dict[Tuple[Optional[str], int], float]


def _fit_slope(x: np.ndarray, err: np.ndarray) -> float:
    """Least-squares slope of log(err) against log(x)."""
    mask = (x > 0) & (err > 0)
    lx, le = np.log(x[mask]), np.log(err[mask])
    if len(lx) < 2:
        return float("nan")
    return float(np.polyfit(lx, le, 1)[0])


def plot_convergence(csv_path, out_path) -> PlotResult:
    study = read_study(csv_path)
    if study.tag != "convergence":
        raise ValueError(f"{csv_path}: not a convergence table "
                         f"(schema {study.tag})")
    per_dofs = study.discriminator == "mesh"
    fig, (ax,) = new_figure()
    slopes: Dict[Tuple[Optional[str], int], float] = {}
    labels = []
    for i, (label, p) in enumerate(study.series_keys()):
        sel = study.columns["p"].astype(int) == p
        if label is not None:
            sel &= study.columns[study.discriminator] == label
        err = study.columns["error"][sel]
        if per_dofs:
            x = study.columns["dofs"][sel] ** (-1.0 / 3.0)
        else:
            x = study.columns["h"][sel]
        order = np.argsort(x)
        x, err = x[order], err[order]
        s = _fit_slope(x, err)
        slopes[(label, p)] = s
        name = f"p={p}" if label is None else f"{label} p={p}"
        labels.append(name)
        ax.loglog(x, err, marker=marker(i), label=name)
        mid = len(x) // 2
        ax.annotate(f"slope {s:.2f}", (x[mid], err[mid]),
                    textcoords="offset points", xytext=(6, 4), fontsize=9)
    ax.set_xlabel(r"(global dofs)$^{-1/3}$" if per_dofs else "h")
    ax.set_ylabel("error")
    ax.legend()
    return PlotResult(save_vector(fig, out_path), tuple(labels), slopes)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        description="log-log convergence plot from a study CSV")
    ap.add_argument("csv")
    ap.add_argument("--out", required=True, help="output .svg/.pdf path")
    args = ap.parse_args(argv)
    res = plot_convergence(args.csv, args.out)
    for (label, p), s in res.slopes.items():
        name = f"p={p}" if label is None else f"{label} p={p}"
        print(f"{name}: slope {s:.2f}")
    print(f"wrote {res.path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
