"""Energy-error history figure: semilog error vs time, plus the final
error against polynomial degree."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .io import read_study
from .style import marker, new_figure, save_vector

__all__ = ["EnergyResult", "plot_energy", "main"]


@dataclass(frozen=True)
class EnergyResult:
    path: str
    degrees: Tuple[int, ...]


def plot_energy(csv_path, out_path) -> EnergyResult:
    study = read_study(csv_path)
    if study.tag != "energy":
        raise ValueError(f"{csv_path}: not an energy table "
                         f"(schema {study.tag})")
    t = study.columns["t"]
    p = study.columns["p"].astype(int)
    rel = study.columns["relerr"]
    degrees = tuple(sorted(set(int(v) for v in p)))
    fig, (ax_t, ax_p) = new_figure(ncols=2)
    finals = []
    for i, deg in enumerate(degrees):
        sel = p == deg
        order = np.argsort(t[sel])
        # a zero at t=0 would break the log axis; clip to tiny positive
        vals = np.maximum(rel[sel][order], 1e-300)
        ax_t.semilogy(t[sel][order], vals, marker=marker(i),
                      markersize=3, label=f"p={deg}")
        finals.append(vals[-1])
    ax_t.set_xlabel("t")
    ax_t.set_ylabel("relative energy error")
    ax_t.legend()
    ax_p.semilogy(degrees, finals, marker="o")
    ax_p.set_xlabel("p")
    ax_p.set_ylabel(f"relative energy error at t={t.max():g}")
    return EnergyResult(save_vector(fig, out_path), degrees)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        description="energy-error history plot from a study CSV")
    ap.add_argument("csv")
    ap.add_argument("--out", required=True, help="output .svg/.pdf path")
    args = ap.parse_args(argv)
    res = plot_energy(args.csv, args.out)
    print(f"degrees {list(res.degrees)}")
    print(f"wrote {res.path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
