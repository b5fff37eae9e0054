"""Receiver trace figure: the measured quantity over time with detected
arrivals marked."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.signal import find_peaks

from .io import read_study
from .style import new_figure, save_vector

__all__ = ["MeasurementResult", "plot_measurement", "main"]


@dataclass(frozen=True)
class MeasurementResult:
    path: str
    arrivals: Tuple[float, ...]


def _peaks(t: np.ndarray, u: np.ndarray) -> np.ndarray:
    mag = np.abs(u)
    top = float(mag.max())
    if top <= 0.0:
        return np.empty(0)
    idx, _ = find_peaks(mag, prominence=0.05 * top)
    return t[idx]


def plot_measurement(csv_path, out_path) -> MeasurementResult:
    study = read_study(csv_path)
    if study.tag != "measurement":
        raise ValueError(f"{csv_path}: not a measurement table "
                         f"(schema {study.tag})")
    order = np.argsort(study.columns["t"])
    t = study.columns["t"][order]
    u = study.columns["UC"][order]
    arrivals = _peaks(t, u)
    fig, (ax,) = new_figure(width=6.4)
    ax.plot(t, u)
    for ta in arrivals:
        ax.axvline(ta, color="0.4", linestyle="--", linewidth=0.9)
        ax.annotate(f"{ta:.3f}", (ta, u.max()),
                    textcoords="offset points", xytext=(3, -2),
                    rotation=90, fontsize=8, va="top")
    ax.set_xlabel("t")
    ax.set_ylabel("U at receiver")
    return MeasurementResult(save_vector(fig, out_path),
                             tuple(float(x) for x in arrivals))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        description="receiver trace plot from a measurement CSV")
    ap.add_argument("csv")
    ap.add_argument("--out", required=True, help="output .svg/.pdf path")
    args = ap.parse_args(argv)
    res = plot_measurement(args.csv, args.out)
    print("arrivals: " + ", ".join(f"{t:.3f}" for t in res.arrivals))
    print(f"wrote {res.path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
