"""Shared figure styling and deterministic output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["new_figure", "save_vector"]

# text stays text in the SVG so annotations remain searchable, and the
# hash salt pins matplotlib's generated ids so identical input gives
# byte-identical output
matplotlib.rcParams.update({
    "svg.fonttype": "none",
    "svg.hashsalt": "tentdgplot",
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "font.size": 10,
})

_MARKERS = ("o", "s", "^", "d", "v", "p", "*", "x")


def marker(i: int) -> str:
    return _MARKERS[i % len(_MARKERS)]


def new_figure(ncols: int = 1, width: float = 4.8, height: float = 3.6):
    fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, height),
                             squeeze=False)
    return fig, axes[0]


def save_vector(fig, out_path, tight: bool = True) -> str:
    """Write the figure as vector graphics and release it."""
    out_path = str(out_path)
    # strip the timestamp so rerenders of the same data are byte-identical
    meta = ({"CreationDate": None} if out_path.endswith(".pdf")
            else {"Date": None})
    if tight:
        fig.tight_layout()
    fig.savefig(out_path, metadata=meta)
    plt.close(fig)
    return out_path
