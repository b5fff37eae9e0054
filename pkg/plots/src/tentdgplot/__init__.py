"""Figure rendering for the solver's study CSV files.

Pure view layer: reads the documented CSV schemas and draws the standard
figures, never recomputing any physics.  Each plot module doubles as a
script, e.g. ``python3 -m tentdgplot.convergence results/conv.csv --out
conv.svg``, or go through the dispatcher ``python3 -m tentdgplot <kind>``.
"""

from .convergence import PlotResult, plot_convergence
from .energy import EnergyResult, plot_energy
from .io import SchemaError, StudyCSV, read_study
from .measurement import MeasurementResult, plot_measurement
from .snapshot import SnapshotResult, plot_snapshot

__version__ = "0.1.0"

__all__ = [
    "EnergyResult",
    "MeasurementResult",
    "PlotResult",
    "SchemaError",
    "SnapshotResult",
    "StudyCSV",
    "plot_convergence",
    "plot_energy",
    "plot_measurement",
    "plot_snapshot",
    "read_study",
]
