"""Space-time Trefftz DG solver for the first-order acoustic wave equation.

The solver advances through a tent-pitched space-time mesh, solving one
small local system per tent in dependency order; a Cartesian slab variant
covers structured meshes.  See ``python3 -m tentdg --help`` for the
experiment runners.
"""

from .dg import BoundaryData, DGParams, TentConditionWarning
from .mesh import (
    MeshError,
    MeshFormatError,
    SpatialMesh,
    WavespeedMap,
    make_interval_mesh,
    make_lshape_graded,
    make_rect_mesh,
    make_square_mesh,
    read_mesh,
    write_mesh,
)
from .slab import CartesianSlab, block_jacobi, direct_solve, front_error_slab
from .solutions import (
    ExactSolution,
    InitialData,
    bessel_singular,
    gaussian_pulse,
    initial_from_exact,
    sine_wave_1d,
    standing_wave,
)
from .solver import (
    ProblemSpec,
    SolutionRecord,
    box_l1_U,
    box_mean_U,
    energy_error,
    front_U_error,
    front_energy,
    front_error,
    retain_times,
    retain_window,
    run_simulation,
    sample_grid_U,
)
from .tents import TentSlab, dump_slab, pitch
from .trefftz import dim_first_order_space

__version__ = "0.1.0"

__all__ = [
    "BoundaryData",
    "CartesianSlab",
    "DGParams",
    "ExactSolution",
    "InitialData",
    "MeshError",
    "MeshFormatError",
    "ProblemSpec",
    "SolutionRecord",
    "SpatialMesh",
    "TentConditionWarning",
    "TentSlab",
    "WavespeedMap",
    "bessel_singular",
    "block_jacobi",
    "box_l1_U",
    "box_mean_U",
    "dim_first_order_space",
    "direct_solve",
    "dump_slab",
    "energy_error",
    "front_U_error",
    "front_energy",
    "front_error",
    "front_error_slab",
    "gaussian_pulse",
    "initial_from_exact",
    "make_interval_mesh",
    "make_lshape_graded",
    "make_rect_mesh",
    "make_square_mesh",
    "pitch",
    "read_mesh",
    "retain_times",
    "retain_window",
    "run_simulation",
    "sample_grid_U",
    "sine_wave_1d",
    "standing_wave",
    "write_mesh",
]
