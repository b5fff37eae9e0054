"""Experiment runners: each study drives the solver and drops one CSV.

The schemas are fixed because a separate plotting package consumes them.
Convergence-style studies write ``h,p,dofs,error,rate,seconds``; the energy
study writes ``t,p,E,relerr``; the measurement series writes ``t,UC``; field
snapshots write ``x,y,t,U`` on a uniform sampling grid.  Comparison studies
prepend one discriminator column (``space``, ``scheme``, ``mesh``, ``kind``)
and keep the remaining columns unchanged.
"""

from __future__ import annotations

import math
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dg import BoundaryData, DGParams
from .mesh import (
    SpatialMesh,
    WavespeedMap,
    make_interval_mesh,
    make_lshape_graded,
    make_rect_mesh,
    make_square_mesh,
)
from .slab import CartesianSlab, block_jacobi, direct_solve, front_error_slab
from .solutions import bessel_singular, gaussian_pulse, initial_from_exact, \
    sine_wave_1d, standing_wave
from .solver import (
    ProblemSpec,
    box_l1_U,
    front_U_error,
    front_energy,
    front_error,
    retain_times,
    retain_window,
    run_simulation,
    sample_grid_U,
)
from .trefftz import dim_first_order_space

__all__ = [
    "write_csv",
    "basis_info",
    "convergence_study",
    "p_convergence_study",
    "compare_spaces_study",
    "compare_meshing_study",
    "energy_study",
    "lshape_study",
    "hetero_study",
    "seed_study",
    "detect_arrivals",
    "hetero_arrival_oracle",
]


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_csv(path, header: str, rows) -> None:
    """Write rows under a fixed header; floats keep full precision."""
    path = Path(path)
    if path.parent != Path():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="ascii") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _maybe_write(out, header, rows):
    if out is not None:
        write_csv(out, header, rows)


def basis_info(p: int, dims: Sequence[int] = (1, 2, 3)) -> list:
    """Dimension table of the scalar and first-order spaces per dimension."""
    rows = []
    for n in dims:
        dim_hi = math.comb(p + 1 + n, n) + math.comb(p + n, n)
        rows.append((n, p, dim_hi, dim_first_order_space(p, n)))
    return rows


# -- convergence ----------------------------------------------------------

def _rate_column(rows, group_key, h_index, err_index):
    """In-place fill of the rate slot: log2(e(h)/e(h/2)) within each group."""
    prev: dict = {}
    for i, row in enumerate(rows):
        key = group_key(row)
        rate = float("nan")
        if key in prev:
            h0, e0 = prev[key]
            h1, e1 = row[h_index], row[err_index]
            if e1 > 0.0 and h1 < h0:
                rate = math.log(e0 / e1) / math.log(h0 / h1)
        prev[key] = (row[h_index], row[err_index])
        rows[i] = row[:-2] + (rate,) + row[-1:]
    return rows


def convergence_study(n: int = 1, ps: Sequence[int] = (1, 2, 3),
                      hs: Sequence[float] = (1 / 8, 1 / 16, 1 / 32, 1 / 64),
                      T: float = 1.0, gamma: float = 0.5, workers: int = 1,
                      kind: str = "monomial", alpha: float = 0.5,
                      beta: float = 0.5, out=None) -> list:
    """Standing-wave h-refinement; rows are (h, p, dofs, error, rate, seconds)."""
    sol = standing_wave(n)
    speeds = WavespeedMap.uniform(1.0)
    rows = []
    for p in ps:
        for h in hs:
            if n == 1:
                mesh = make_interval_mesh(0.0, 1.0, round(1.0 / h))
            else:
                mesh = make_square_mesh(h)
            spec = ProblemSpec(mesh, speeds, p=p, T=T,
                               initial=initial_from_exact(sol),
                               bc=BoundaryData.from_exact(sol),
                               gamma=gamma, workers=workers, kind=kind,
                               params=DGParams(alpha=alpha, beta=beta))
            rec = run_simulation(spec)
            err = front_error(rec.traces, speeds, sol)
            rows.append((float(h), p, rec.dofs, err, float("nan"),
                         rec.seconds))
    _rate_column(rows, lambda r: r[1], 0, 3)
    _maybe_write(out, "h,p,dofs,error,rate,seconds", rows)
    return rows


def p_convergence_study(n: int = 1, h: float = 0.25,
                        ps: Sequence[int] = (1, 2, 3, 4, 5, 6),
                        T: float = 1.0, kind: str = "monomial",
                        alpha: float = 0.5, beta: float = 0.5,
                        out=None) -> list:
    """Degree refinement at fixed h; the rate slot holds the log10 drop per
    degree step, nan on the first row."""
    sol = standing_wave(n)
    speeds = WavespeedMap.uniform(1.0)
    if n == 1:
        mesh = make_interval_mesh(0.0, 1.0, round(1.0 / h))
    else:
        mesh = make_square_mesh(h)
    rows = []
    prev = None
    for p in ps:
        spec = ProblemSpec(mesh, speeds, p=p, T=T,
                           initial=initial_from_exact(sol),
                           bc=BoundaryData.from_exact(sol), kind=kind,
                           params=DGParams(alpha=alpha, beta=beta))
        rec = run_simulation(spec)
        err = front_error(rec.traces, speeds, sol)
        drop = float("nan") if prev is None or err <= 0.0 \
            else math.log10(prev / err)
        rows.append((float(h), p, rec.dofs, err, drop, rec.seconds))
        prev = err
    _maybe_write(out, "h,p,dofs,error,rate,seconds", rows)
    return rows


# -- Cartesian slab comparisons -------------------------------------------

def compare_spaces_study(ps: Sequence[int] = (1, 2, 3, 4), nx: int = 8,
                         nt: int = 8, T: float = 1.0, alpha: float = 0.5,
                         beta: float = 0.5, out=None) -> list:
    """Wave-compliant versus full tensor space on the same Cartesian slab.

    Rows are (space, h, p, dofs, error, rate, seconds); both spaces are
    solved directly, so the comparison isolates the trial space.
    """
    sol = standing_wave(1)
    init = initial_from_exact(sol)
    bc = BoundaryData.from_exact(sol)
    rows = []
    for space in ("trefftz", "full"):
        for p in ps:
            started = time.perf_counter()
            slab = CartesianSlab(0.0, 1.0, nx, T, nt, 1.0, p, space=space,
                                 alpha=alpha, beta=beta,
                                 left="neumann", right="neumann")
            x = direct_solve(slab.assemble(init, bc))
            err = front_error_slab(slab, x, sol)
            rows.append((space, slab.dx, p, slab.dofs, err, float("nan"),
                         time.perf_counter() - started))
    _maybe_write(out, "space,h,p,dofs,error,rate,seconds", rows)
    return rows


def compare_meshing_study(hs: Sequence[float] = (1 / 4, 1 / 8, 1 / 16),
                          p: int = 2, T: float = 0.5, alpha: float = 0.5,
                          beta: float = 0.5, out=None) -> list:
    """Tent-pitched versus Cartesian-slab runs of the same sine problem.

    Rows are (scheme, h, p, dofs, error, rate, seconds); the slab rows are
    solved with block Jacobi so the iterative path gets exercised too.
    """
    sol = sine_wave_1d()
    speeds = WavespeedMap.uniform(1.0)
    rows = []
    for h in hs:
        m = round(1.0 / h)
        spec = ProblemSpec(make_interval_mesh(0.0, 1.0, m), speeds, p=p, T=T,
                           initial=initial_from_exact(sol),
                           bc=BoundaryData.from_exact(sol),
                           params=DGParams(alpha=alpha, beta=beta))
        rec = run_simulation(spec)
        err = front_error(rec.traces, speeds, sol)
        rows.append(("tent", float(h), p, rec.dofs, err, float("nan"),
                     rec.seconds))
    for h in hs:
        m = round(1.0 / h)
        started = time.perf_counter()
        slab = CartesianSlab(0.0, 1.0, m, T, max(1, round(T * m)), 1.0, p,
                             alpha=alpha, beta=beta)
        system = slab.assemble(initial_from_exact(sol),
                               BoundaryData.from_exact(sol))
        result = block_jacobi(system)
        if not result.converged:
            raise RuntimeError("block Jacobi failed to converge in the "
                               "meshing comparison")
        err = front_error_slab(slab, result.x, sol)
        rows.append(("slab", float(h), p, slab.dofs, err, float("nan"),
                     time.perf_counter() - started))
    _rate_column(rows, lambda r: r[0], 1, 4)
    _maybe_write(out, "scheme,h,p,dofs,error,rate,seconds", rows)
    return rows


# -- long-time energy ------------------------------------------------------

def energy_study(ps: Sequence[int] = (2, 3, 4, 5, 6, 7, 8),
                 T: float = 100.0, window: float = 10.0,
                 num_elements: int = 5, alpha: float = 0.5,
                 beta: float = 0.5, out=None) -> list:
    """Sine-mode energy decay over chained slabs; rows are (t, p, E, relerr).

    Each window restarts from the previous flat front, so the energy is
    sampled exactly at the window joints.
    """
    from .dg import TraceStore, trace_rule

    sol = sine_wave_1d()
    speeds = WavespeedMap.uniform(1.0)
    E_exact = np.pi ** 2 / 4.0
    mesh = make_interval_mesh(0.0, 1.0, num_elements)
    bc = BoundaryData.from_exact(sol)
    windows = round(T / window)
    rows = []
    for p in ps:
        traces = TraceStore.from_initial(mesh, trace_rule(p, 1),
                                         initial_from_exact(sol))
        E = front_energy(traces, speeds)
        rows.append((0.0, p, E, abs(E - E_exact) / E_exact))
        for k in range(windows):
            t_end = (k + 1) * window
            spec = ProblemSpec(mesh, speeds, p=p, T=t_end, bc=bc,
                               params=DGParams(alpha=alpha, beta=beta))
            rec = run_simulation(spec, traces=traces)
            traces = rec.traces
            E = front_energy(traces, speeds)
            rows.append((float(t_end), p, E, abs(E - E_exact) / E_exact))
    _maybe_write(out, "t,p,E,relerr", rows)
    return rows


# -- corner singularity ----------------------------------------------------

def lshape_study(h_uniform: Sequence[float] = (0.14, 0.10, 0.07),
                 h_graded: Sequence[float] = (0.19, 0.17, 0.14),
                 p: int = 3, T: float = 1.0, mu: float = 1.0 / 3.0,
                 recovery: str = "bottom", alpha: float = 0.5,
                 beta: float = 0.5, workers: int = 1, out=None) -> list:
    """Corner-singular mode on the L-shape, uniform versus graded meshes.

    Rows are (mesh, h, p, dofs, error, rate, seconds).  The error is the L2
    distance of the recovered displacement at the final front, and the rate
    slot is measured against dofs^(1/3), the natural cost axis for a 2+1
    dimensional space-time problem.
    """
    sol = bessel_singular(10.0, 2.0 / 3.0)
    speeds = WavespeedMap.uniform(1.0)
    rows = []
    for label, hs, grading in (("uniform", h_uniform, 1.0),
                               ("graded", h_graded, mu)):
        prev = None
        for h in hs:
            mesh = make_lshape_graded(h, grading)
            spec = ProblemSpec(mesh, speeds, p=p, T=T,
                               initial=initial_from_exact(sol),
                               bc=BoundaryData.from_exact(sol),
                               params=DGParams(alpha=alpha, beta=beta,
                                               recovery=recovery),
                               workers=workers)
            rec = run_simulation(spec)
            err = front_U_error(rec.traces, sol.U)
            rate = float("nan")
            if prev is not None:
                d0, e0 = prev
                if rec.dofs > d0 and err > 0.0:
                    rate = math.log(e0 / err) / math.log(
                        (rec.dofs / d0) ** (1.0 / 3.0))
            prev = (rec.dofs, err)
            rows.append((label, float(h), p, rec.dofs, err, rate,
                         rec.seconds))
    _maybe_write(out, "mesh,h,p,dofs,error,rate,seconds", rows)
    return rows


# -- heterogeneous media ---------------------------------------------------

def _banded_lines(segments) -> np.ndarray:
    pts = [segments[0][0]]
    for a, b, h in segments:
        k = max(1, round((b - a) / h))
        pts.extend(np.linspace(a, b, k + 1)[1:])
    return np.array(pts)


def hetero_mesh(fine: float = 0.04) -> SpatialMesh:
    """Banded grid for the two-speed domain [0,2]^2 split at x1 = 1.2.

    The corridor between source and measurement box keeps the fine size;
    the fast material takes cells about three times larger, which balances
    tent heights across the speed jump.
    """
    xs = _banded_lines([(0.0, 0.6, 1.875 * fine), (0.6, 1.2, fine),
                        (1.2, 2.0, 2.875 * fine)])
    ys = _banded_lines([(0.0, 1.4, fine), (1.4, 2.0, 2.0 * fine)])
    return make_rect_mesh(xs, ys, material_fn=lambda c: int(c[0] > 1.2))


def hetero_arrival_oracle() -> dict:
    """Ray-theory arrival times at the measurement box center (1, 0.25).

    The source sits at (1, 1); the interface x1 = 1.2 separates speed 1
    from speed 3.  The direct ray travels 0.75 at unit speed.  The
    reflection unfolds about the interface, giving the mirror-source
    distance.  The head wave runs to the interface at the critical angle
    asin(1/3), along it at speed 3, and back out at the same angle.
    """
    c1, c2 = 1.0, 3.0
    d_src = 1.2 - 1.0          # source distance to the interface
    d_rec = 1.2 - 1.0          # receiver distance to the interface
    along = 1.0 - 0.25         # separation parallel to the interface
    cos_c = math.sqrt(1.0 - (c1 / c2) ** 2)
    return {
        "huygens": along / c2 + (d_src + d_rec) * cos_c / c1,
        "initial": along / c1,
        "reflected": math.hypot(d_src + d_rec, along) / c1,
    }


def detect_arrivals(ts: np.ndarray, uc: np.ndarray, count: int = 3,
                    smooth: int = 7, min_sep: float = 0.04) -> np.ndarray:
    """Times of the most prominent local maxima of a measurement series.

    A short moving average removes dispersion ripple before peak picking;
    peaks closer than min_sep merge into the stronger one.  Returned times
    are sorted ascending.
    """
    from scipy.signal import find_peaks

    uc = np.asarray(uc, float)
    ts = np.asarray(ts, float)
    if count < 1:
        return np.empty(0)
    if smooth > 1:
        pad = np.pad(uc, smooth // 2, mode="edge")
        uc = np.convolve(pad, np.ones(smooth) / smooth, mode="valid")
    dt = float(np.median(np.diff(ts)))
    peaks, props = find_peaks(uc, distance=max(1, round(min_sep / dt)),
                              prominence=0.05 * float(uc.max()))
    if len(peaks) < count:
        raise RuntimeError(
            f"found only {len(peaks)} arrivals, expected {count}")
    top = np.argsort(props["prominences"])[::-1][:count]
    return np.sort(ts[peaks[top]])


def hetero_study(p: int = 4, T: float = 0.92, fine: float = 0.04,
                 delta: float = 0.01, sample_dt: float = 0.0025,
                 snapshot_times: Sequence[float] = (0.1, 0.2, 0.3, 0.4),
                 grid_n: int = 101, workers: int = 1, arrivals: int = 3,
                 recovery: str = "bottom", alpha: float = 0.5,
                 beta: float = 0.5,
                 out_measurement=None, out_snapshots=None) -> dict:
    """Gaussian pulse crossing a speed jump; measurement plus snapshots.

    Returns the measurement series, detected arrival times, and the
    snapshot grids; the two CSVs are `t,UC` and `x,y,t,U`.
    """
    mesh = hetero_mesh(fine=fine)
    speeds = WavespeedMap({0: 1.0, 1: 3.0})
    eps = 2.0 ** -7
    lo = (1.0 - eps, 0.25 - eps)
    hi = (1.0 + eps, 0.25 + eps)

    box_elems = []
    for e in range(mesh.num_elements):
        verts = mesh.vertices[mesh.elements[e]]
        if verts.max(axis=0)[0] >= lo[0] and verts.min(axis=0)[0] <= hi[0] \
                and verts.max(axis=0)[1] >= lo[1] \
                and verts.min(axis=0)[1] <= hi[1]:
            box_elems.append(e)

    keep_series = retain_window(0.0, T, elements=box_elems)
    keep_snaps = retain_times(snapshot_times)

    def keep(tent, element):
        return keep_series(tent, element) or keep_snaps(tent, element)

    spec = ProblemSpec(mesh, speeds, p=p, T=T,
                       initial=gaussian_pulse((1.0, 1.0), delta),
                       bc=BoundaryData.homogeneous(),
                       params=DGParams(alpha=alpha, beta=beta,
                                       recovery=recovery), workers=workers)
    rec = run_simulation(spec, retain=keep)

    ts = np.arange(0.0, T + 1e-9, sample_dt)
    uc = np.array([box_l1_U(rec, lo, hi, t) for t in ts])
    _maybe_write(out_measurement, "t,UC", list(zip(ts, uc)))

    axes = (np.linspace(0.0, 2.0, grid_n), np.linspace(0.0, 2.0, grid_n))
    snaps = {}
    rows = []
    for t in snapshot_times:
        U = sample_grid_U(rec, axes, t)
        snaps[t] = U
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        for x, y, u in zip(X.ravel(), Y.ravel(), U.ravel()):
            rows.append((x, y, float(t), u))
    _maybe_write(out_snapshots, "x,y,t,U", rows)

    found = detect_arrivals(ts, uc, count=arrivals)
    return {"record": rec, "times": ts, "UC": uc, "arrivals": found,
            "snapshots": snaps, "axes": axes,
            "oracle": hetero_arrival_oracle()}


# -- seed comparison -------------------------------------------------------

def seed_study(kinds: Sequence[str] = ("monomial", "legendre", "chebyshev"),
               ps: Sequence[int] = tuple(range(1, 10)),
               num_elements: int = 5, T: float = 1.0, alpha: float = 0.5,
               beta: float = 0.5, out=None) -> list:
    """Seed-polynomial comparison on a tent mesh.

    Rows are (kind, p, dofs, cond, error, seconds), where cond is the
    largest 2-norm condition number over all tent systems.  The cheap pivot
    growth the solver tracks is no use here: it badly overestimates the
    monomial systems, so the study pays for real condition numbers.
    """
    import warnings

    from .dg import TentConditionWarning, TraceStore, assemble_tent, \
        emit_traces, solve_local, trace_rule
    from .solver import get_tables
    from .tents import pitch

    sol = standing_wave(1)
    mesh = make_interval_mesh(0.0, 1.0, num_elements)
    speeds = WavespeedMap.uniform(1.0)
    bc = BoundaryData.from_exact(sol)
    rows = []
    for kind in kinds:
        for p in ps:
            started = time.perf_counter()
            tables = get_tables(p, 1, kind)
            traces = TraceStore.from_initial(mesh, trace_rule(p, 1),
                                             initial_from_exact(sol))
            slab = pitch(mesh, speeds, T, 0.5)
            params = DGParams(alpha=alpha, beta=beta)
            worst = 0.0
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TentConditionWarning)
                for tent in slab.tents:
                    system = assemble_tent(tent, mesh, speeds, tables,
                                           traces, params, bc)
                    worst = max(worst, float(np.linalg.cond(system.A)))
                    coeffs, _ = solve_local(system)
                    emit_traces(system, coeffs, traces)
            err = front_error(traces, speeds, sol)
            rows.append((kind, p, tables.dim * slab.num_tents, worst, err,
                         time.perf_counter() - started))
    _maybe_write(out, "kind,p,dofs,cond,error,seconds", rows)
    return rows
