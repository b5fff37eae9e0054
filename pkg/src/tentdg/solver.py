"""Slab-level driver: schedule tent solves over the dependency DAG.

Tents that are simultaneously ready never share a star element (a shared
element would have forced a dependency between them at pitching time), so
workers may write their trace rows concurrently without locks.  Results are
keyed by tent id, which makes the record independent of completion order;
a one-worker run and an N-worker run produce bitwise identical traces.

A simulation can resume from the trace store of a previous record as long as
that front is flat; chained windows advance absolute time, so a long horizon
splits into slabs without losing consistency between them.
"""

from __future__ import annotations

import math
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass
from functools import lru_cache
from time import perf_counter
from typing import Callable, Optional

import numpy as np

from .dg import (
    BoundaryData,
    DGParams,
    ReferenceBasisTables,
    TraceStore,
    assemble_tent,
    emit_traces,
    solve_local,
    trace_rule,
)
from .mesh import SpatialMesh, WavespeedMap
from .quadrature import gauss01
from .solutions import InitialData
from .tents import TentSlab, pitch

__all__ = [
    "ProblemSpec",
    "SolutionRecord",
    "run_simulation",
    "retain_window",
    "retain_times",
    "front_error",
    "front_U_error",
    "front_energy",
    "energy_error",
    "box_mean_U",
    "box_l1_U",
    "sample_front",
    "sample_grid_U",
]


@lru_cache(maxsize=32)
def get_tables(p: int, n: int, kind: str = "monomial",
               with_U: bool = False) -> ReferenceBasisTables:
    """Shared basis tables; construction does symbolic work worth caching."""
    return ReferenceBasisTables(p, n, kind, with_U=with_U)


@dataclass(frozen=True)
class ProblemSpec:
    """Everything a slab run needs besides the state it starts from."""

    mesh: SpatialMesh
    speeds: WavespeedMap
    p: int
    T: float
    initial: Optional[InitialData] = None
    kind: str = "monomial"
    params: DGParams = DGParams()
    bc: Optional[BoundaryData] = None
    gamma: float = 0.5
    workers: int = 1

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("polynomial degree must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class SolutionRecord:
    spec: ProblemSpec
    slab: TentSlab
    traces: TraceStore
    growths: np.ndarray          # per-tent condition estimates, by tent id
    retained: tuple              # RetainedLocal entries in tent-id order
    seconds: float
    dofs: int                    # unknowns solved across all tents

    @property
    def num_tents(self) -> int:
        return self.slab.num_tents

    @property
    def max_growth(self) -> float:
        return float(self.growths.max()) if len(self.growths) else 0.0


def retain_window(t0: float, t1: Optional[float] = None, elements=None,
                  tol: float = 1e-12) -> Callable:
    """Retention predicate for tents whose time span meets [t0, t1].

    The pitch vertex is always the front minimum, so a tent's element spans
    all sit inside [t_bottom, t_top]; testing that interval never drops a
    covering tent.
    """
    hi = t0 if t1 is None else t1
    els = None if elements is None else frozenset(int(e) for e in elements)

    def keep(tent, element: int) -> bool:
        if els is not None and element not in els:
            return False
        return tent.t_top >= t0 - tol and tent.t_bottom <= hi + tol

    return keep


def retain_times(times, elements=None, tol: float = 1e-12) -> Callable:
    """Retention predicate for tents whose span contains any sample time.

    Unlike ``retain_window`` this keeps only the tents straddling a discrete
    list of snapshot times, which is much cheaper on long runs.
    """
    ts = sorted(float(t) for t in times)
    els = None if elements is None else frozenset(int(e) for e in elements)

    def keep(tent, element: int) -> bool:
        if els is not None and element not in els:
            return False
        return any(tent.t_bottom - tol <= t <= tent.t_top + tol for t in ts)

    return keep


def _run_dag(slab: TentSlab, workers: int, solve_one: Callable) -> list:
    # plain asserts so the dependency check vanishes under -O
    completed = bytearray(slab.num_tents)

    def checked(tent):
        assert all(completed[d] for d in tent.deps), \
            f"tent {tent.id} scheduled before its dependencies"
        out = solve_one(tent)
        completed[tent.id] = 1
        return out

    results: list = [None] * slab.num_tents
    if workers <= 1:
        for tent in slab.tents:
            results[tent.id] = checked(tent)
        return results

    remaining = [len(t.deps) for t in slab.tents]
    dependents: list[list[int]] = [[] for _ in slab.tents]
    for t in slab.tents:
        for d in t.deps:
            dependents[d].append(t.id)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(checked, slab.tents[i]): i
                   for i in range(slab.num_tents) if remaining[i] == 0}
        try:
            while futures:
                done, _ = wait(futures, return_when=FIRST_COMPLETED)
                for fut in done:
                    tid = futures.pop(fut)
                    results[tid] = fut.result()
                    for j in dependents[tid]:
                        remaining[j] -= 1
                        if remaining[j] == 0:
                            futures[pool.submit(checked, slab.tents[j])] = j
        except BaseException:
            pool.shutdown(wait=True, cancel_futures=True)
            raise
    return results


def run_simulation(spec: ProblemSpec, traces: Optional[TraceStore] = None,
                   retain: Optional[Callable] = None) -> SolutionRecord:
    """Pitch a slab and solve every tent; returns the record at time T.

    Passing the trace store of an earlier record continues from its flat
    front instead of the initial data.  ``retain(tent, element)`` keeps the
    local polynomial of selected element/tent pairs for later evaluation.
    """
    started = perf_counter()
    mesh = spec.mesh
    params = spec.params
    tables = get_tables(spec.p, mesh.n, spec.kind, params.with_U)

    if traces is None:
        if spec.initial is None:
            raise ValueError("spec has no initial data and no trace store "
                             "was passed to continue from")
        traces = TraceStore.from_initial(
            mesh, trace_rule(spec.p, mesh.n), spec.initial,
            with_U=params.with_U)
        t_start = 0.0
    else:
        if traces.mesh is not mesh:
            raise ValueError("trace store was built on a different mesh")
        if traces.with_U != params.with_U:
            raise ValueError("trace store and params disagree about carrying U")
        t_start = float(traces.times.flat[0])
        if not np.all(traces.times == t_start):
            raise ValueError("can only continue from a flat front")

    slab = pitch(mesh, spec.speeds, spec.T, spec.gamma, t_start=t_start)
    bc = spec.bc

    def solve_one(tent):
        system = assemble_tent(tent, mesh, spec.speeds, tables, traces,
                               params, bc)
        coeffs, growth = solve_local(system)
        keep = None if retain is None else (lambda e: retain(tent, e))
        kept = emit_traces(system, coeffs, traces, retain=keep)
        return growth, kept

    results = _run_dag(slab, spec.workers, solve_one)
    growths = np.array([r[0] for r in results])
    retained = tuple(rec for r in results for rec in r[1])

    # one polynomial pair per material region of each tent's star
    nblocks = np.array([len({int(mesh.material[e]) for e in els})
                        for els in mesh.vertex_elements])
    dofs = tables.dim * int(sum(nblocks[t.pitch_vertex] for t in slab.tents))
    return SolutionRecord(spec, slab, traces, growths, retained,
                          perf_counter() - started, dofs)


# -- front measurements ---------------------------------------------------

def front_error(traces: TraceStore, speeds: WavespeedMap, sol) -> float:
    """Weighted L2 distance (c^-2 |v - v_ex|^2 + |sigma - sigma_ex|^2)^(1/2)
    between the stored front and an exact solution evaluated on it."""
    mesh = traces.mesh
    c = speeds.for_elements(mesh)
    n = mesh.n
    total = 0.0
    for e in range(mesh.num_elements):
        x = traces.points[e]
        t = traces.point_times(e)
        dv = traces.values[e, :, 0] - sol.v(x, t)
        acc = dv * dv / (c[e] * c[e])
        ds = traces.values[e, :, 1:1 + n] - sol.sigma(x, t)
        acc += np.sum(ds * ds, axis=1)
        total += float(traces.weights[e] @ acc)
    return math.sqrt(total)


def front_U_error(traces: TraceStore, U: Callable) -> float:
    """L2 distance between the recovered displacement and U(x, t)."""
    if not traces.with_U:
        raise ValueError("trace store does not carry the displacement")
    col = 1 + traces.mesh.n
    total = 0.0
    for e in range(traces.mesh.num_elements):
        x = traces.points[e]
        t = traces.point_times(e)
        du = traces.values[e, :, col] - U(x, t)
        total += float(traces.weights[e] @ (du * du))
    return math.sqrt(total)


def front_energy(traces: TraceStore, speeds: WavespeedMap) -> float:
    """Acoustic energy (1/2) int c^-2 v^2 + |sigma|^2 over the front."""
    mesh = traces.mesh
    c = speeds.for_elements(mesh)
    n = mesh.n
    total = 0.0
    for e in range(mesh.num_elements):
        vals = traces.values[e]
        acc = vals[:, 0] ** 2 / (c[e] * c[e])
        acc += np.sum(vals[:, 1:1 + n] ** 2, axis=1)
        total += float(traces.weights[e] @ acc)
    return 0.5 * total


def energy_error(traces: TraceStore, speeds: WavespeedMap,
                 E_exact: float) -> float:
    """Relative defect |E_h - E_exact| / E_exact of the front energy."""
    if E_exact == 0.0:
        raise ValueError("relative energy error needs a nonzero reference")
    return abs(front_energy(traces, speeds) - E_exact) / E_exact


# -- point evaluation through retained locals -----------------------------

def _bary(traces: TraceStore, e: int, x: np.ndarray) -> np.ndarray:
    """Coordinates mu of x w.r.t. vertices 1..n of element e (lambda_0 is
    1 - sum mu); inside iff all mu >= 0 and sum mu <= 1."""
    d = np.asarray(x, float) - traces.origin[e]
    B = traces.span[e]
    if traces.mesh.n == 1:
        return d / B[0, 0]
    det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
    mu0 = (B[1, 1] * d[0] - B[1, 0] * d[1]) / det
    mu1 = (B[0, 0] * d[1] - B[0, 1] * d[0]) / det
    return np.array([mu0, mu1])


def _graph_time(tau: np.ndarray, mu: np.ndarray) -> float:
    return float(tau[0] + mu @ (tau[1:] - tau[0]))


def _retained_by_element(record: SolutionRecord) -> dict:
    by_elem: dict[int, list] = {}
    for rec in record.retained:
        by_elem.setdefault(rec.element, []).append(rec)
    return by_elem


def _locate_record(recs, traces, e, x, t, tol):
    mu = _bary(traces, e, x)
    for rec in recs:
        if (_graph_time(rec.bottom_times, mu) - tol <= t
                <= _graph_time(rec.top_times, mu) + tol):
            return rec
    return None


def _box_U_samples(record: SolutionRecord, lo, hi, t: float, npts: int):
    """Recovered displacement at tensor Gauss points of a box, plus the unit
    weights; shared walk behind the box mean and L1 measurements."""
    traces = record.traces
    mesh = traces.mesh
    n = mesh.n
    lo = np.atleast_1d(np.asarray(lo, float))
    hi = np.atleast_1d(np.asarray(hi, float))
    by_elem = _retained_by_element(record)

    # candidate elements by bounding box overlap
    cands = []
    for e, recs in by_elem.items():
        verts = mesh.vertices[mesh.elements[e]]
        if np.all(verts.max(axis=0) >= lo - 1e-12) and \
                np.all(verts.min(axis=0) <= hi + 1e-12):
            cands.append((e, recs))

    gp, gw = gauss01(npts)
    axes = [lo[i] + gp * (hi[i] - lo[i]) for i in range(n)]
    if n == 1:
        X = axes[0][:, None]
        W = gw
    else:
        XX, YY = np.meshgrid(axes[0], axes[1], indexing="ij")
        X = np.column_stack([XX.ravel(), YY.ravel()])
        W = np.outer(gw, gw).ravel()

    tol = 1e-10 * max(1.0, abs(t))
    vals = np.empty(len(W))
    for k, x in enumerate(X):
        hit = None
        for e, recs in cands:
            mu = _bary(traces, e, x)
            if np.all(mu >= -1e-12) and mu.sum() <= 1.0 + 1e-12:
                hit = _locate_record(recs, traces, e, x, t, tol)
                if hit is not None:
                    break
        if hit is None:
            raise RuntimeError(
                f"no retained local covers point {x} at time {t}")
        _, _, u = hit.fields(x[None, :], t)
        vals[k] = float(u[0])
    return vals, W, float(np.prod(hi - lo))


def box_mean_U(record: SolutionRecord, lo, hi, t: float,
               npts: int = 4) -> float:
    """Mean recovered displacement over an axis-aligned box at time t.

    The run must have retained locals covering the box at that time; tensor
    Gauss points of the box are located in the retained element polynomials.
    """
    vals, W, _ = _box_U_samples(record, lo, hi, t, npts)
    return float(W @ vals) / float(W.sum())


def box_l1_U(record: SolutionRecord, lo, hi, t: float,
             npts: int = 4) -> float:
    """L1 norm of the recovered displacement over an axis-aligned box."""
    vals, W, measure = _box_U_samples(record, lo, hi, t, npts)
    return float(W @ np.abs(vals)) / float(W.sum()) * measure


def sample_front(record: SolutionRecord, t: float):
    """Fields at the stored quadrature points of every retained element at
    one moment in time.  Returns (x, v, sigma, U); U is None when the run
    did not carry the displacement."""
    traces = record.traces
    n = traces.mesh.n
    refpts = traces.rule.points
    by_elem = _retained_by_element(record)
    tol = 1e-10 * max(1.0, abs(t))

    xs, vs, ss, us = [], [], [], []
    for e in sorted(by_elem):
        recs = by_elem[e]
        x = traces.points[e]
        Q = x.shape[0]
        filled = np.zeros(Q, dtype=bool)
        v = np.empty(Q)
        sig = np.empty((Q, n))
        u = np.empty(Q) if traces.with_U else None
        for rec in recs:
            bt = rec.bottom_times
            tt = rec.top_times
            bq = bt[0] + refpts @ (bt[1:] - bt[0])
            tq = tt[0] + refpts @ (tt[1:] - tt[0])
            mask = ~filled & (bq - tol <= t) & (t <= tq + tol)
            if not mask.any():
                continue
            fv, fs, fu = rec.fields(x[mask], t)
            v[mask] = fv
            sig[mask] = fs
            if u is not None:
                u[mask] = fu
            filled |= mask
        if not filled.all():
            raise RuntimeError(
                f"element {e}: retained locals do not cover time {t}")
        xs.append(x)
        vs.append(v)
        ss.append(sig)
        if u is not None:
            us.append(u)
    if not xs:
        raise RuntimeError("record has no retained locals")
    X = np.concatenate(xs)
    V = np.concatenate(vs)
    S = np.concatenate(ss)
    U = np.concatenate(us) if us else None
    return X, V, S, U


def sample_grid_U(record: SolutionRecord, axes, t: float) -> np.ndarray:
    """Recovered displacement on a tensor grid of points at time t.

    ``axes`` holds one sorted coordinate array per space dimension; the
    result has shape ``(len(axes[0]), ...)``.  Each element only ever sees
    the grid indices inside its bounding box, so the cost stays linear in
    the number of retained elements.
    """
    traces = record.traces
    mesh = traces.mesh
    n = mesh.n
    if not traces.with_U:
        raise ValueError("trace store does not carry the displacement")
    axes = [np.asarray(a, float) for a in axes]
    if len(axes) != n:
        raise ValueError(f"expected {n} coordinate arrays, got {len(axes)}")

    shape = tuple(len(a) for a in axes)
    U = np.full(shape, np.nan)
    filled = np.zeros(shape, dtype=bool)
    tol = 1e-10 * max(1.0, abs(t))
    eps = 1e-12
    for e, recs in _retained_by_element(record).items():
        verts = mesh.vertices[mesh.elements[e]]
        lo = verts.min(axis=0)
        hi = verts.max(axis=0)
        ranges = []
        for d in range(n):
            i0 = np.searchsorted(axes[d], lo[d] - eps, "left")
            i1 = np.searchsorted(axes[d], hi[d] + eps, "right")
            ranges.append(np.arange(i0, i1))
        if any(len(r) == 0 for r in ranges):
            continue
        if n == 1:
            idx = (ranges[0],)
        else:
            II, JJ = np.meshgrid(ranges[0], ranges[1], indexing="ij")
            idx = (II.ravel(), JJ.ravel())
        sub = ~filled[idx]
        if not sub.any():
            continue
        idx = tuple(i[sub] for i in idx)
        X = np.column_stack([axes[d][idx[d]] for d in range(n)])

        d0 = X - traces.origin[e]
        B = traces.span[e]
        if n == 1:
            mu = d0 / B[0, 0]
        else:
            det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
            mu = np.column_stack([
                (B[1, 1] * d0[:, 0] - B[1, 0] * d0[:, 1]) / det,
                (B[0, 0] * d0[:, 1] - B[0, 1] * d0[:, 0]) / det,
            ])
        inside = np.all(mu >= -1e-12, axis=1) & (mu.sum(axis=1) <= 1 + 1e-12)
        if not inside.any():
            continue
        idx = tuple(i[inside] for i in idx)
        X = X[inside]
        mu = mu[inside]
        open_pts = np.ones(len(X), dtype=bool)
        for rec in recs:
            bt = rec.bottom_times
            tt = rec.top_times
            bq = bt[0] + mu @ (bt[1:] - bt[0])
            tq = tt[0] + mu @ (tt[1:] - tt[0])
            take = open_pts & (bq - tol <= t) & (t <= tq + tol)
            if not take.any():
                continue
            _, _, u = rec.fields(X[take], t)
            tgt = tuple(i[take] for i in idx)
            U[tgt] = u
            filled[tgt] = True
            open_pts &= ~take
            if not open_pts.any():
                break

    if not filled.all():
        k = np.argwhere(~filled)[0]
        pt = tuple(float(axes[d][k[d]]) for d in range(n))
        raise RuntimeError(
            f"no retained local covers grid point {pt} at time {t}")
    return U
