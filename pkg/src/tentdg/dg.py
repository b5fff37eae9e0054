"""Local tent systems for the first-order acoustic Trefftz scheme.

A tent carries one polynomial pair per material region of its star; the
unknowns couple through the flux form on the tent's top surface, boundary
walls with upwind penalties alpha (Dirichlet) and beta (Neumann), and
mean/jump terms on material-interface walls inside multi-material tents.
Known data enters from the stored bottom traces.  Because facet rules reuse
the same reference points for every front position, a tent's bottom samples
are bitwise the values its predecessors emitted on their tops.

Scalar recovery adds the displacement U as a carried trace: the unknown then
lives in the scalar space one degree up (constant included) and a facet mass
term pins it to the stored bottom U.  Mode "bottom" places that mass on the
bottom facet with the time-projected measure, which is the variant that
reproduces polynomial displacements exactly; "top" and "top-nt" place it on
the top facet with the surface and projected measures respectively, and are
kept because their failure mode (the facet mean of U freezes) is worth
demonstrating rather than asserting away.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .mesh import SpatialMesh, WavespeedMap
from .quadrature import QuadRule, map_to_timelike_facet, simplex_rule
from .tents import Tent
from .trefftz import build_first_order_basis

__all__ = [
    "RECOVERY_MODES",
    "DGParams",
    "BoundaryData",
    "ReferenceBasisTables",
    "TraceStore",
    "LocalSystem",
    "RegionBlock",
    "RetainedLocal",
    "SingularTentError",
    "TentConditionWarning",
    "assemble_tent",
    "solve_local",
    "emit_traces",
    "trace_rule",
]

RECOVERY_MODES = (None, "bottom", "top", "top-nt")

CONDITION_WARN_THRESHOLD = 1e12


class SingularTentError(RuntimeError):
    """A local tent matrix factored to a zero pivot."""


class TentConditionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DGParams:
    """Penalty weights and the recovery variant, if any."""

    alpha: float = 0.5
    beta: float = 0.5
    recovery: Optional[str] = None

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("penalty parameters alpha and beta must be positive")
        if self.recovery not in RECOVERY_MODES:
            raise ValueError(
                f"recovery must be one of {RECOVERY_MODES}, got {self.recovery!r}")

    @property
    def with_U(self) -> bool:
        return self.recovery is not None


@dataclass(frozen=True)
class BoundaryData:
    """Inflow data on the spatial boundary: g_D pairs with v, g_N with sigma.n."""

    g_D: Callable
    g_N: Callable

    @classmethod
    def from_exact(cls, sol) -> "BoundaryData":
        return cls(
            g_D=lambda x, t: sol.v(x, t),
            g_N=lambda x, t, normal: sol.sigma(x, t) @ np.asarray(normal, float),
        )

    @classmethod
    def homogeneous(cls) -> "BoundaryData":
        zero = lambda x, t, normal=None: np.zeros(np.asarray(x).shape[0])
        return cls(g_D=zero, g_N=zero)


def trace_rule(p: int, n: int) -> QuadRule:
    """Facet rule exact for products of two local members (degree 2p + 2)."""
    return simplex_rule(n, 2 * p + 2)


class ReferenceBasisTables:
    """Dense coefficient tables of the reference basis over one monomial set.

    Evaluation at physical points goes through the shift/scale to reference
    coordinates, a power table per axis and one matrix product per field
    component; nothing per-tent is symbolic.  Physical scalings: v picks up a
    factor c, U a factor h, sigma none.
    """

    def __init__(self, p: int, n: int, kind: str = "monomial",
                 with_U: bool = False):
        basis = build_first_order_basis(p, n, kind, include_constant=with_U)
        self.p = p
        self.n = n
        self.kind = kind
        self.with_U = with_U
        self.dim = len(basis.members)

        support = set()
        for mem in basis.members:
            support.update(mem.v.coeffs)
            for s in mem.sigma:
                support.update(s.coeffs)
            if with_U:
                support.update(mem.U.coeffs)
        cols = sorted(support, key=lambda mi: (mi.total, mi.time, mi.space))
        index = {mi: j for j, mi in enumerate(cols)}
        M = len(cols)
        self.alphas = np.array([mi.space for mi in cols], dtype=np.int64).reshape(M, n)
        self.ks = np.array([mi.time for mi in cols], dtype=np.int64)
        self.max_k = int(self.ks.max(initial=0))
        self.max_space = [int(self.alphas[:, i].max(initial=0)) for i in range(n)]

        self.Cv = np.zeros((self.dim, M))
        self.Cs = np.zeros((n, self.dim, M))
        self.CU = np.zeros((self.dim, M)) if with_U else None
        for j, mem in enumerate(basis.members):
            for mi, c in mem.v.coeffs.items():
                self.Cv[j, index[mi]] = c
            for i, s in enumerate(mem.sigma):
                for mi, c in s.coeffs.items():
                    self.Cs[i, j, index[mi]] = c
            if with_U:
                for mi, c in mem.U.coeffs.items():
                    self.CU[j, index[mi]] = c

    def _monomials(self, xh: np.ndarray, th: np.ndarray) -> np.ndarray:
        Q = th.shape[0]
        pt = np.empty((self.max_k + 1, Q))
        pt[0] = 1.0
        for d in range(1, self.max_k + 1):
            pt[d] = pt[d - 1] * th
        cols = pt[self.ks]
        for ax in range(self.n):
            px = np.empty((self.max_space[ax] + 1, Q))
            px[0] = 1.0
            vals = xh[:, ax]
            for d in range(1, self.max_space[ax] + 1):
                px[d] = px[d - 1] * vals
            cols = cols * px[self.alphas[:, ax]]
        return cols                                    # (M, Q)

    def eval(self, x, t, center, h: float, c: float, need_U: bool = False):
        """Field value matrices (Q, dim) at physical points for one region."""
        x0, t0 = center
        x = np.asarray(x, float)
        xh = (x - x0) / h
        th = (np.broadcast_to(np.asarray(t, float), (x.shape[0],)) - t0) * (c / h)
        P = self._monomials(xh, th)
        V = (self.Cv @ P).T * c
        S = [(self.Cs[i] @ P).T for i in range(self.n)]
        U = (self.CU @ P).T * h if need_U else None
        return V, S, U


class TraceStore:
    """Front times and field samples at fixed per-element quadrature points.

    values[e, q, 0] is v, columns 1..n hold sigma, and with_U appends U.  The
    x positions never move (only the graph times do), so a successor tent
    reads exactly the samples its predecessor wrote.
    """

    def __init__(self, mesh: SpatialMesh, rule: QuadRule, with_U: bool = False):
        self.mesh = mesh
        self.rule = rule
        self.with_U = with_U
        self.ncols = 1 + mesh.n + (1 if with_U else 0)
        ne = mesh.num_elements
        Q = len(rule)
        n = mesh.n
        self.times = np.zeros((ne, n + 1))
        self.values = np.zeros((ne, Q, self.ncols))
        # time-independent geometry per element: offset, spans, measure
        self.origin = np.empty((ne, n))
        self.span = np.empty((ne, n, n))               # rows: V_i - V_0
        self.dets = np.empty(ne)
        self.points = np.empty((ne, Q, n))
        for e in range(ne):
            V = mesh.vertices[mesh.elements[e]]
            self.origin[e] = V[0]
            self.span[e] = V[1:] - V[0]
            self.dets[e] = abs(float(np.linalg.det(self.span[e]))) if n > 1 \
                else abs(float(self.span[e][0, 0]))
            self.points[e] = V[0] + rule.points @ self.span[e]
        self.weights = self.dets[:, None] * rule.weights[None, :]

    @classmethod
    def from_initial(cls, mesh: SpatialMesh, rule: QuadRule, init,
                     with_U: bool = False) -> "TraceStore":
        store = cls(mesh, rule, with_U)
        for e in range(mesh.num_elements):
            x = store.points[e]
            store.values[e, :, 0] = init.v0(x)
            store.values[e, :, 1:1 + mesh.n] = init.sigma0(x)
            if with_U:
                store.values[e, :, 1 + mesh.n] = init.U0(x)
        return store

    def point_times(self, e: int) -> np.ndarray:
        """Front time at each stored quadrature point of element e."""
        tau = self.times[e]
        return tau[0] + self.rule.points @ (tau[1:] - tau[0])

    def facet_gradient(self, e: int, tau: np.ndarray) -> np.ndarray:
        """Spatial gradient of the affine graph with vertex values tau."""
        dtau = np.asarray(tau, float)[1:] - float(tau[0])
        B = self.span[e]
        if self.mesh.n == 1:
            return dtau / B[0]
        det = B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0]
        # rows of B are V_i - V_0, so B g = dtau; invert the 2x2 explicitly
        g0 = (B[1, 1] * dtau[0] - B[0, 1] * dtau[1]) / det
        g1 = (B[0, 0] * dtau[1] - B[1, 0] * dtau[0]) / det
        return np.array([g0, g1])


@dataclass
class RegionBlock:
    material: int
    c: float
    sl: slice
    elements: tuple[int, ...]
    segments: list            # (element, start, stop) into the top arrays
    top_times: list           # per element, vertex times of the tent's top
    bottom_times: list        # per element, vertex times of the tent's bottom
    Vtop: np.ndarray
    Stop: list
    Utop: Optional[np.ndarray]


@dataclass
class LocalSystem:
    tent: Tent
    A: np.ndarray
    b: np.ndarray
    blocks: list
    center: tuple
    h: float
    tables: ReferenceBasisTables


@dataclass(frozen=True)
class RetainedLocal:
    """One region polynomial kept alive after its tent was solved."""

    element: int
    tent_id: int
    material: int
    c: float
    center: tuple
    h: float
    coeffs: np.ndarray
    bottom_times: np.ndarray
    top_times: np.ndarray
    tables: ReferenceBasisTables

    def fields(self, x, t):
        V, S, U = self.tables.eval(x, t, self.center, self.h, self.c,
                                   need_U=self.tables.with_U)
        v = V @ self.coeffs
        sig = np.stack([Si @ self.coeffs for Si in S], axis=1)
        u = U @ self.coeffs if U is not None else None
        return v, sig, u


def _outward_normal(mesh: SpatialMesh, facet, e: int) -> np.ndarray:
    """Unit normal of a facet of element e, pointing away from the element."""
    cen = mesh.vertices[mesh.elements[e]].mean(axis=0)
    if mesh.n == 1:
        x = mesh.vertices[facet[0]]
        return np.array([1.0 if x[0] > cen[0] else -1.0])
    p0, p1 = mesh.vertices[list(facet)]
    d = p1 - p0
    nrm = np.array([d[1], -d[0]]) / float(np.hypot(d[0], d[1]))
    if np.dot(nrm, 0.5 * (p0 + p1) - cen) < 0.0:
        nrm = -nrm
    return nrm


def _vertex_time(tent: Tent, u: int, top: bool) -> float:
    if u == tent.pitch_vertex:
        return tent.t_top if top else tent.t_bottom
    return tent.rim_times[u]


def _wall_points(mesh, tent, facet, normal, m: int):
    """Gauss points/weights on the vertical wall over a facet of the tent."""
    F = mesh.vertices[list(facet)]
    bt = np.array([_vertex_time(tent, u, top=False) for u in facet])
    tp = np.array([_vertex_time(tent, u, top=True) for u in facet])
    return map_to_timelike_facet(F, bt, tp, normal, m)


def assemble_tent(tent: Tent, mesh: SpatialMesh, speeds: WavespeedMap,
                  tables: ReferenceBasisTables, traces: TraceStore,
                  params: DGParams, bc: Optional[BoundaryData] = None) -> LocalSystem:
    """Build the local system of one tent from the current bottom traces."""
    n = mesh.n
    if traces.with_U != params.with_U:
        raise ValueError("trace store and params disagree about carrying U")
    if bc is None:
        bc = BoundaryData.homogeneous()
    rule = traces.rule
    refpts = rule.points
    Q = len(rule)

    mats = sorted({int(mesh.material[e]) for e in tent.star})
    dim = tables.dim
    D = dim * len(mats)
    A = np.zeros((D, D))
    b = np.zeros(D)
    x0 = mesh.vertices[tent.pitch_vertex]
    t0 = 0.5 * (tent.t_bottom + tent.t_top)
    center = (x0, t0)
    h = float(mesh.diameters()[list(tent.star)].max())
    c2_need_top_fac = params.recovery == "top"

    blocks: list[RegionBlock] = []
    for bi, mat in enumerate(mats):
        elems = tuple(e for e in tent.star if int(mesh.material[e]) == mat)
        c = speeds.of(mat)
        sl = slice(bi * dim, (bi + 1) * dim)

        segments = []
        top_times = []
        bottom_times = []
        Xt_l, Tt_l, Wt_l, WGt_l, fac_t_l = [], [], [], [], []
        Tb_l, WGb_l, fac_b_l = [], [], []
        stored_l = []
        q0 = 0
        for e in elems:
            ev = mesh.elements[e]
            tt = tent.facet_times(ev, top=True)
            bt = traces.times[e].copy()
            top_times.append(tt)
            bottom_times.append(bt)
            segments.append((e, q0, q0 + Q))
            q0 += Q

            Xt_l.append(traces.points[e])
            Tt_l.append(tt[0] + refpts @ (tt[1:] - tt[0]))
            w_e = traces.weights[e]
            Wt_l.append(w_e)
            g_t = traces.facet_gradient(e, tt)
            WGt_l.append(w_e[:, None] * g_t[None, :])
            Tb_l.append(bt[0] + refpts @ (bt[1:] - bt[0]))
            g_b = traces.facet_gradient(e, bt)
            WGb_l.append(w_e[:, None] * g_b[None, :])
            if c2_need_top_fac:
                fac_t_l.append(np.full(Q, float(np.sqrt(1.0 + g_t @ g_t))))
                fac_b_l.append(np.full(Q, float(np.sqrt(1.0 + g_b @ g_b))))
            stored_l.append(traces.values[e])

        Xt = np.concatenate(Xt_l)
        Tt = np.concatenate(Tt_l)
        Wt = np.concatenate(Wt_l)
        WGt = np.concatenate(WGt_l)
        Tb = np.concatenate(Tb_l)
        WGb = np.concatenate(WGb_l)
        stored = np.concatenate(stored_l)
        Wb = Wt  # same spatial measure for both graphs

        Vt, St, Ut = tables.eval(Xt, Tt, center, h, c, need_U=params.with_U)
        Vb, Sb, Ub = tables.eval(Xt, Tb, center, h, c, need_U=params.with_U)

        # top flux, tested against the same space
        Arr = (Vt * Wt[:, None]).T @ Vt / (c * c)
        for i in range(n):
            Arr += (St[i] * Wt[:, None]).T @ St[i]
            G = WGt[:, i][:, None]
            Arr -= (St[i] * G).T @ Vt
            Arr -= (Vt * G).T @ St[i]

        # bottom flux with the stored data (outward-down normal flips the
        # sign the formulation carries, so the upward-rule form repeats)
        vb = stored[:, 0]
        rv = Wb * vb / (c * c)
        rs = []
        for i in range(n):
            sbi = stored[:, 1 + i]
            rv -= WGb[:, i] * sbi
            rs.append(Wb * sbi - WGb[:, i] * vb)
        br = Vb.T @ rv
        for i in range(n):
            br += Sb[i].T @ rs[i]

        if params.recovery is not None:
            ub = stored[:, 1 + n]
            if params.recovery == "bottom":
                Arr += (Ub * Wb[:, None]).T @ Ub
                br += Ub.T @ (Wb * ub)
            elif params.recovery == "top":
                fac_t = np.concatenate(fac_t_l)
                fac_b = np.concatenate(fac_b_l)
                Arr += (Ut * (Wt * fac_t)[:, None]).T @ Ut
                br += Ub.T @ (Wb * fac_b * ub)
            else:  # "top-nt"
                Arr += (Ut * Wt[:, None]).T @ Ut
                br += Ub.T @ (Wb * ub)

        A[sl, sl] += Arr
        b[sl] += br
        blocks.append(RegionBlock(mat, c, sl, elems, segments, top_times,
                                  bottom_times, Vt, St, Ut))

    m_wall = tables.p + 2

    # boundary walls at the pitch vertex
    for facet, marker in mesh.boundary_facets_of_vertex(tent.pitch_vertex):
        e = mesh.facet_elements[facet][0]
        bi = mats.index(int(mesh.material[e]))
        blk = blocks[bi]
        nrm = _outward_normal(mesh, facet, e)
        wall = _wall_points(mesh, tent, facet, nrm, m_wall)
        Vw, Sw, _ = tables.eval(wall.x, wall.t, center, h, blk.c)
        Snw = nrm[0] * Sw[0]
        for i in range(1, n):
            Snw = Snw + nrm[i] * Sw[i]
        Ww = wall.w[:, None]
        if marker == "dirichlet":
            A[blk.sl, blk.sl] += (Vw * Ww).T @ (Snw + params.alpha * Vw)
            g = np.asarray(bc.g_D(wall.x, wall.t), float)
            b[blk.sl] += (params.alpha * Vw - Snw).T @ (wall.w * g)
        else:
            A[blk.sl, blk.sl] += (Snw * Ww).T @ (Vw + params.beta * Snw)
            g = np.asarray(bc.g_N(wall.x, wall.t, nrm), float)
            b[blk.sl] += (params.beta * Snw - Vw).T @ (wall.w * g)

    # interface walls between the material regions of this tent
    for facet in tent.interface_facets:
        e1, e2 = mesh.facet_elements[facet]
        if int(mesh.material[e1]) > int(mesh.material[e2]):
            e1, e2 = e2, e1
        nu = _outward_normal(mesh, facet, e1)
        wall = _wall_points(mesh, tent, facet, nu, m_wall)
        Ww = wall.w[:, None]
        sides = []
        for e_side, sign in ((e1, 1.0), (e2, -1.0)):
            blk = blocks[mats.index(int(mesh.material[e_side]))]
            Vw, Sw, _ = tables.eval(wall.x, wall.t, center, h, blk.c)
            Snw = nu[0] * Sw[0]
            for i in range(1, n):
                Snw = Snw + nu[i] * Sw[i]
            sides.append((blk.sl, sign, Vw, Snw))
        for slY, sY, VY, SnY in sides:
            for slX, sX, VX, SnX in sides:
                block = 0.5 * sY * ((SnY * Ww).T @ VX + (VY * Ww).T @ SnX)
                block += sX * sY * (params.alpha * (VY * Ww).T @ VX
                                    + params.beta * (SnY * Ww).T @ SnX)
                A[slY, slX] += block

    return LocalSystem(tent, A, b, blocks, center, h, tables)


def solve_local(system: LocalSystem) -> tuple[np.ndarray, float]:
    """Dense factorization of one tent; returns coefficients and a growth
    estimate max|U_ii| / min|U_ii| standing in for the condition number."""
    lu, piv = lu_factor(system.A, check_finite=False)
    d = np.abs(np.diag(lu))
    dmin = float(d.min())
    dmax = float(d.max())
    if dmin == 0.0 or not np.isfinite(dmax):
        raise SingularTentError(
            f"tent {system.tent.id}: local system is singular")
    growth = dmax / dmin
    if growth > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"tent {system.tent.id}: condition estimate {growth:.3e}",
            TentConditionWarning, stacklevel=2)
    coeffs = lu_solve((lu, piv), system.b, check_finite=False)
    return coeffs, growth


def emit_traces(system: LocalSystem, coeffs: np.ndarray, traces: TraceStore,
                retain=None) -> list[RetainedLocal]:
    """Write the solved tent's top samples over its star; optionally keep the
    region polynomial of selected elements for later point evaluation."""
    kept: list[RetainedLocal] = []
    tent = system.tent
    n = traces.mesh.n
    for blk in system.blocks:
        cr = coeffs[blk.sl]
        v = blk.Vtop @ cr
        sig = [Si @ cr for Si in blk.Stop]
        u = blk.Utop @ cr if blk.Utop is not None else None
        for (e, a, z), tt, bt in zip(blk.segments, blk.top_times, blk.bottom_times):
            traces.times[e] = tt
            traces.values[e, :, 0] = v[a:z]
            for i in range(n):
                traces.values[e, :, 1 + i] = sig[i][a:z]
            if u is not None:
                traces.values[e, :, 1 + n] = u[a:z]
            if retain is not None and retain(e):
                kept.append(RetainedLocal(
                    e, tent.id, blk.material, blk.c, system.center, system.h,
                    cr.copy(), bt, tt, system.tables))
    return kept
