"""Cartesian space-time slabs on an interval, for comparison runs.

Cells are the products of a uniform spatial grid with uniform time rows.
The time flux is upwind (each row sees the previous row's top trace), the
spatial flux takes means with jump penalties, and the boundary walls use the
same penalty kernels as the tent scheme.  Testing against the wave basis
drops the volume integral; the full tensor space keeps it.

Every cell has the same size and wavespeed, so each coupling block is a
translation of a reference block and the global sparse matrix assembles
from nine dense prototypes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from .dg import BoundaryData
from .quadrature import gauss01
from .solver import get_tables

__all__ = [
    "CartesianSlab",
    "SlabSystem",
    "JacobiResult",
    "block_jacobi",
    "direct_solve",
    "front_error_slab",
    "MAX_DIRECT_UNKNOWNS",
    "SPACES",
]

SPACES = ("trefftz", "full")

MAX_DIRECT_UNKNOWNS = 20000


class _TrefftzCellBasis:
    """Wave-equation members of degree p on one reference cell."""

    def __init__(self, p: int, c: float, h: float, kind: str):
        self.tables = get_tables(p, 1, kind)
        self.dim = self.tables.dim
        self.c = c
        self.h = h

    def val(self, x, t, center):
        V, S, _ = self.tables.eval(np.asarray(x, float)[:, None], t,
                                   (np.array([center[0]]), center[1]),
                                   self.h, self.c)
        return V, S[0]

    def adjoint_defect(self, x, t, center):
        return None                       # members solve the system exactly


class _TensorCellBasis:
    """Full tensor monomials of degree p in x and t, per field component."""

    def __init__(self, p: int, c: float, h: float):
        ax, kt = np.meshgrid(np.arange(p + 1), np.arange(p + 1), indexing="ij")
        self.ax = ax.ravel()
        self.kt = kt.ravel()
        self.m = (p + 1) ** 2
        self.dim = 2 * self.m
        self.c = c
        self.h = h

    def _powers(self, x, t, center):
        xh = (np.asarray(x, float) - center[0]) / self.h
        th = (np.broadcast_to(np.asarray(t, float), xh.shape) - center[1]) \
            * (self.c / self.h)
        P = xh[:, None] ** self.ax[None, :] * th[:, None] ** self.kt[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            Px = np.where(self.ax > 0,
                          self.ax * xh[:, None] ** np.maximum(self.ax - 1, 0)
                          * th[:, None] ** self.kt, 0.0) / self.h
            Pt = np.where(self.kt > 0,
                          self.kt * th[:, None] ** np.maximum(self.kt - 1, 0)
                          * xh[:, None] ** self.ax, 0.0) * (self.c / self.h)
        return P, Px, Pt

    def val(self, x, t, center):
        P, _, _ = self._powers(x, t, center)
        Q = P.shape[0]
        V = np.zeros((Q, self.dim))
        S = np.zeros((Q, self.dim))
        V[:, :self.m] = self.c * P
        S[:, self.m:] = P
        return V, S

    def adjoint_defect(self, x, t, center):
        """Rows of (c^-2 dt w + dx tau, dt tau + dx w) for every member."""
        P, Px, Pt = self._powers(x, t, center)
        Q = P.shape[0]
        Dv = np.zeros((Q, self.dim))
        Ds = np.zeros((Q, self.dim))
        c = self.c
        Dv[:, :self.m] = Pt * c / (c * c)     # c^-2 dt of the v member
        Ds[:, :self.m] = c * Px               # dx of the v member
        Dv[:, self.m:] = Px                   # dx of the sigma member
        Ds[:, self.m:] = Pt                   # dt of the sigma member
        return Dv, Ds


@dataclass
class SlabSystem:
    slab: "CartesianSlab"
    A: "coo_matrix"
    F: np.ndarray
    diag_lu: list

    @property
    def num_unknowns(self) -> int:
        return len(self.F)


@dataclass(frozen=True)
class JacobiResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual: float


class CartesianSlab:
    """Uniform nx-by-nt cell grid over [a, b] x [0, T] at wavespeed c."""

    def __init__(self, a: float, b: float, nx: int, T: float, nt: int,
                 c: float, p: int, space: str = "trefftz",
                 kind: str = "monomial", alpha: float = 0.5,
                 beta: float = 0.5, left: str = "dirichlet",
                 right: str = "dirichlet"):
        if space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}, got {space!r}")
        if nx < 1 or nt < 1:
            raise ValueError("need at least one cell in each direction")
        if not (b > a and T > 0 and c > 0):
            raise ValueError("domain, horizon and wavespeed must be positive")
        self.a, self.b, self.T, self.c = float(a), float(b), float(T), float(c)
        self.nx, self.nt, self.p = int(nx), int(nt), int(p)
        self.space = space
        self.alpha, self.beta = float(alpha), float(beta)
        self.left, self.right = left, right
        self.dx = (b - a) / nx
        self.dt = T / nt
        h = self.dx
        self.basis = (_TrefftzCellBasis(p, c, h, kind) if space == "trefftz"
                      else _TensorCellBasis(p, c, h))
        self.dim = self.basis.dim

    @property
    def num_cells(self) -> int:
        return self.nx * self.nt

    @property
    def dofs(self) -> int:
        return self.num_cells * self.dim

    def cell_center(self, i: int, k: int):
        return (self.a + (i + 0.5) * self.dx, (k + 0.5) * self.dt)

    # -- reference blocks -------------------------------------------------

    def _reference_blocks(self):
        """Dense prototypes; the same for every (interior) cell."""
        bas = self.basis
        c, dx, dt = self.c, self.dx, self.dt
        al, be = self.alpha, self.beta
        m = self.p + 2
        gp, gw = gauss01(m)
        ctr = (0.0, 0.0)                       # reference cell center

        xq = (gp - 0.5) * dx                   # horizontal edge points
        wx = gw * dx
        tq = (gp - 0.5) * dt                   # vertical edge points
        wt = gw * dt

        Vt, St = bas.val(xq, np.full(m, dt / 2), ctr)      # own top
        Vb, Sb = bas.val(xq, np.full(m, -dt / 2), ctr)     # own bottom
        # trial cell one row below, sampled on its top edge: in that cell's
        # local frame these are the same reference points as Vt
        T_top = (Vt * wx[:, None]).T @ Vt / (c * c) + (St * wx[:, None]).T @ St
        M_time = (Vb * wx[:, None]).T @ Vt / (c * c) + (Sb * wx[:, None]).T @ St

        VL, SL = bas.val(np.full(m, -dx / 2), tq, ctr)     # own left edge
        VR, SR = bas.val(np.full(m, dx / 2), tq, ctr)      # own right edge
        Wt = wt[:, None]

        # interior vertical facet: left cell is the "+" side; both sides use
        # the facet normal nu = +1, the jump signs live in sX and sY
        verts = {}
        for (ky, sY, VY, SnY) in (("L", 1.0, VR, SR), ("R", -1.0, VL, SL)):
            for (kx, sX, VX, SnX) in (("L", 1.0, VR, SR), ("R", -1.0, VL, SL)):
                blk = 0.5 * sY * ((SnY * Wt).T @ VX + (VY * Wt).T @ SnX)
                blk += sX * sY * (al * (VY * Wt).T @ VX + be * (SnY * Wt).T @ SnX)
                verts[ky + kx] = blk

        def wall(V, Sn, marker):
            if marker == "dirichlet":
                return (V * Wt).T @ (Sn + al * V)
            return (Sn * Wt).T @ (V + be * Sn)

        W_left = wall(VL, -SL, self.left)
        W_right = wall(VR, SR, self.right)

        Vol = None
        if bas.adjoint_defect(xq, np.zeros(m), ctr) is not None:
            mv = self.p + 2
            gpv, gwv = gauss01(mv)
            XX, TT = np.meshgrid((gpv - 0.5) * dx, (gpv - 0.5) * dt,
                                 indexing="ij")
            WW = np.outer(gwv * dx, gwv * dt).ravel()
            xv, tv = XX.ravel(), TT.ravel()
            Vv, Sv = bas.val(xv, tv, ctr)
            Dv, Ds = bas.adjoint_defect(xv, tv, ctr)
            Vol = -((Dv * WW[:, None]).T @ Vv + (Ds * WW[:, None]).T @ Sv)

        edges = {
            "xq": xq, "wx": wx, "tq": tq, "wt": wt,
            "Vb": Vb, "Sb": Sb, "VL": VL, "SnL": -SL, "VR": VR, "SnR": SR,
        }
        return T_top, M_time, verts, W_left, W_right, Vol, edges

    # -- global assembly --------------------------------------------------

    def assemble(self, initial, bc: Optional[BoundaryData] = None) -> SlabSystem:
        if bc is None:
            bc = BoundaryData.homogeneous()
        T_top, M_time, verts, W_left, W_right, Vol, ed = self._reference_blocks()
        dim, nx, nt = self.dim, self.nx, self.nt
        c = self.c
        al, be = self.alpha, self.beta

        diag = [T_top.copy() for _ in range(self.num_cells)]
        rows, cols, vals = [], [], []
        F = np.zeros(self.dofs)

        def cell(i, k):
            return k * nx + i

        def add(tcell, xcell, blk):
            r0, c0 = tcell * dim, xcell * dim
            rr, cc = np.nonzero(blk)
            rows.append(rr + r0)
            cols.append(cc + c0)
            vals.append(blk[rr, cc])

        for k in range(nt):
            for i in range(nx):
                me = cell(i, k)
                if Vol is not None:
                    diag[me] += Vol
                if i == 0:
                    diag[me] += W_left
                if i == nx - 1:
                    diag[me] += W_right
                if i + 1 < nx:
                    nb = cell(i + 1, k)
                    diag[me] += verts["LL"]
                    diag[nb] += verts["RR"]
                    add(me, nb, verts["LR"])
                    add(nb, me, verts["RL"])
                if k > 0:
                    add(me, cell(i, k - 1), -M_time)

        # data terms: initial bottom inflow and boundary walls
        for i in range(nx):
            xc, _ = self.cell_center(i, 0)
            x = xc + ed["xq"]
            v0 = np.asarray(initial.v0(x[:, None]), float)
            s0 = np.asarray(initial.sigma0(x[:, None]), float)[:, 0]
            F[cell(i, 0) * dim:(cell(i, 0) + 1) * dim] += \
                ed["Vb"].T @ (ed["wx"] * v0 / (c * c)) + ed["Sb"].T @ (ed["wx"] * s0)
        for k in range(nt):
            _, tc = self.cell_center(0, k)
            t = tc + ed["tq"]
            for i, Vw, Snw, marker, xb in (
                    (0, ed["VL"], ed["SnL"], self.left, self.a),
                    (nx - 1, ed["VR"], ed["SnR"], self.right, self.b)):
                xw = np.full(len(t), xb)[:, None]
                sl = slice(cell(i, k) * dim, (cell(i, k) + 1) * dim)
                if marker == "dirichlet":
                    g = np.asarray(bc.g_D(xw, t), float)
                    F[sl] += (al * Vw - Snw).T @ (ed["wt"] * g)
                else:
                    nrm = np.array([-1.0 if i == 0 else 1.0])
                    g = np.asarray(bc.g_N(xw, t, nrm), float)
                    F[sl] += (be * Snw - Vw).T @ (ed["wt"] * g)

        for idx, blk in enumerate(diag):
            add(idx, idx, blk)
        A = coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dofs, self.dofs)).tocsr()
        diag_lu = [lu_factor(blk, check_finite=False) for blk in diag]
        return SlabSystem(self, A, F, diag_lu)

    # -- evaluation -------------------------------------------------------

    def fields_at(self, x: np.ndarray, coeffs: np.ndarray, t: float):
        """v and sigma at points x (all inside one column sweep) at time t."""
        x = np.asarray(x, float)
        k = min(int(t / self.dt), self.nt - 1)
        v = np.empty_like(x)
        s = np.empty_like(x)
        idx = np.clip(((x - self.a) / self.dx).astype(int), 0, self.nx - 1)
        for i in np.unique(idx):
            sel = idx == i
            ctr = self.cell_center(i, k)
            V, S = self.basis.val(x[sel], t, ctr)
            cr = coeffs[(k * self.nx + i) * self.dim:
                        (k * self.nx + i + 1) * self.dim]
            v[sel] = V @ cr
            s[sel] = S @ cr
        return v, s


def direct_solve(system: SlabSystem) -> np.ndarray:
    if system.num_unknowns > MAX_DIRECT_UNKNOWNS:
        raise ValueError(
            f"direct solve limited to {MAX_DIRECT_UNKNOWNS} unknowns, "
            f"system has {system.num_unknowns}")
    return spsolve(system.A.tocsc(), system.F)


def block_jacobi(system: SlabSystem, tol: float = 1e-10,
                 maxit: int = 10000) -> JacobiResult:
    """Cell-block Jacobi: in each sweep every cell solves against the latest
    residual simultaneously.  Returns the flagged result; callers must check
    ``converged`` rather than trust the vector blindly."""
    A, F = system.A, system.F
    dim = system.slab.dim
    x = np.zeros_like(F)
    ref = float(np.linalg.norm(F))
    if ref == 0.0:
        return JacobiResult(x, 0, True, 0.0)
    res = ref
    for it in range(1, maxit + 1):
        r = F - A @ x
        res = float(np.linalg.norm(r))
        if res <= tol * ref:
            return JacobiResult(x, it - 1, True, res)
        for cb, lu in enumerate(system.diag_lu):
            sl = slice(cb * dim, (cb + 1) * dim)
            x[sl] += lu_solve(lu, r[sl], check_finite=False)
    r = F - A @ x
    res = float(np.linalg.norm(r))
    return JacobiResult(x, maxit, res <= tol * ref, res)


def front_error_slab(slab: CartesianSlab, coeffs: np.ndarray, sol,
                     m: Optional[int] = None) -> float:
    """Weighted L2 field error of the top-row trace at t = T."""
    m = slab.p + 2 if m is None else m
    gp, gw = gauss01(m)
    c = slab.c
    total = 0.0
    for i in range(slab.nx):
        x = slab.a + (i + gp) * slab.dx
        w = gw * slab.dx
        v, s = slab.fields_at(x, coeffs, slab.T)
        dv = v - sol.v(x[:, None], slab.T)
        ds = s - sol.sigma(x[:, None], slab.T)[:, 0]
        total += float(w @ (dv * dv / (c * c) + ds * ds))
    return float(np.sqrt(total))
