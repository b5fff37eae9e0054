"""Quadrature on simplices and on space-time facet graphs.

Facets of a tent are graphs of affine functions over spatial simplices, so
every surface integral reduces to a spatial one: with the upward unit normal,
``n^t dS = dx`` and ``n^x dS = -grad(phi) dx``.  A mapped rule therefore keeps
the spatial weights and the (constant) graph gradient instead of metric terms.

Vertical (time-like) facets carry a product rule over the spatial facet and
the local time extent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "QuadRule",
    "FaceQuadrature",
    "WallQuadrature",
    "gauss01",
    "simplex_rule",
    "map_to_facet",
    "map_to_timelike_facet",
]

MAX_GAUSS = 24


@dataclass(frozen=True)
class QuadRule:
    """Reference rule: points (Q, n) in the unit simplex, weights (Q,)."""

    points: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class FaceQuadrature:
    """Rule on an affine space-time graph facet.

    ``sum(f(x, t) * w)`` integrates ``f n^t dS`` over the facet (upward
    normal); dotting with ``-grad`` turns the same weights into ``n^x dS``.
    """

    x: np.ndarray      # (Q, n)
    t: np.ndarray      # (Q,)
    w: np.ndarray      # (Q,)  spatial measure factors
    grad: np.ndarray   # (n,)  gradient of the facet's time graph


@dataclass(frozen=True)
class WallQuadrature:
    """Rule on a vertical facet between two time graphs; n^t = 0 there."""

    x: np.ndarray       # (Q, n)
    t: np.ndarray       # (Q,)
    w: np.ndarray       # (Q,)  true surface measure
    normal: np.ndarray  # (n,)  unit spatial normal, as supplied by the caller


@lru_cache(maxsize=None)
def _gauss01_cached(m: int):
    nodes, weights = np.polynomial.legendre.leggauss(m)
    x = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    # pin symmetry about 1/2 so downstream assemblies are reproducible
    for i in range(m // 2):
        j = m - 1 - i
        xi = 0.5 * (x[i] + (1.0 - x[j]))
        x[i], x[j] = xi, 1.0 - xi
        wi = 0.5 * (w[i] + w[j])
        w[i], w[j] = wi, wi
    if m % 2:
        x[m // 2] = 0.5
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss rule on [0, 1]; exact through degree 2m-1."""
    if not 1 <= m <= MAX_GAUSS:
        raise ValueError(f"gauss01 supports 1..{MAX_GAUSS} points, got {m}")
    return _gauss01_cached(m)


@lru_cache(maxsize=None)
def simplex_rule(n: int, exactness: int) -> QuadRule:
    """Rule on the unit n-simplex, exact for total degree <= exactness.

    n = 2 collapses a tensor rule onto the triangle; the collapse factor
    (1 - u) raises the one-dimensional degree requirement by one.
    """
    if exactness < 0:
        raise ValueError("exactness must be >= 0")
    if n == 1:
        m = max(1, -(-(exactness + 1) // 2))
        if m > MAX_GAUSS:
            raise ValueError(f"exactness {exactness} beyond the 1-D Gauss table")
        x, w = gauss01(m)
        return QuadRule(x.reshape(-1, 1).copy(), w.copy())
    if n == 2:
        m = max(1, -(-(exactness + 2) // 2))
        if m > MAX_GAUSS:
            raise ValueError(f"exactness {exactness} beyond the collapsed rule table")
        u, wu = gauss01(m)
        v, wv = gauss01(m)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        ww = np.outer(wu, wv)
        x = uu.ravel()
        y = (vv * (1.0 - uu)).ravel()
        w = (ww * (1.0 - uu)).ravel()
        pts = np.column_stack([x, y])
        pts.setflags(write=False)
        w.setflags(write=False)
        return QuadRule(pts, w)
    raise ValueError(f"simplex_rule supports n in (1, 2), got {n}")


def map_to_facet(vertices: np.ndarray, vertex_times: np.ndarray,
                 rule: QuadRule) -> FaceQuadrature:
    """Map a reference simplex rule onto the graph facet over one element.

    ``vertices`` is (n+1, n); ``vertex_times`` the affine graph's values at
    those vertices.
    """
    V = np.asarray(vertices, dtype=float)
    tau = np.asarray(vertex_times, dtype=float)
    n = V.shape[1]
    B = (V[1:] - V[0]).T                       # (n, n)
    det = np.linalg.det(B) if n > 1 else B[0, 0]
    x = V[0] + rule.points @ B.T
    dtau = tau[1:] - tau[0]
    t = tau[0] + rule.points @ dtau
    w = rule.weights * abs(det)
    grad = np.linalg.solve(B.T, dtau)
    return FaceQuadrature(x, t, w, grad)


def map_to_timelike_facet(facet_vertices: np.ndarray,
                          bottom_times: np.ndarray, top_times: np.ndarray,
                          normal: np.ndarray, m: int) -> WallQuadrature:
    """Product rule on the vertical wall between two graphs over a facet.

    The spatial facet has n vertices (a point for n = 1, an edge for n = 2);
    both graphs are affine along it.  Walls of zero height yield zero weights.
    """
    F = np.atleast_2d(np.asarray(facet_vertices, dtype=float))
    b = np.atleast_1d(np.asarray(bottom_times, dtype=float))
    tp = np.atleast_1d(np.asarray(top_times, dtype=float))
    nrm = np.asarray(normal, dtype=float)
    if np.any(tp - b < -1e-14 * max(1.0, np.abs(tp).max())):
        raise ValueError("wall top lies below its bottom")
    theta, wt = gauss01(m)
    if F.shape[0] == 1:
        height = tp[0] - b[0]
        x = np.repeat(F, m, axis=0)
        t = b[0] + theta * height
        w = wt * height
        return WallQuadrature(x, t, w, nrm)
    if F.shape[0] == 2:
        s, ws = gauss01(m)
        length = float(np.linalg.norm(F[1] - F[0]))
        xs = F[0] + np.outer(s, F[1] - F[0])         # (m, n)
        bs = b[0] + s * (b[1] - b[0])
        ts = tp[0] + s * (tp[1] - tp[0])
        hs = ts - bs
        X = np.repeat(xs, m, axis=0)
        T = (bs[:, None] + np.outer(hs, theta)).ravel()
        W = (np.outer(ws * hs, wt) * length).ravel()
        return WallQuadrature(X, T, W, nrm)
    raise ValueError("facet must have 1 or 2 vertices")
