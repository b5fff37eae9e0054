"""Advancing-front tent pitching over a spatial mesh.

A tent advances the front time of one vertex; the space-time volume between
the old and new front graphs over the vertex star is the tent.  The front
stays edge-Lipschitz with constant gamma_e / c_edge by induction: the rule
never raises a vertex above neighbor_time + gamma_e * dist / c_edge, and the
raised vertex was the front minimum, so downward slopes only shrink.

gamma is the causality factor for tent *facets*: c_K |grad phi| <= gamma < 1
keeps every facet strictly space-like.  On triangle meshes the edge rule is
derated by sqrt(2) because an affine graph over a right triangle has gradient
up to sqrt(2) times its worst edge slope; the generators in the mesh module
only produce right triangles, so the derate is exact, not a heuristic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .mesh import SpatialMesh, WavespeedMap

__all__ = [
    "Tent",
    "TentSlab",
    "pitch",
    "validate",
    "layers",
    "dump_slab",
    "edge_safety_factor",
]


def edge_safety_factor(gamma: float, n: int) -> float:
    """Edge-slope bound that makes facet gradients respect gamma."""
    return gamma if n == 1 else gamma / math.sqrt(2.0)


@dataclass(frozen=True)
class Tent:
    id: int
    pitch_vertex: int
    star: tuple[int, ...]
    t_bottom: float
    t_top: float
    rim_times: dict[int, float]
    deps: tuple[int, ...]
    interface_facets: tuple[tuple[int, ...], ...]

    @property
    def height(self) -> float:
        return self.t_top - self.t_bottom

    def facet_times(self, element_vertices, top: bool) -> np.ndarray:
        """Front times at an element's vertices for this tent's top or bottom."""
        center = self.t_top if top else self.t_bottom
        return np.array([center if int(v) == self.pitch_vertex
                         else self.rim_times[int(v)] for v in element_vertices])


@dataclass(frozen=True)
class TentSlab:
    tents: tuple[Tent, ...]
    layers: tuple[tuple[int, ...], ...]
    T: float
    t_start: float = 0.0

    @property
    def num_tents(self) -> int:
        return len(self.tents)


def _interface_facets_at(mesh: SpatialMesh, v: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for facet, inc in mesh.facet_elements.items():
        if v in facet and len(inc) == 2 and mesh.material[inc[0]] != mesh.material[inc[1]]:
            out.append(facet)
    return tuple(sorted(out))


def pitch(mesh: SpatialMesh, speeds: WavespeedMap, T: float,
          gamma: float = 0.5, t_start: float = 0.0) -> TentSlab:
    """Greedy advance: always raise the vertex with the lowest front time.

    Ties break toward the smallest vertex id.  The new time is capped at the
    smallest neighbor bound ``tau(u) + gamma_e * dist(u, v) / c_edge(u, v)``
    and at T; c_edge is the max wavespeed among elements containing the edge.
    Each tent depends on the last tent that touched each of its star elements.
    The front starts flat at t_start, which lets chained slabs resume where a
    previous one stopped.
    """
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie strictly between 0 and 1, got {gamma}")
    if not T > t_start:
        raise ValueError("final time T must exceed the start time")

    c_elem = speeds.for_elements(mesh)
    gamma_e = edge_safety_factor(gamma, mesh.n)

    # per-edge advance bound gamma_e * dist / c_edge, precomputed
    edge_bound: dict[tuple[int, int], float] = {}
    for (u, w), elems in mesh.edges.items():
        dist = float(np.linalg.norm(mesh.vertices[u] - mesh.vertices[w]))
        if dist <= 0.0:
            raise ValueError(f"edge ({u}, {w}) has zero length")
        edge_bound[(u, w)] = gamma_e * dist / max(c_elem[e] for e in elems)

    nv = mesh.num_vertices
    tau = np.full(nv, float(t_start))
    finished = np.zeros(nv, dtype=bool)
    last_touch = [-1] * mesh.num_elements
    iface_cache: dict[int, tuple] = {}
    tents: list[Tent] = []

    heap = [(float(t_start), v) for v in range(nv)]
    heapq.heapify(heap)

    while heap:
        t_v, v = heapq.heappop(heap)
        if finished[v] or t_v != tau[v]:
            continue                                 # stale heap entry
        t_star = float(T)
        for u in mesh.neighbors[v]:
            key = (u, v) if u < v else (v, u)
            t_star = min(t_star, float(tau[u]) + edge_bound[key])
        if not t_star > t_v:
            raise RuntimeError(
                f"no progress at vertex {v}: front stuck at {t_v}")
        star = tuple(mesh.vertex_elements[v])
        deps = tuple(sorted({last_touch[e] for e in star if last_touch[e] >= 0}))
        if v not in iface_cache:
            iface_cache[v] = _interface_facets_at(mesh, v)
        tent = Tent(
            id=len(tents),
            pitch_vertex=v,
            star=star,
            t_bottom=float(t_v),
            t_top=float(t_star),
            rim_times={u: float(tau[u]) for u in mesh.neighbors[v]},
            deps=deps,
            interface_facets=iface_cache[v],
        )
        tents.append(tent)
        for e in star:
            last_touch[e] = tent.id
        tau[v] = t_star
        if t_star == T:
            finished[v] = True
        else:
            heapq.heappush(heap, (t_star, v))

    tents_t = tuple(tents)
    lay = layers(TentSlab(tents=tents_t, layers=(), T=float(T)))
    return TentSlab(tents=tents_t, layers=lay, T=float(T),
                    t_start=float(t_start))


def layers(slab: TentSlab) -> tuple[tuple[int, ...], ...]:
    """Longest-path levelization: deps always land in strictly earlier layers."""
    level = [0] * len(slab.tents)
    for tent in slab.tents:
        if tent.deps:
            level[tent.id] = 1 + max(level[d] for d in tent.deps)
    if not slab.tents:
        return ()
    out: list[list[int]] = [[] for _ in range(max(level) + 1)]
    for tent in slab.tents:
        out[level[tent.id]].append(tent.id)
    return tuple(tuple(layer) for layer in out)


def _facet_gradient(mesh: SpatialMesh, element: np.ndarray,
                    times: np.ndarray) -> float:
    pts = mesh.vertices[element]
    if mesh.n == 1:
        return abs((times[1] - times[0]) / (pts[1, 0] - pts[0, 0]))
    e1 = pts[1] - pts[0]
    e2 = pts[2] - pts[0]
    r1 = times[1] - times[0]
    r2 = times[2] - times[0]
    det = e1[0] * e2[1] - e1[1] * e2[0]
    g1 = (e2[1] * r1 - e1[1] * r2) / det
    g2 = (e1[0] * r2 - e2[0] * r1) / det
    return math.hypot(g1, g2)


def validate(slab: TentSlab, mesh: SpatialMesh, speeds: WavespeedMap) -> list[str]:
    """Return human-readable violations; empty list means the slab is sound.

    Checks dependency ordering, per-element front chaining (each tent's bottom
    must equal the previous top over every star element, ending flat at T),
    the facet causality bound c_K |grad phi| <= gamma-free strict space-like
    condition, and the space-time volume tiling.
    """
    bad: list[str] = []
    c_elem = speeds.for_elements(mesh)

    for tent in slab.tents:
        for d in tent.deps:
            if d >= tent.id:
                bad.append(f"tent {tent.id}: dep {d} does not precede it")

    front = [dict() for _ in range(mesh.num_elements)]
    for e in range(mesh.num_elements):
        for v in mesh.elements[e]:
            front[e][int(v)] = slab.t_start

    vol = 0.0
    for tent in slab.tents:
        for e in tent.star:
            elem = mesh.elements[e]
            bottom = tent.facet_times(elem, top=False)
            top = tent.facet_times(elem, top=True)
            stored = np.array([front[e][int(v)] for v in elem])
            if not np.array_equal(bottom, stored):
                bad.append(f"tent {tent.id} element {e}: bottom facet does not "
                           f"chain onto the current front")
            if np.any(top < bottom) or tent.t_top <= tent.t_bottom:
                bad.append(f"tent {tent.id} element {e}: top facet below bottom")
            slope = c_elem[e] * _facet_gradient(mesh, elem, top)
            if slope >= 1.0:
                bad.append(f"tent {tent.id} element {e}: top facet not "
                           f"space-like, c|grad phi| = {slope:.6g}")
            front[e][int(tent.pitch_vertex)] = tent.t_top
            vol += mesh.volumes[e] * tent.height / (mesh.n + 1)

    for e in range(mesh.num_elements):
        for v, t in front[e].items():
            if t != slab.T:
                bad.append(f"element {e} vertex {v}: final front at {t}, not T")
                break

    expect = mesh.total_volume() * (slab.T - slab.t_start)
    if abs(vol - expect) > 1e-10 * expect:
        bad.append(f"tent volumes sum to {vol!r}, expected {expect!r}")
    return bad


def causality_margin(slab: TentSlab, mesh: SpatialMesh,
                     speeds: WavespeedMap) -> float:
    """Max of c_K |grad phi_top| over all tent top facets."""
    c_elem = speeds.for_elements(mesh)
    worst = 0.0
    for tent in slab.tents:
        for e in tent.star:
            elem = mesh.elements[e]
            top = tent.facet_times(elem, top=True)
            worst = max(worst, c_elem[e] * _facet_gradient(mesh, elem, top))
    return worst


def dump_slab(slab: TentSlab, target) -> None:
    """One line per tent: id, pitch vertex, t_bottom, t_top, deps."""
    own = isinstance(target, str)
    fh = open(target, "w", newline="\n") if own else target
    try:
        fh.write("# id vertex t_bottom t_top deps\n")
        for tent in slab.tents:
            deps = ",".join(str(d) for d in tent.deps) if tent.deps else "-"
            fh.write(f"{tent.id} {tent.pitch_vertex} {tent.t_bottom:.17g} "
                     f"{tent.t_top:.17g} {deps}\n")
    finally:
        if own:
            fh.close()
