"""Spatial simplex meshes (intervals, triangles) with materials and markers.

Meshes stay deliberately small: vertex coordinates, element connectivity with
a material id per element, and a marker (``dirichlet`` or ``neumann``) per
boundary facet.  Adjacency tables are built eagerly so downstream code never
recomputes them.  Wavespeed jumps must follow material boundaries, which is
why material ids live on the mesh rather than on the solver.

The ASCII format is line oriented::

    # comment
    dim 2
    vertices <count>
    x y
    ...
    elements <count>
    v0 v1 v2 material
    ...
    boundary <count>
    v0 v1 marker
    ...

Floats are written with 17 significant digits, so write -> read round-trips
exactly.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MeshError",
    "MeshFormatError",
    "MARKERS",
    "SpatialMesh",
    "WavespeedMap",
    "make_interval_mesh",
    "make_rect_mesh",
    "make_square_mesh",
    "make_lshape_graded",
    "read_mesh",
    "write_mesh",
]

MARKERS = ("dirichlet", "neumann")


class MeshError(ValueError):
    """Invariant violation; the message names the offending entity."""


class MeshFormatError(MeshError):
    """Malformed mesh document; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _signed_volume(vertices: np.ndarray, element: np.ndarray) -> float:
    pts = vertices[element]
    if vertices.shape[1] == 1:
        return float(pts[1, 0] - pts[0, 0])
    e1 = pts[1] - pts[0]
    e2 = pts[2] - pts[0]
    return 0.5 * float(e1[0] * e2[1] - e1[1] * e2[0])


class SpatialMesh:
    """Conforming simplex mesh in 1 or 2 space dimensions."""

    def __init__(self, vertices, elements, boundary, material=None):
        self.vertices = np.asarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] not in (1, 2):
            raise MeshError("vertices must be an (nv, n) array with n in (1, 2)")
        self.n = self.vertices.shape[1]
        self.elements = np.asarray(elements, dtype=np.int64)
        if self.elements.ndim != 2 or self.elements.shape[1] != self.n + 1:
            raise MeshError(f"elements must be (ne, {self.n + 1}) vertex indices")
        ne = len(self.elements)
        if material is None:
            material = np.zeros(ne, dtype=np.int64)
        self.material = np.asarray(material, dtype=np.int64)
        if self.material.shape != (ne,):
            raise MeshError("material must hold one id per element")

        self.boundary: dict[tuple[int, ...], str] = {}
        for facet, marker in (boundary.items() if isinstance(boundary, dict) else boundary):
            key = tuple(sorted(int(v) for v in facet))
            if marker not in MARKERS:
                raise MeshError(f"facet {key}: unknown marker {marker!r}")
            self.boundary[key] = marker

        self._build_and_validate()

    def _build_and_validate(self) -> None:
        nv = len(self.vertices)
        if self.elements.size and (self.elements.min() < 0 or self.elements.max() >= nv):
            raise MeshError("element refers to a vertex outside the vertex table")

        self.volumes = np.empty(len(self.elements))
        for e, elem in enumerate(self.elements):
            if len(set(elem.tolist())) != self.n + 1:
                raise MeshError(f"element {e} repeats a vertex")
            vol = _signed_volume(self.vertices, elem)
            if vol <= 0.0:
                raise MeshError(f"element {e} has non-positive volume {vol:g}")
            self.volumes[e] = vol

        self.facet_elements: dict[tuple[int, ...], list[int]] = {}
        for e, elem in enumerate(self.elements):
            for skip in range(self.n + 1):
                facet = tuple(sorted(int(v) for i, v in enumerate(elem) if i != skip))
                self.facet_elements.setdefault(facet, []).append(e)
        for facet, incident in self.facet_elements.items():
            if len(incident) > 2:
                raise MeshError(
                    f"facet {facet} is shared by {len(incident)} elements: {incident}")

        geometric_boundary = {f for f, inc in self.facet_elements.items() if len(inc) == 1}
        for facet in self.boundary:
            if facet not in self.facet_elements:
                raise MeshError(f"marked facet {facet} does not exist in the mesh")
            if facet not in geometric_boundary:
                raise MeshError(f"marked facet {facet} is interior")
        missing = geometric_boundary - set(self.boundary)
        if missing:
            raise MeshError(f"boundary facet {sorted(missing)[0]} has no marker")

        self.vertex_elements: list[list[int]] = [[] for _ in range(nv)]
        for e, elem in enumerate(self.elements):
            for v in elem:
                self.vertex_elements[int(v)].append(e)

        self.edges: dict[tuple[int, int], list[int]] = {}
        for e, elem in enumerate(self.elements):
            ids = sorted(int(v) for v in elem)
            if self.n == 1:
                pairs = [(ids[0], ids[1])]
            else:
                pairs = [(ids[0], ids[1]), (ids[0], ids[2]), (ids[1], ids[2])]
            for pair in pairs:
                self.edges.setdefault(pair, []).append(e)

        self.neighbors: list[list[int]] = [[] for _ in range(nv)]
        for (u, v) in self.edges:
            self.neighbors[u].append(v)
            self.neighbors[v].append(u)
        for lst in self.neighbors:
            lst.sort()

    # -- convenience ------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    def element_diameter(self, e: int) -> float:
        pts = self.vertices[self.elements[e]]
        d = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = max(d, float(np.linalg.norm(pts[i] - pts[j])))
        return d

    def diameters(self) -> np.ndarray:
        if not hasattr(self, "_diameters"):
            self._diameters = np.array(
                [self.element_diameter(e) for e in range(self.num_elements)])
            self._diameters.setflags(write=False)
        return self._diameters

    def centroids(self) -> np.ndarray:
        return self.vertices[self.elements].mean(axis=1)

    def total_volume(self) -> float:
        return float(self.volumes.sum())

    def boundary_facets_of_vertex(self, v: int) -> list[tuple[tuple[int, ...], str]]:
        return [(f, m) for f, m in sorted(self.boundary.items()) if v in f]

    def interface_facets(self) -> list[tuple[int, ...]]:
        """Interior facets whose two elements carry different materials."""
        out = []
        for facet, inc in sorted(self.facet_elements.items()):
            if len(inc) == 2 and self.material[inc[0]] != self.material[inc[1]]:
                out.append(facet)
        return out


@dataclass(frozen=True)
class WavespeedMap:
    """Piecewise constant wavespeed keyed by element material id."""

    speeds: dict[int, float] = field(default_factory=lambda: {0: 1.0})

    def __post_init__(self):
        for mat, c in self.speeds.items():
            if not c > 0:
                raise ValueError(f"wavespeed for material {mat} must be positive, got {c}")

    @classmethod
    def uniform(cls, c: float) -> "WavespeedMap":
        return cls({0: float(c)})

    def of(self, material: int) -> float:
        try:
            return self.speeds[int(material)]
        except KeyError:
            raise KeyError(f"no wavespeed for material {material}") from None

    def for_elements(self, mesh: SpatialMesh) -> np.ndarray:
        return np.array([self.of(m) for m in mesh.material])

    def max_speed(self) -> float:
        return max(self.speeds.values())


# -- generators -----------------------------------------------------------

def make_interval_mesh(a: float, b: float, num_elements: int,
                       left: str = "dirichlet", right: str = "dirichlet",
                       material_fn=None) -> SpatialMesh:
    """Uniform mesh of [a, b] with the two endpoint markers."""
    if num_elements < 1:
        raise ValueError("need at least one element")
    if not b > a:
        raise ValueError("interval must have positive length")
    xs = np.linspace(a, b, num_elements + 1).reshape(-1, 1)
    elems = np.column_stack([np.arange(num_elements), np.arange(1, num_elements + 1)])
    material = np.zeros(num_elements, dtype=np.int64)
    if material_fn is not None:
        centers = 0.5 * (xs[:-1, 0] + xs[1:, 0])
        material = np.array([int(material_fn(c)) for c in centers], dtype=np.int64)
    boundary = {(0,): left, (num_elements,): right}
    return SpatialMesh(xs, elems, boundary, material)


def make_rect_mesh(xs, ys, marker: str = "dirichlet", material_fn=None) -> SpatialMesh:
    """Tensor grid over given x/y lines; each cell split into two right triangles."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 2 or len(ys) < 2:
        raise ValueError("need at least one cell in each direction")
    if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
        raise ValueError("grid lines must be strictly increasing")
    nx, ny = len(xs) - 1, len(ys) - 1
    vid = lambda i, j: j * (nx + 1) + i
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack([X.T.ravel(), Y.T.ravel()])
    elems = []
    mats = []
    for j in range(ny):
        for i in range(nx):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            elems.append((a, b, c))
            elems.append((a, c, d))
            if material_fn is not None:
                cx = (xs[i] + xs[i + 1]) / 2.0
                cy = (ys[j] + ys[j + 1]) / 2.0
                # both triangles of a cell share the cell material: jumps in
                # the wavespeed must line up with grid lines, not diagonals
                mats.extend([int(material_fn(np.array([cx, cy])))] * 2)
    material = np.array(mats, dtype=np.int64) if mats else None
    elems = np.array(elems, dtype=np.int64)
    boundary = {}
    for i in range(nx):
        boundary[tuple(sorted((vid(i, 0), vid(i + 1, 0))))] = marker
        boundary[tuple(sorted((vid(i, ny), vid(i + 1, ny))))] = marker
    for j in range(ny):
        boundary[tuple(sorted((vid(0, j), vid(0, j + 1))))] = marker
        boundary[tuple(sorted((vid(nx, j), vid(nx, j + 1))))] = marker
    return SpatialMesh(verts, elems, boundary, material)


def make_square_mesh(h: float, marker: str = "dirichlet") -> SpatialMesh:
    """Unit square [0,1]^2 with cell size <= h (two triangles per cell)."""
    if not h > 0:
        raise ValueError("h must be positive")
    m = max(1, math.ceil(1.0 / h - 1e-12))
    lines = np.linspace(0.0, 1.0, m + 1)
    return make_rect_mesh(lines, lines, marker)


def _lshape_base(h_max: float) -> tuple[np.ndarray, list]:
    # cell size chosen so the base diameters (cell diagonals) stay <= h_max
    m = max(1, math.ceil(math.sqrt(2.0) / h_max - 1e-12))
    h = 1.0 / m
    lines = np.arange(-m, m + 1) * h
    nlen = 2 * m + 1
    vid = lambda i, j: j * nlen + i
    verts = np.array([[lines[i], lines[j]] for j in range(nlen) for i in range(nlen)])
    elems = []
    for j in range(2 * m):
        for i in range(2 * m):
            cx = (lines[i] + lines[i + 1]) / 2.0
            cy = (lines[j] + lines[j + 1]) / 2.0
            if cx > 0.0 and cy < 0.0:
                continue                      # removed quadrant of the L
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            elems.append([a, b, c])
            elems.append([a, c, d])
    used = sorted({v for e in elems for v in e})
    remap = {v: k for k, v in enumerate(used)}
    verts = verts[used]
    elems = [[remap[v] for v in e] for e in elems]
    return verts, elems


def _longest_edge(verts, tri: list[int]) -> tuple[int, int]:
    best = None
    best_len = -1.0
    for k in range(3):
        u, v = tri[k], tri[(k + 1) % 3]
        d = float(np.linalg.norm(verts[u] - verts[v]))
        key = (d, -min(u, v), -max(u, v))
        if best is None or key > (best_len, -min(best[0], best[1]), -max(best[0], best[1])):
            best = (u, v)
            best_len = d
    return best


def make_lshape_graded(h_max: float, mu: float = 1.0 / 3.0,
                       marker: str = "dirichlet") -> SpatialMesh:
    """L-shaped domain [-1,1]^2 minus [0,1]x[-1,0], graded toward the corner.

    Element sizing targets ``h_K <= max(h_max * r^(1-mu), h_min)`` with
    ``r`` the centroid distance to the reentrant corner at the origin and
    ``h_min = h_max^(1/mu)``.  mu = 1 keeps the base mesh uniform.  Grading is
    realized by conforming longest-edge bisection, which on this mesh keeps
    every triangle a right isosceles one.
    """
    if not 0 < mu <= 1:
        raise ValueError("grading exponent mu must lie in (0, 1]")
    if not h_max > 0:
        raise ValueError("h_max must be positive")
    verts_arr, elems = _lshape_base(h_max)
    verts: list[np.ndarray] = [v for v in verts_arr]
    h_min = h_max ** (1.0 / mu)
    midpoint: dict[tuple[int, int], int] = {}
    alive: list[list[int] | None] = list(elems)

    def edge_key(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def get_midpoint(u: int, v: int) -> int:
        key = edge_key(u, v)
        if key not in midpoint:
            verts.append(0.5 * (verts[key[0]] + verts[key[1]]))
            midpoint[key] = len(verts) - 1
        return midpoint[key]

    edge_map: dict[tuple[int, int], list[int]] = {}

    def register(eid: int):
        tri = alive[eid]
        for k in range(3):
            edge_map.setdefault(edge_key(tri[k], tri[(k + 1) % 3]), []).append(eid)

    def unregister(eid: int):
        tri = alive[eid]
        for k in range(3):
            key = edge_key(tri[k], tri[(k + 1) % 3])
            edge_map[key].remove(eid)
            if not edge_map[key]:
                del edge_map[key]

    for eid in range(len(alive)):
        register(eid)

    def bisect(eid: int, depth: int = 0):
        """Split eid through its longest edge, refining the neighbor first
        whenever the shared edge is not also the neighbor's longest edge."""
        if depth > 64:
            raise MeshError("bisection recursion failed to terminate")
        tri = alive[eid]
        if tri is None:
            return
        u, v = _longest_edge(verts, tri)
        key = edge_key(u, v)
        others = [e for e in edge_map.get(key, []) if e != eid]
        if others:
            nb = others[0]
            while True:
                nu, nv = _longest_edge(verts, alive[nb])
                if edge_key(nu, nv) == key:
                    break
                bisect(nb, depth + 1)
                still = [e for e in edge_map.get(key, []) if e != eid]
                if not still:
                    nb = None
                    break
                nb = still[0]
        mid = get_midpoint(u, v)
        for target in [eid] + [e for e in edge_map.get(key, []) if e != eid]:
            tri_t = alive[target]
            if tri_t is None:
                continue
            w = next(x for x in tri_t if x not in (u, v))
            # children keep parent orientation: (a, mid, w) and (mid, b, w)
            # where (a, b) traverses the split edge in parent order
            k = tri_t.index(u) if (tri_t.index(v) - tri_t.index(u)) % 3 == 1 else tri_t.index(v)
            a = tri_t[k]
            b = tri_t[(k + 1) % 3]
            unregister(target)
            alive[target] = None
            alive.append([a, mid, w])
            register(len(alive) - 1)
            alive.append([mid, b, w])
            register(len(alive) - 1)

    guard = 0
    while True:
        guard += 1
        if guard > 200:
            raise MeshError("grading loop failed to converge")
        varr = np.asarray(verts)
        marked = []
        for eid, tri in enumerate(alive):
            if tri is None:
                continue
            pts = varr[tri]
            diam = max(np.linalg.norm(pts[0] - pts[1]),
                       np.linalg.norm(pts[1] - pts[2]),
                       np.linalg.norm(pts[0] - pts[2]))
            r = float(np.linalg.norm(pts.mean(axis=0)))
            bound = max(h_max * r ** (1.0 - mu), h_min)
            if diam > bound * (1.0 + 1e-12):
                marked.append(eid)
        if not marked:
            break
        for eid in marked:
            if alive[eid] is not None:
                bisect(eid)

    final = [tri for tri in alive if tri is not None]
    used = sorted({v for tri in final for v in tri})
    remap = {v: k for k, v in enumerate(used)}
    varr = np.asarray(verts)[used]
    elems_arr = np.array([[remap[v] for v in tri] for tri in final], dtype=np.int64)

    facet_count: dict[tuple[int, int], int] = {}
    for tri in elems_arr:
        ids = sorted(int(v) for v in tri)
        for pair in [(ids[0], ids[1]), (ids[0], ids[2]), (ids[1], ids[2])]:
            facet_count[pair] = facet_count.get(pair, 0) + 1
    boundary = {f: marker for f, cnt in facet_count.items() if cnt == 1}
    return SpatialMesh(varr, elems_arr, boundary)


# -- ASCII round trip ------------------------------------------------------

def write_mesh(mesh: SpatialMesh, target) -> None:
    """Write the line-oriented ASCII form (17 significant digits, LF endings)."""
    own = isinstance(target, str)
    fh = open(target, "w", newline="\n") if own else target
    try:
        fh.write(f"dim {mesh.n}\n")
        fh.write(f"vertices {mesh.num_vertices}\n")
        for v in mesh.vertices:
            fh.write(" ".join(f"{x:.17g}" for x in v) + "\n")
        fh.write(f"elements {mesh.num_elements}\n")
        for e, elem in enumerate(mesh.elements):
            fh.write(" ".join(str(int(v)) for v in elem) + f" {int(mesh.material[e])}\n")
        fh.write(f"boundary {len(mesh.boundary)}\n")
        for facet, marker in sorted(mesh.boundary.items()):
            fh.write(" ".join(str(v) for v in facet) + f" {marker}\n")
    finally:
        if own:
            fh.close()


def read_mesh(source) -> SpatialMesh:
    """Parse the ASCII form; errors carry the offending 1-based line number."""
    own = isinstance(source, str)
    fh = open(source, "r") if own else source
    try:
        numbered = [(i + 1, line.split("#", 1)[0].strip())
                    for i, line in enumerate(fh)]
    finally:
        if own:
            fh.close()
    rows = [(ln, text) for ln, text in numbered if text]
    pos = 0

    def take() -> tuple[int, str]:
        nonlocal pos
        if pos >= len(rows):
            last = rows[-1][0] if rows else 1
            raise MeshFormatError(last, "unexpected end of document")
        row = rows[pos]
        pos += 1
        return row

    def expect_section(name: str) -> int:
        ln, text = take()
        parts = text.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshFormatError(ln, f"expected '{name} <count>', got {text!r}")
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshFormatError(ln, f"bad count in {name!r} header") from None
        if count < 0:
            raise MeshFormatError(ln, f"negative count in {name!r} header")
        return count

    ln, text = take()
    parts = text.split()
    if len(parts) != 2 or parts[0] != "dim":
        raise MeshFormatError(ln, f"expected 'dim <n>', got {text!r}")
    try:
        dim = int(parts[1])
    except ValueError:
        raise MeshFormatError(ln, "bad dimension") from None
    if dim not in (1, 2):
        raise MeshFormatError(ln, f"dimension must be 1 or 2, got {dim}")

    nv = expect_section("vertices")
    verts = np.empty((nv, dim))
    for k in range(nv):
        ln, text = take()
        parts = text.split()
        if len(parts) != dim:
            raise MeshFormatError(ln, f"vertex needs {dim} coordinates, got {len(parts)}")
        try:
            verts[k] = [float(p) for p in parts]
        except ValueError:
            raise MeshFormatError(ln, f"bad vertex coordinate in {text!r}") from None

    ne = expect_section("elements")
    elems = np.empty((ne, dim + 1), dtype=np.int64)
    material = np.empty(ne, dtype=np.int64)
    for k in range(ne):
        ln, text = take()
        parts = text.split()
        if len(parts) != dim + 2:
            raise MeshFormatError(
                ln, f"element needs {dim + 1} vertices and a material id")
        try:
            row = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError(ln, f"bad element row {text!r}") from None
        elems[k] = row[:-1]
        material[k] = row[-1]

    nb = expect_section("boundary")
    boundary = {}
    for k in range(nb):
        ln, text = take()
        parts = text.split()
        if len(parts) != dim + 1:
            raise MeshFormatError(ln, f"boundary row needs {dim} vertices and a marker")
        try:
            facet = tuple(sorted(int(p) for p in parts[:-1]))
        except ValueError:
            raise MeshFormatError(ln, f"bad boundary row {text!r}") from None
        if parts[-1] not in MARKERS:
            raise MeshFormatError(ln, f"unknown marker {parts[-1]!r}")
        boundary[facet] = parts[-1]

    if pos != len(rows):
        raise MeshFormatError(rows[pos][0], "trailing content after boundary section")

    try:
        return SpatialMesh(verts, elems, boundary, material)
    except MeshError as exc:
        raise MeshError(f"mesh document is inconsistent: {exc}") from exc


def mesh_to_string(mesh: SpatialMesh) -> str:
    buf = io.StringIO()
    write_mesh(mesh, buf)
    return buf.getvalue()


def mesh_from_string(doc: str) -> SpatialMesh:
    return read_mesh(io.StringIO(doc))
