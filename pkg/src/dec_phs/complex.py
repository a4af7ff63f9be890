"""Simplicial complexes, their boundary complexes and circumcentric dual geometry.

Simplices are stored as sorted vertex tuples with a separate orientation
sign (+1 when the stored orientation agrees with the sorted order).  Ids in
every dimension follow the lexicographic order of the sorted tuples, which
also fixes the ordering of boundary cells.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DegenerateSimplex,
    Disconnected,
    InconsistentOrientation,
    NonManifold,
    NotWellCenterable,
)

WELL_CENTERED_TOL = 1e-9


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation that sorts ``seq`` (entries must be distinct)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@dataclass(frozen=True)
class Simplex:
    """A single simplex: sorted vertices, orientation sign and id."""

    vertices: tuple[int, ...]
    orientation: int
    id: int

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def oriented_vertices(self) -> tuple[int, ...]:
        """Vertex order representing the stored orientation."""
        if self.orientation > 0 or len(self.vertices) < 2:
            return self.vertices
        v = list(self.vertices)
        v[0], v[1] = v[1], v[0]
        return tuple(v)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class SimplicialComplex:
    """Oriented simplicial complex with enumerated faces in every dimension.

    Use :func:`build_complex` to construct one with validation.
    """

    def __init__(
        self,
        vertices: np.ndarray,
        top: np.ndarray,
        top_orientation: np.ndarray,
        lower_orientation: dict[tuple[int, ...], int] | None = None,
    ):
        self.vertices = _readonly(np.array(vertices, dtype=float))
        top = np.asarray(top, dtype=np.int64)
        self.n = top.shape[1] - 1
        lower_orientation = lower_orientation or {}

        tables: list[list[tuple[int, ...]]] = []
        for k in range(self.n):
            faces = set()
            for t in top:
                faces.update(itertools.combinations(tuple(int(v) for v in t), k + 1))
            tables.append(sorted(faces))
        top_sorted = [tuple(int(v) for v in t) for t in top]
        order = sorted(range(len(top_sorted)), key=lambda i: top_sorted[i])
        tables.append([top_sorted[i] for i in order])

        self.simplices: list[np.ndarray] = []
        self.orientation: list[np.ndarray] = []
        self._index: list[dict[tuple[int, ...], int]] = []
        for k, table in enumerate(tables):
            arr = np.array(table, dtype=np.int64).reshape(len(table), k + 1)
            self.simplices.append(_readonly(arr))
            self._index.append({s: i for i, s in enumerate(table)})
            if k == self.n:
                orient = np.asarray(top_orientation, dtype=np.int64)[order]
            else:
                orient = np.array([lower_orientation.get(s, 1) for s in table], dtype=np.int64)
            self.orientation.append(_readonly(orient))

        # faces[k][i, j]: id of the face of simplex i obtained by dropping its j-th vertex
        self.faces: list[np.ndarray | None] = [None]
        self.face_signs: list[np.ndarray | None] = [None]
        for k in range(1, self.n + 1):
            table = self.simplices[k]
            ids = np.empty((len(table), k + 1), dtype=np.int64)
            signs = np.empty((len(table), k + 1), dtype=np.int64)
            idx = self._index[k - 1]
            for i, s in enumerate(table):
                s = tuple(int(v) for v in s)
                for j in range(k + 1):
                    f = s[:j] + s[j + 1:]
                    fid = idx[f]
                    ids[i, j] = fid
                    signs[i, j] = (-1) ** j * self.orientation[k][i] * self.orientation[k - 1][fid]
            self.faces.append(_readonly(ids))
            self.face_signs.append(_readonly(signs))

        if self.n >= 1:
            counts = np.bincount(self.faces[self.n].ravel(), minlength=self.count(self.n - 1))
        else:
            counts = np.zeros(0, dtype=np.int64)
        self.facet_coface_count = _readonly(counts)

        masks: list[np.ndarray] = []
        if self.n >= 1:
            facet_mask = counts == 1
            for k in range(self.n - 1):
                m = np.zeros(self.count(k), dtype=bool)
                for s in self.simplices[self.n - 1][facet_mask]:
                    for f in itertools.combinations(tuple(int(v) for v in s), k + 1):
                        m[self._index[k][f]] = True
                masks.append(m)
            masks.append(facet_mask)
        masks.append(np.zeros(self.count(self.n), dtype=bool))
        self.boundary_mask = [_readonly(m) for m in masks]

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]

    def count(self, k: int) -> int:
        if k < 0 or k > self.n:
            return 0
        return len(self.simplices[k])

    def index_of(self, vertices: Iterable[int]) -> int:
        key = tuple(sorted(int(v) for v in vertices))
        return self._index[len(key) - 1][key]

    def simplex(self, k: int, i: int) -> Simplex:
        return Simplex(tuple(int(v) for v in self.simplices[k][i]), int(self.orientation[k][i]), i)

    def boundary_ids(self, k: int) -> np.ndarray:
        if k > self.n - 1 or k < 0:
            return np.zeros(0, dtype=np.int64)
        return np.nonzero(self.boundary_mask[k])[0]

    def boundary_count(self, k: int) -> int:
        return len(self.boundary_ids(k))

    @cached_property
    def boundary(self) -> "BoundaryComplex":
        return boundary_complex(self)

    def __repr__(self) -> str:
        counts = ", ".join(str(self.count(k)) for k in range(self.n + 1))
        return f"SimplicialComplex(n={self.n}, counts=({counts}))"


@dataclass(frozen=True, eq=False)
class BoundaryComplex:
    """The (n-1)-complex of boundary simplices with its induced orientation.

    ``to_parent[k]`` maps local ids to ids in the parent complex and
    ``from_parent[k]`` maps back (-1 for interior simplices).
    ``trace_sign[k]`` is the relative orientation of each boundary simplex
    in the boundary complex versus the parent.
    """

    complex: SimplicialComplex | None
    parent: SimplicialComplex
    to_parent: list[np.ndarray]
    from_parent: list[np.ndarray]
    trace_sign: list[np.ndarray]

    def count(self, k: int) -> int:
        return len(self.to_parent[k]) if 0 <= k < len(self.to_parent) else 0


def boundary_complex(K: SimplicialComplex) -> BoundaryComplex:
    n = K.n
    if n == 0:
        return BoundaryComplex(None, K, [], [], [])
    to_parent = [K.boundary_ids(k) for k in range(n)]
    from_parent = []
    for k in range(n):
        back = -np.ones(K.count(k), dtype=np.int64)
        back[to_parent[k]] = np.arange(len(to_parent[k]))
        from_parent.append(_readonly(back))

    # induced orientation of each boundary facet, from its unique coface
    facet_ids = to_parent[n - 1]
    induced = {}
    for t in range(K.count(n)):
        for j in range(n + 1):
            f = int(K.faces[n][t, j])
            if K.facet_coface_count[f] == 1:
                induced[f] = (-1) ** j * int(K.orientation[n][t])

    vert_ids = to_parent[0]
    relabel = {int(v): i for i, v in enumerate(vert_ids)}
    local_vertices = K.vertices[vert_ids]
    top = np.array(
        [[relabel[int(v)] for v in K.simplices[n - 1][f]] for f in facet_ids], dtype=np.int64
    ).reshape(len(facet_ids), n)
    top_orient = np.array([induced[int(f)] for f in facet_ids], dtype=np.int64)
    lower = {}
    for k in range(n - 1):
        for f in to_parent[k]:
            key = tuple(relabel[int(v)] for v in K.simplices[k][f])
            lower[key] = int(K.orientation[k][f])
    bc = SimplicialComplex(local_vertices, top, top_orient, lower)

    trace_sign = []
    for k in range(n):
        signs = np.array(
            [int(bc.orientation[k][i]) * int(K.orientation[k][to_parent[k][i]]) for i in range(len(to_parent[k]))],
            dtype=np.int64,
        )
        trace_sign.append(_readonly(signs))
    return BoundaryComplex(bc, K, [_readonly(a) for a in to_parent], from_parent, trace_sign)


# ---------------------------------------------------------------- construction


def _gram(points: np.ndarray) -> np.ndarray:
    """Gram matrices of edge vectors for a batch of simplices, shape (N, k, k)."""
    edges = points[:, 1:, :] - points[:, :1, :]
    return np.einsum("nid,njd->nij", edges, edges)


def _volumes(points: np.ndarray) -> np.ndarray:
    k = points.shape[1] - 1
    if k == 0:
        return np.ones(points.shape[0])
    det = np.linalg.det(_gram(points))
    return np.sqrt(np.clip(det, 0.0, None)) / math.factorial(k)


def build_complex(
    vertices,
    simplices: Sequence[Sequence[int]],
    oriented_faces: Sequence[Sequence[int]] | None = None,
) -> SimplicialComplex:
    """Validate a mesh and build its oriented complex.

    ``simplices`` lists the top-dimensional simplices; their vertex order
    defines their orientation.  ``oriented_faces`` optionally fixes the
    orientation of lower-dimensional simplices by vertex order; unlisted
    simplices keep the sorted orientation.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim == 1:
        verts = verts.reshape(-1, 1)
    if not np.all(np.isfinite(verts)):
        raise ValueError("vertex coordinates must be finite")
    tops = [tuple(int(v) for v in s) for s in simplices]
    if not tops:
        raise ValueError("at least one simplex is required")
    size = len(tops[0])
    if any(len(t) != size for t in tops):
        raise ValueError("all top simplices must have the same dimension")
    n = size - 1
    if n < 1:
        raise ValueError("top simplices must have dimension at least 1")
    if verts.shape[1] < n:
        raise ValueError(f"{n}-simplices cannot be embedded in {verts.shape[1]} dimensions")
    for t in tops:
        if len(set(t)) != size:
            raise DegenerateSimplex(f"repeated vertex in simplex {t}")
        if min(t) < 0 or max(t) >= len(verts):
            raise ValueError(f"simplex {t} references a missing vertex")
    keys = [tuple(sorted(t)) for t in tops]
    if len(set(keys)) != len(keys):
        raise NonManifold("duplicate top simplex")

    pts = verts[np.array(keys)]
    vols = _volumes(pts)
    diam = np.max(np.linalg.norm(pts[:, :, None, :] - pts[:, None, :, :], axis=-1), axis=(1, 2))
    bad = np.nonzero(vols <= 1e-12 * diam**n)[0]
    if bad.size:
        raise DegenerateSimplex(f"simplex {tops[int(bad[0])]} has (near) zero volume")

    lower = {}
    for f in oriented_faces or ():
        f = tuple(int(v) for v in f)
        lower[tuple(sorted(f))] = permutation_sign(f)
    K = SimplicialComplex(verts, np.array(keys), np.array([permutation_sign(t) for t in tops]), lower)
    for key in lower:
        if len(key) - 1 >= n or key not in K._index[len(key) - 1]:
            raise ValueError(f"oriented face {key} is not a lower-dimensional simplex of the mesh")

    if K.facet_coface_count.max() > 2:
        raise NonManifold("a facet is shared by more than two simplices")
    if K.count(0) != len(verts):
        raise Disconnected("some vertices belong to no simplex")

    # combinatorial orientation consistency across interior facets
    acc = np.zeros(K.count(n - 1), dtype=np.int64)
    np.add.at(acc, K.faces[n].ravel(), K.face_signs[n].ravel() * K.orientation[n - 1][K.faces[n].ravel()])
    interior = K.facet_coface_count == 2
    if np.any(acc[interior] != 0):
        raise InconsistentOrientation("neighbouring simplices induce equal orientations on a shared facet")

    _check_connected(K)
    return K


def _components(nodes: Sequence[int], links: dict[int, list[int]]) -> int:
    seen: set[int] = set()
    comps = 0
    for s in nodes:
        if s in seen:
            continue
        comps += 1
        stack = [s]
        seen.add(s)
        while stack:
            a = stack.pop()
            for b in links.get(a, ()):
                if b not in seen:
                    seen.add(b)
                    stack.append(b)
    return comps


def _check_connected(K: SimplicialComplex) -> None:
    n = K.n
    by_facet: dict[int, list[int]] = {}
    for t in range(K.count(n)):
        for f in K.faces[n][t]:
            by_facet.setdefault(int(f), []).append(t)
    links: dict[int, list[int]] = {}
    for ts in by_facet.values():
        if len(ts) == 2:
            links.setdefault(ts[0], []).append(ts[1])
            links.setdefault(ts[1], []).append(ts[0])
    if _components(range(K.count(n)), links) != 1:
        raise Disconnected("top simplices are not connected through shared facets")
    if n < 2:
        return
    # the star of each vertex must be connected through facets containing it
    star: dict[int, list[int]] = {}
    for t in range(K.count(n)):
        for v in K.simplices[n][t]:
            star.setdefault(int(v), []).append(t)
    for v, ts in star.items():
        local: dict[int, list[int]] = {}
        tset = set(ts)
        for f, pair in by_facet.items():
            if len(pair) == 2 and pair[0] in tset and v in K.simplices[n - 1][f]:
                local.setdefault(pair[0], []).append(pair[1])
                local.setdefault(pair[1], []).append(pair[0])
        if _components(ts, local) != 1:
            raise NonManifold(f"vertex {v} has a disconnected link")


# ------------------------------------------------------------------- geometry


def circumcenter(points) -> np.ndarray:
    """Circumcenter of a simplex, lying in its affine hull."""
    c, _ = _circumcenters(np.asarray(points, dtype=float)[None])
    return c[0]


def _circumcenters(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch circumcenters and their barycentric coordinates."""
    k = points.shape[1] - 1
    if k == 0:
        return points[:, 0, :].copy(), np.ones((points.shape[0], 1))
    gram = _gram(points)
    rhs = 0.5 * np.einsum("nii->ni", gram)
    try:
        y = np.linalg.solve(gram, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise DegenerateSimplex("cannot place circumcenter of a degenerate simplex") from exc
    bary = np.concatenate([1.0 - y.sum(axis=1, keepdims=True), y], axis=1)
    centers = np.einsum("ni,nid->nd", bary, points)
    return centers, bary


@dataclass(frozen=True, eq=False)
class DualGeometry:
    """Circumcenters, primal volumes and dual-cell volumes of a complex.

    ``dual_volume[k]`` holds interior dual volumes of k-simplices (clipped
    to the mesh), ``boundary_dual_volume[k]`` the dual volumes of boundary
    k-simplices measured inside the boundary complex.
    """

    circumcenters: list[np.ndarray]
    barycentric: list[np.ndarray]
    primal_volume: list[np.ndarray]
    dual_volume: list[np.ndarray]
    boundary_dual_volume: list[np.ndarray] = field(default_factory=list)


def _dual_volumes(K: SimplicialComplex, centers: list[np.ndarray], bary: list[np.ndarray]) -> list[np.ndarray]:
    """Signed sums of elementary dual simplices over all flags in each top simplex."""
    n = K.n
    out = [np.zeros(K.count(k)) for k in range(n + 1)]
    for t in K.simplices[n]:
        t = tuple(int(v) for v in t)
        for k in range(n + 1):
            for sigma in itertools.combinations(t, k + 1):
                sid = K._index[k][sigma]
                rest = [v for v in t if v not in sigma]
                for perm in itertools.permutations(rest):
                    chain = [sigma]
                    sign = 1.0
                    for w in perm:
                        nxt = tuple(sorted(chain[-1] + (w,)))
                        j = len(chain[-1])
                        nid = K._index[j][nxt]
                        sign *= np.sign(bary[j][nid][nxt.index(w)])
                        chain.append(nxt)
                    pts = np.array([centers[len(c) - 1][K._index[len(c) - 1][c]] for c in chain])
                    out[k][sid] += sign * _volumes(pts[None])[0]
    return out


def compute_dual_geometry(K: SimplicialComplex) -> DualGeometry:
    """Circumcentric dual geometry, including the boundary dual volumes."""
    centers, bary, prim = [], [], []
    for k in range(K.n + 1):
        pts = K.vertices[K.simplices[k]]
        c, b = _circumcenters(pts)
        centers.append(_readonly(c))
        bary.append(_readonly(b))
        prim.append(_readonly(_volumes(pts)))
    dual = [_readonly(v) for v in _dual_volumes(K, centers, bary)]
    bdual: list[np.ndarray] = []
    bc = K.boundary.complex
    if bc is not None:
        bgeo = compute_dual_geometry(bc)
        bdual = [_readonly(v.copy()) for v in bgeo.dual_volume]
    return DualGeometry(centers, bary, prim, dual, bdual)


@dataclass(frozen=True)
class WellCenteredReport:
    ok: bool
    offenders: dict[int, list[int]]
    min_barycentric: float

    def __bool__(self) -> bool:
        return self.ok


def is_well_centered(K: SimplicialComplex, G: DualGeometry | None = None, tol: float = WELL_CENTERED_TOL) -> WellCenteredReport:
    """Every simplex of dimension >= 1 must strictly contain its circumcenter."""
    G = G or compute_dual_geometry(K)
    offenders: dict[int, list[int]] = {}
    worst = math.inf
    for k in range(1, K.n + 1):
        mins = G.barycentric[k].min(axis=1)
        worst = min(worst, float(mins.min()))
        bad = np.nonzero(mins <= tol)[0]
        if bad.size:
            offenders[k] = [int(i) for i in bad]
    return WellCenteredReport(not offenders, offenders, worst)


# ----------------------------------------------------------------- generators


def generate_interval_mesh(n_edges: int, length: float = 1.0) -> tuple[SimplicialComplex, DualGeometry]:
    """Uniform subdivision of [0, length] into ``n_edges`` edges."""
    if n_edges < 1:
        raise ValueError("n_edges must be positive")
    if not (length > 0 and math.isfinite(length)):
        raise ValueError("length must be positive and finite")
    x = np.linspace(0.0, length, n_edges + 1)
    K = build_complex(x.reshape(-1, 1), [(i, i + 1) for i in range(n_edges)])
    return K, compute_dual_geometry(K)


def generate_strip_mesh(rows: int, cols: int, width: float, height: float) -> tuple[SimplicialComplex, DualGeometry]:
    """Rows of congruent isosceles triangles between horizontal lines.

    Every other row of vertices is shifted by half a column so the apex of
    each triangle sits above the midpoint of its base; the left and right
    sides of the strip therefore zigzag.  Triangles are acute iff the row
    height exceeds half the column width.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be positive")
    if not (width > 0 and height > 0 and math.isfinite(width) and math.isfinite(height)):
        raise NotWellCenterable("strip width and height must be positive")
    h = width / cols
    dy = height / rows
    if dy <= 0.5 * h * (1 + 1e-8):
        raise NotWellCenterable(
            f"row height {dy:g} must exceed half the column width {h / 2:g} for acute triangles"
        )

    def vid(i: int, j: int) -> int:
        return i * (cols + 1) + j

    verts = np.array(
        [[j * h + (0.5 * h if i % 2 else 0.0), i * dy] for i in range(rows + 1) for j in range(cols + 1)]
    )
    tris = []
    for i in range(rows):
        for j in range(cols):
            b0, b1, t0, t1 = vid(i, j), vid(i, j + 1), vid(i + 1, j), vid(i + 1, j + 1)
            if i % 2 == 0:
                tris += [(b0, b1, t0), (b1, t1, t0)]
            else:
                tris += [(b0, b1, t1), (b0, t1, t0)]
    K = build_complex(verts, tris)
    G = compute_dual_geometry(K)
    if not is_well_centered(K, G):
        raise NotWellCenterable("generated strip is not well-centered")
    return K, G


def generate_two_triangle_mesh() -> tuple[SimplicialComplex, DualGeometry]:
    """Two acute triangles sharing the edge (v1, v2).

    Edges carry the orientations [v0,v1], [v1,v2], [v2,v0], [v1,v3], [v3,v2],
    so every boundary edge follows the counterclockwise boundary.
    """
    verts = [[0.0, 0.0], [2.0, 0.0], [1.0, 1.5], [3.0, 1.5]]
    K = build_complex(verts, [(0, 1, 2), (1, 3, 2)], oriented_faces=[(0, 1), (1, 2), (2, 0), (1, 3), (3, 2)])
    return K, compute_dual_geometry(K)


def generate_square_diagonal_mesh(cells: int = 1, side: float = 1.0) -> tuple[SimplicialComplex, DualGeometry]:
    """Square grid with every cell cut along one diagonal.

    All triangles are right triangles, so the mesh is never well-centered;
    it serves as a negative control.
    """
    if cells < 1:
        raise ValueError("cells must be positive")
    h = side / cells
    verts = [[j * h, i * h] for i in range(cells + 1) for j in range(cells + 1)]
    tris = []
    for i in range(cells):
        for j in range(cells):
            a = i * (cells + 1) + j
            b, c, d = a + 1, a + cells + 1, a + cells + 2
            tris += [(a, b, d), (a, d, c)]
    K = build_complex(verts, tris)
    return K, compute_dual_geometry(K)
