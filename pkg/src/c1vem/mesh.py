"""Polyhedral meshes: data model, I/O, structured generation and geometry."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

logger = logging.getLogger(__name__)

PLANARITY_TOL = 1e-9
WATERTIGHT_TOL = 1e-12

REDUCTIONS = ("mean", "max", "min")
ENTITY_KINDS = ("hP", "hf", "he")


class MeshError(ValueError):
    """Base class for mesh problems."""


class MeshParseError(MeshError):
    pass


class TopologyError(MeshError):
    def __init__(self, message: str, kind: str | None = None, index: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.index = index


@dataclass(frozen=True, eq=False)
class FaceFrame:
    """Orthonormal right-handed frame ``(v_x, v_y, n)`` anchored at the face centroid."""

    origin: np.ndarray
    v_x: np.ndarray
    v_y: np.ndarray
    n: np.ndarray

    @property
    def tangents(self) -> np.ndarray:
        return np.vstack([self.v_x, self.v_y])

    def to_local(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.origin) @ self.tangents.T

    def to_global(self, local) -> np.ndarray:
        return self.origin + np.asarray(local, dtype=float) @ self.tangents

    def rotated(self, angle: float) -> "FaceFrame":
        """Same face, in-plane axes rotated by ``angle``."""
        c, s = np.cos(angle), np.sin(angle)
        return FaceFrame(self.origin, c * self.v_x + s * self.v_y, -s * self.v_x + c * self.v_y, self.n)


@dataclass(frozen=True, eq=False)
class CellGeometry:
    centroid: np.ndarray
    diameter: float
    volume: float
    vertex_ids: np.ndarray
    face_ids: np.ndarray
    signs: np.ndarray
    edge_ids: np.ndarray


def _polygon_geometry(pts: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Area, unit normal (right-hand w.r.t. loop order) and area centroid."""
    # relative coordinates avoid cancellation on small faces far from the origin
    apex = pts.mean(axis=0)
    rel = pts - apex
    nxt = np.roll(rel, -1, axis=0)
    area_vec = 0.5 * np.cross(rel, nxt).sum(axis=0)
    area = float(np.linalg.norm(area_vec))
    if area == 0.0:
        return 0.0, np.zeros(3), apex
    normal = area_vec / area
    tri = 0.5 * np.cross(rel, nxt) @ normal
    cents = (rel + nxt) / 3.0
    centroid = apex + (tri[:, None] * cents).sum(axis=0) / tri.sum()
    return area, normal, centroid


def make_frame(pts: np.ndarray, normal: np.ndarray, centroid: np.ndarray) -> FaceFrame:
    e = pts[1] - pts[0]
    e = e - (e @ normal) * normal
    v_x = e / np.linalg.norm(e)
    v_y = np.cross(normal, v_x)
    return FaceFrame(centroid, v_x, v_y, normal)


@dataclass(eq=False)
class PolyMesh:
    """Conforming polyhedral mesh.

    ``cells[c]`` holds the face ids of cell ``c`` and ``signs[c]`` the
    orientation of each: +1 when the stored face normal points out of the cell.
    Construct through :meth:`from_raw` to get validation.
    """

    vertices: np.ndarray
    faces: list[np.ndarray]
    cells: list[np.ndarray]
    signs: list[np.ndarray]
    _geometry: dict = field(default_factory=dict, init=False, repr=False)

    # -- construction ------------------------------------------------------
    @classmethod
    def from_raw(cls, vertices, faces, cells, signs=None, validate: bool = True) -> "PolyMesh":
        vertices = np.array(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshParseError("vertices must be an (N, 3) array")
        vertices.setflags(write=False)
        faces = [np.asarray(f, dtype=int) for f in faces]
        if signs is None:
            signs = [np.sign(np.asarray(c, dtype=int)) for c in cells]
            cells = [np.abs(np.asarray(c, dtype=int)) - 1 for c in cells]
        cells = [np.asarray(c, dtype=int) for c in cells]
        signs = [np.asarray(s, dtype=int) for s in signs]
        nv, nf = len(vertices), len(faces)
        for i, f in enumerate(faces):
            if len(f) < 3 or f.min() < 0 or f.max() >= nv:
                raise MeshParseError(f"face {i}: bad vertex indices {f.tolist()}")
            if len(set(f.tolist())) != len(f):
                raise MeshParseError(f"face {i}: repeated vertex")
        for c, (fs, ss) in enumerate(zip(cells, signs)):
            if len(fs) < 4 or fs.min() < 0 or fs.max() >= nf:
                raise MeshParseError(f"cell {c}: bad face indices")
            if len(fs) != len(ss) or not np.all(np.abs(ss) == 1):
                raise MeshParseError(f"cell {c}: bad orientation signs")
        mesh = cls(vertices, faces, cells, signs)
        if validate:
            mesh.validate()
        return mesh

    @classmethod
    def from_polyhedra(cls, vertices, polyhedra, validate: bool = True) -> "PolyMesh":
        """Build from cells given as lists of vertex loops in any orientation.

        Loops with the same vertex set are merged into one face. Each cell's
        loops are oriented consistently across shared edges and then flipped
        if the enclosed signed volume is negative.
        """
        vertices = np.asarray(vertices, dtype=float)
        faces: list[list[int]] = []
        index: dict[tuple, int] = {}
        cells, signs = [], []
        for c, loops in enumerate(polyhedra):
            oriented = _orient_loops(vertices, [list(map(int, lp)) for lp in loops], c)
            fs, ss = [], []
            for loop in oriented:
                key = tuple(sorted(loop))
                if key not in index:
                    index[key] = len(faces)
                    faces.append(loop)
                fid = index[key]
                fs.append(fid)
                ss.append(1 if _same_cycle(faces[fid], loop) else -1)
            cells.append(fs)
            signs.append(ss)
        return cls.from_raw(vertices, faces, cells, signs, validate=validate)

    # -- topology ----------------------------------------------------------
    @cached_property
    def _edge_data(self):
        segs = []
        for f in self.faces:
            segs.append(np.column_stack([f, np.roll(f, -1)]))
        segs = np.sort(np.vstack(segs), axis=1)
        edges, inverse = np.unique(segs, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        face_edges = []
        start = 0
        for f in self.faces:
            face_edges.append(inverse[start : start + len(f)])
            start += len(f)
        return edges, face_edges

    @property
    def edges(self) -> np.ndarray:
        return self._edge_data[0]

    @property
    def face_edges(self) -> list[np.ndarray]:
        """Edge ids of each face, edge ``k`` joining loop vertices ``k`` and ``k+1``."""
        return self._edge_data[1]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @cached_property
    def face_cells(self) -> list[list[int]]:
        out = [[] for _ in self.faces]
        for c, fs in enumerate(self.cells):
            for f in fs:
                out[f].append(c)
        return out

    @cached_property
    def boundary_faces(self) -> np.ndarray:
        return np.array([len(cs) == 1 for cs in self.face_cells])

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for f in np.flatnonzero(self.boundary_faces):
            mask[self.faces[f]] = True
        return mask

    @cached_property
    def boundary_cells(self) -> np.ndarray:
        bf = self.boundary_faces
        return np.array([bool(bf[fs].any()) for fs in self.cells])

    @cached_property
    def cell_vertices(self) -> list[np.ndarray]:
        out = []
        for fs in self.cells:
            seen: dict[int, None] = {}
            for f in fs:
                for v in self.faces[f]:
                    seen.setdefault(int(v), None)
            out.append(np.fromiter(seen, dtype=int))
        return out

    @cached_property
    def vertex_cells(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_vertices)]
        for c, vs in enumerate(self.cell_vertices):
            for v in vs:
                out[v].append(c)
        return out

    @cached_property
    def vertex_faces(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_vertices)]
        for i, f in enumerate(self.faces):
            for v in f:
                out[v].append(i)
        return out

    @cached_property
    def vertex_edges(self) -> list[list[int]]:
        out = [[] for _ in range(self.n_vertices)]
        for i, (a, b) in enumerate(self.edges):
            out[a].append(i)
            out[b].append(i)
        return out

    # -- face geometry -----------------------------------------------------
    @cached_property
    def _face_geometry(self):
        areas = np.empty(len(self.faces))
        normals = np.empty((len(self.faces), 3))
        centroids = np.empty((len(self.faces), 3))
        for i, f in enumerate(self.faces):
            areas[i], normals[i], centroids[i] = _polygon_geometry(self.vertices[f])
        return areas, normals, centroids

    @property
    def face_areas(self) -> np.ndarray:
        return self._face_geometry[0]

    @property
    def face_normals(self) -> np.ndarray:
        return self._face_geometry[1]

    @property
    def face_centroids(self) -> np.ndarray:
        return self._face_geometry[2]

    @cached_property
    def face_diameters(self) -> np.ndarray:
        return np.array([pdist(self.vertices[f]).max() for f in self.faces])

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        e = self.edges
        return np.linalg.norm(self.vertices[e[:, 1]] - self.vertices[e[:, 0]], axis=1)

    @cached_property
    def frames(self) -> list[FaceFrame]:
        return [
            make_frame(self.vertices[f], self.face_normals[i], self.face_centroids[i])
            for i, f in enumerate(self.faces)
        ]

    # -- cell geometry -----------------------------------------------------
    @cached_property
    def cell_diameters(self) -> np.ndarray:
        return np.array([pdist(self.vertices[vs]).max() for vs in self.cell_vertices])

    def cell_geometry(self, cell: int) -> CellGeometry:
        geo = self._geometry.get(cell)
        if geo is not None:
            return geo
        fs, ss = self.cells[cell], self.signs[cell]
        areas = self.face_areas[fs]
        if np.any(areas <= 0.0):
            bad = fs[np.argmin(areas)]
            raise TopologyError(f"cell {cell}: degenerate face {bad} (zero area)", "face", int(bad))
        fc = self.face_centroids[fs]
        nout = ss[:, None] * self.face_normals[fs]
        volume = float(np.sum(areas * np.einsum("ij,ij->i", fc, nout)) / 3.0)
        tets = self._fan_tets(cell, self.vertices[self.cell_vertices[cell]].mean(axis=0))
        vols = _tet_volumes(tets)
        centroid = (vols[:, None] * tets.mean(axis=1)).sum(axis=0) / vols.sum()
        edge_ids = np.unique(np.concatenate([self.face_edges[f] for f in fs]))
        geo = CellGeometry(
            centroid=centroid,
            diameter=float(self.cell_diameters[cell]),
            volume=volume,
            vertex_ids=self.cell_vertices[cell],
            face_ids=fs,
            signs=ss,
            edge_ids=edge_ids,
        )
        self._geometry[cell] = geo
        return geo

    def _fan_tets(self, cell: int, apex: np.ndarray) -> np.ndarray:
        tets = []
        for f, s in zip(self.cells[cell], self.signs[cell]):
            loop = self.faces[f] if s > 0 else self.faces[f][::-1]
            pts = self.vertices[loop]
            nxt = np.roll(pts, -1, axis=0)
            fc = np.broadcast_to(self.face_centroids[f], pts.shape)
            ap = np.broadcast_to(apex, pts.shape)
            tets.append(np.stack([ap, fc, pts, nxt], axis=1))
        return np.concatenate(tets)

    # -- validation --------------------------------------------------------
    def validate(self) -> None:
        for i, f in enumerate(self.faces):
            if self.face_areas[i] <= 0.0:
                raise TopologyError(f"face {i}: zero area", "face", i)
            pts = self.vertices[f]
            dev = np.abs((pts - self.face_centroids[i]) @ self.face_normals[i]).max()
            if dev > PLANARITY_TOL * self.face_diameters[i]:
                raise TopologyError(f"face {i}: not planar (deviation {dev:.3e})", "face", i)
        for i, cs in enumerate(self.face_cells):
            if len(cs) == 0:
                raise TopologyError(f"face {i}: dangling (no cell)", "face", i)
            if len(cs) > 2:
                raise TopologyError(f"face {i}: shared by {len(cs)} cells", "face", i)
            if len(cs) == 2:
                s = [int(self.signs[c][list(self.cells[c]).index(i)]) for c in cs]
                if s[0] != -s[1]:
                    raise TopologyError(
                        f"face {i}: cells {cs} give it the same orientation", "face", i
                    )
        for c, (fs, ss) in enumerate(zip(self.cells, self.signs)):
            if len(set(fs.tolist())) != len(fs):
                raise TopologyError(f"cell {c}: repeated face", "cell", c)
            flux = (ss * self.face_areas[fs]) @ self.face_normals[fs]
            h = self.cell_diameters[c]
            if np.abs(flux).max() > WATERTIGHT_TOL * h * h:
                raise TopologyError(
                    f"cell {c}: not watertight (sum of area*normal = {flux})", "cell", c
                )
            # each cell edge must be shared by exactly two of its faces
            counts = np.bincount(np.concatenate([self.face_edges[f] for f in fs]))
            if np.any((counts != 0) & (counts != 2)):
                raise TopologyError(f"cell {c}: open surface", "cell", c)

    # -- transforms ----------------------------------------------------------
    def transformed(self, matrix=None, shift=None) -> "PolyMesh":
        """Image under ``x -> matrix @ x + shift`` (orientation preserving maps only)."""
        verts = self.vertices.copy()
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=float)
            if np.linalg.det(matrix) <= 0:
                raise ValueError("transform must preserve orientation")
            verts = verts @ matrix.T
        if shift is not None:
            verts = verts + np.asarray(shift, dtype=float)
        return PolyMesh.from_raw(verts, self.faces, self.cells, self.signs)

    def submesh(self, cell: int) -> "PolyMesh":
        """Single-cell mesh extracted from ``cell``."""
        vs = self.cell_vertices[cell]
        remap = {int(v): i for i, v in enumerate(vs)}
        faces = [[remap[int(v)] for v in self.faces[f]] for f in self.cells[cell]]
        return PolyMesh.from_raw(
            self.vertices[vs], faces, [np.arange(len(faces))], [self.signs[cell]]
        )


def _same_cycle(a: Sequence[int], b: Sequence[int]) -> bool:
    """True when ``b`` is a rotation of ``a`` (same orientation)."""
    k = list(b).index(a[0])
    return list(b[k:]) + list(b[:k]) == list(a)


def _orient_loops(vertices: np.ndarray, loops: list[list[int]], cell: int) -> list[list[int]]:
    # directed edge (i, j) must appear in exactly one loop and (j, i) in a neighbor
    owner: dict[tuple[int, int], int] = {}
    for k, loop in enumerate(loops):
        for a, b in zip(loop, loop[1:] + loop[:1]):
            owner.setdefault((min(a, b), max(a, b)), []).append(k)
    flip = [None] * len(loops)
    flip[0] = False
    stack = [0]
    while stack:
        k = stack.pop()
        loop = loops[k][::-1] if flip[k] else loops[k]
        for a, b in zip(loop, loop[1:] + loop[:1]):
            for j in owner[(min(a, b), max(a, b))]:
                if j == k:
                    continue
                other = loops[j]
                pos = other.index(a)
                forward = other[(pos + 1) % len(other)] == b
                want = forward  # a neighbor must traverse the edge as (b, a)
                if flip[j] is None:
                    flip[j] = want
                    stack.append(j)
                elif flip[j] != want:
                    raise TopologyError(f"cell {cell}: non-orientable face loops", "cell", cell)
    if any(f is None for f in flip):
        raise TopologyError(f"cell {cell}: face loops are not connected", "cell", cell)
    oriented = [lp[::-1] if f else lp for lp, f in zip(loops, flip)]
    vol = 0.0
    for loop in oriented:
        p = vertices[loop]
        for i in range(1, len(p) - 1):
            vol += np.linalg.det(np.stack([p[0], p[i], p[i + 1]])) / 6.0
    return oriented if vol > 0 else [lp[::-1] for lp in oriented]


def _tet_volumes(tets: np.ndarray) -> np.ndarray:
    a = tets[:, 1] - tets[:, 0]
    b = tets[:, 2] - tets[:, 0]
    c = tets[:, 3] - tets[:, 0]
    return np.einsum("ij,ij->i", a, np.cross(b, c)) / 6.0


def cell_geometry(mesh: PolyMesh, cell: int) -> CellGeometry:
    return mesh.cell_geometry(cell)


def decompose(mesh: PolyMesh, cell: int) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Fan the cell into tetrahedra and each face into triangles.

    Tetrahedra join the cell centroid, a face centroid and one face edge;
    triangles join the face centroid and one edge in stored loop order.
    Raises :class:`TopologyError` if a tetrahedron is inverted, i.e. the cell
    is not star-shaped with respect to its centroid.
    """
    geo = mesh.cell_geometry(cell)
    tets = mesh._fan_tets(cell, geo.centroid)
    vols = _tet_volumes(tets)
    if np.any(vols <= 0.0):
        raise TopologyError(
            f"cell {cell}: not star-shaped w.r.t. its centroid (min sub-tet volume {vols.min():.3e})",
            "cell",
            cell,
        )
    tris = {}
    for f in geo.face_ids:
        tris[int(f)] = face_triangles(mesh, int(f))
    return tets, tris


def face_triangles(mesh: PolyMesh, face: int) -> np.ndarray:
    pts = mesh.vertices[mesh.faces[face]]
    c = np.broadcast_to(mesh.face_centroids[face], pts.shape)
    return np.stack([c, pts, np.roll(pts, -1, axis=0)], axis=1)


def h_nu(mesh: PolyMesh, vertex: int, strategy: tuple[str, str] = ("mean", "hP")) -> float:
    """Local mesh size at a vertex: a reduction over incident entity diameters."""
    reduce, kind = strategy
    diam = _incident_diameters(mesh, vertex, kind)
    if len(diam) == 0:
        raise TopologyError(f"vertex {vertex}: isolated", "vertex", vertex)
    return float(_REDUCE[reduce](diam))


_REDUCE = {"mean": np.mean, "max": np.max, "min": np.min}


def _incident_diameters(mesh: PolyMesh, vertex: int, kind: str) -> np.ndarray:
    if kind == "hP":
        return mesh.cell_diameters[mesh.vertex_cells[vertex]]
    if kind == "hf":
        return mesh.face_diameters[mesh.vertex_faces[vertex]]
    if kind == "he":
        return mesh.edge_lengths[mesh.vertex_edges[vertex]]
    raise ValueError(f"unknown entity kind {kind!r}")


def h_nu_all(mesh: PolyMesh, strategy: tuple[str, str] = ("mean", "hP")) -> np.ndarray:
    reduce, kind = strategy
    if reduce not in _REDUCE:
        raise ValueError(f"unknown reduction {reduce!r}")
    return np.array([h_nu(mesh, v, strategy) for v in range(mesh.n_vertices)])


def parse_strategy(text: str) -> tuple[str, str]:
    """Parse ``"mean:hP"`` style strings."""
    try:
        reduce, kind = text.split(":")
    except ValueError:
        raise ValueError(f"bad h_nu strategy {text!r}, expected <mean|max|min>:<hP|hf|he>") from None
    if reduce not in REDUCTIONS or kind not in ENTITY_KINDS:
        raise ValueError(f"bad h_nu strategy {text!r}")
    return reduce, kind


def mesh_size(mesh: PolyMesh) -> float:
    """Mean cell diameter."""
    if mesh.n_cells == 0:
        raise MeshError("empty mesh")
    return float(np.mean(mesh.cell_diameters))


def total_volume(mesh: PolyMesh) -> float:
    return float(sum(mesh.cell_geometry(c).volume for c in range(mesh.n_cells)))


# -- generation ------------------------------------------------------------


def generate_structured_cube(n: int, lower=(0.0, 0.0, 0.0), upper=(1.0, 1.0, 1.0)) -> PolyMesh:
    """``n**3`` hexahedra on an axis-aligned box."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    axes = [np.linspace(lower[d], upper[d], n + 1) for d in range(3)]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    verts = np.column_stack([X.ravel(order="F"), Y.ravel(order="F"), Z.ravel(order="F")])
    m = n + 1

    def vid(i, j, k):
        return i + m * (j + m * k)

    faces = []
    fx, fy, fz = {}, {}, {}
    for k in range(n):
        for j in range(n):
            for i in range(n + 1):
                fx[i, j, k] = len(faces)
                faces.append([vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)])
    for k in range(n):
        for j in range(n + 1):
            for i in range(n):
                fy[i, j, k] = len(faces)
                faces.append([vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)])
    for k in range(n + 1):
        for j in range(n):
            for i in range(n):
                fz[i, j, k] = len(faces)
                faces.append([vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)])
    cells, signs = [], []
    for k in range(n):
        for j in range(n):
            for i in range(n):
                cells.append(
                    [fx[i, j, k], fx[i + 1, j, k], fy[i, j, k], fy[i, j + 1, k], fz[i, j, k], fz[i, j, k + 1]]
                )
                signs.append([-1, 1, -1, 1, -1, 1])
    return PolyMesh.from_raw(verts, faces, cells, signs)


# -- I/O -------------------------------------------------------------------


def load_mesh(path, format: str | None = None) -> PolyMesh:
    """Read a mesh from native JSON or legacy VTK (POLYHEDRON cells)."""
    path = Path(path)
    if format is None:
        format = "vtk-legacy-polyhedral" if path.suffix.lower() == ".vtk" else "native-json"
    if format == "native-json":
        try:
            doc = json.loads(path.read_text())
            verts, faces, cells = doc["vertices"], doc["faces"], doc["cells"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise MeshParseError(f"{path}: {exc}") from exc
        return PolyMesh.from_raw(verts, faces, cells)
    if format == "vtk-legacy-polyhedral":
        from .vtkio import read_vtk

        return read_vtk(path).mesh
    raise ValueError(f"unknown mesh format {format!r}")


def mesh_to_json(mesh: PolyMesh) -> dict:
    return {
        "vertices": mesh.vertices.tolist(),
        "faces": [f.tolist() for f in mesh.faces],
        "cells": [(s * (fs + 1)).tolist() for fs, s in zip(mesh.cells, mesh.signs)],
    }


def save_mesh(mesh: PolyMesh, path) -> None:
    Path(path).write_text(json.dumps(mesh_to_json(mesh)))


# -- diagnostics -----------------------------------------------------------


@dataclass
class MeshDiagnostics:
    n_cells: int
    n_faces: int
    n_edges: int
    n_vertices: int
    h: float
    min_tet_quality: float
    min_edge_ratio: float
    min_face_ratio: float
    warnings: list[str]

    def report(self) -> str:
        lines = [
            f"cells={self.n_cells} faces={self.n_faces} edges={self.n_edges} vertices={self.n_vertices}",
            f"h (mean cell diameter) = {self.h:.6g}",
            f"min sub-tet quality    = {self.min_tet_quality:.4g}",
            f"min edge / h_P         = {self.min_edge_ratio:.4g}",
            f"min face diam / h_P    = {self.min_face_ratio:.4g}",
        ]
        lines += [f"WARNING: {w}" for w in self.warnings]
        return "\n".join(lines)


def diagnostics(
    mesh: PolyMesh, tet_warn: float = 0.05, edge_warn: float = 0.05, face_warn: float = 0.1
) -> MeshDiagnostics:
    """Shape-regularity proxies; thresholds only produce warnings."""
    qual, eratio, fratio = np.inf, np.inf, np.inf
    for c in range(mesh.n_cells):
        geo = mesh.cell_geometry(c)
        tets, _ = decompose(mesh, c)
        vols = _tet_volumes(tets)
        longest = np.max(
            [np.linalg.norm(tets[:, i] - tets[:, j], axis=1) for i in range(4) for j in range(i + 1, 4)],
            axis=0,
        )
        # 1 for the regular tetrahedron
        qual = min(qual, float(np.min(6.0 * np.sqrt(2.0) * vols / longest**3)))
        eratio = min(eratio, float(mesh.edge_lengths[geo.edge_ids].min() / geo.diameter))
        fratio = min(fratio, float(mesh.face_diameters[geo.face_ids].min() / geo.diameter))
    warnings = []
    if qual < tet_warn:
        warnings.append(f"flat sub-tetrahedra (quality {qual:.3g} < {tet_warn})")
    if eratio < edge_warn:
        warnings.append(f"short edges (edge/h_P {eratio:.3g} < {edge_warn})")
    if fratio < face_warn:
        warnings.append(f"small faces (face/h_P {fratio:.3g} < {face_warn})")
    return MeshDiagnostics(
        mesh.n_cells, len(mesh.faces), len(mesh.edges), mesh.n_vertices,
        mesh_size(mesh), qual, eratio, fratio, warnings,
    )


def combine(meshes: Sequence[PolyMesh]) -> PolyMesh:
    """Disjoint union, handy for building test fixtures."""
    verts, faces, cells, signs = [], [], [], []
    voff = foff = 0
    for m in meshes:
        verts.append(m.vertices)
        faces += [f + voff for f in m.faces]
        cells += [c + foff for c in m.cells]
        signs += list(m.signs)
        voff += m.n_vertices
        foff += len(m.faces)
    return PolyMesh.from_raw(np.vstack(verts), faces, cells, signs)


FIXTURE_DIR = Path(__file__).parent / "data" / "meshes"


def fixture_path(name: str) -> Path:
    """Path of a mesh shipped with the package, e.g. ``voronoi_cube_100.json``."""
    path = FIXTURE_DIR / name
    if not path.exists():
        raise FileNotFoundError(f"no shipped mesh {name!r} in {FIXTURE_DIR}")
    return path
