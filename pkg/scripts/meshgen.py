"""Tetrahedral and Voronoi mesh generators for convex domains, used to build fixtures.

A domain is an array of halfspaces ``(a, b)`` with ``a . x + b <= 0``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay, HalfspaceIntersection, cKDTree

from c1vem.mesh import PolyMesh

UNIT_CUBE = np.array(
    [
        [-1, 0, 0, 0], [1, 0, 0, -1],
        [0, -1, 0, 0], [0, 1, 0, -1],
        [0, 0, -1, 0], [0, 0, 1, -1],
    ],
    dtype=float,
)


def truncated_octahedron(center=(0.5, 0.5, 0.5), size: float = 1.0) -> np.ndarray:
    """Truncated octahedron whose square faces touch the cube of edge ``size`` around ``center``.

    Square faces lie on ``|x_i - c_i| = size / 2`` and hexagonal faces on
    ``sum |x_i - c_i| = 3 size / 4``.
    """
    c = np.asarray(center, dtype=float)
    rows = []
    for i in range(3):
        for sgn in (-1.0, 1.0):
            a = np.zeros(3)
            a[i] = sgn
            rows.append([*a, -(a @ c) - size / 2])
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            for sz in (-1.0, 1.0):
                a = np.array([sx, sy, sz])
                rows.append([*a, -(a @ c) - 0.75 * size])
    return np.array(rows)


def inside(domain: np.ndarray, points: np.ndarray, margin: float = 0.0) -> np.ndarray:
    pts = np.atleast_2d(points)
    norms = np.linalg.norm(domain[:, :3], axis=1)
    return np.all(pts @ domain[:, :3].T + domain[:, 3] <= -margin * norms, axis=1)


def generate_kuhn_tets(n: int, jitter: float = 0.0, seed: int = 0) -> PolyMesh:
    """Structured n^3 cube split into 6 tetrahedra per cube along the main diagonal.

    Interior vertices are moved by up to ``jitter`` times the grid spacing
    in each direction.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if not 0 <= jitter < 0.25:
        raise ValueError("jitter must lie in [0, 0.25) to keep tetrahedra valid")
    m = n + 1
    g = np.linspace(0.0, 1.0, m)
    X, Y, Z = np.meshgrid(g, g, g, indexing="ij")
    verts = np.column_stack([X.ravel("F"), Y.ravel("F"), Z.ravel("F")])
    if jitter:
        interior = np.all((verts > 0) & (verts < 1), axis=1)
        rng = np.random.default_rng(seed)
        verts[interior] += rng.uniform(-jitter, jitter, (interior.sum(), 3)) / n

    def vid(i, j, k):
        return i + m * (j + m * k)

    paths = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    cells = []
    for k in range(n):
        for j in range(n):
            for i in range(n):
                for path in paths:
                    p = [i, j, k]
                    tet = [vid(*p)]
                    for axis in path:
                        p[axis] += 1
                        tet.append(vid(*p))
                    cells.append([[tet[a], tet[b], tet[c]] for a, b, c in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))])
    return PolyMesh.from_polyhedra(verts, cells)


def _neighbors(seeds: np.ndarray) -> list[np.ndarray]:
    # Voronoi neighbors are Delaunay neighbors; clipping can only remove faces
    if len(seeds) < 5:
        return [np.delete(np.arange(len(seeds)), i) for i in range(len(seeds))]
    ptr, idx = Delaunay(seeds).vertex_neighbor_vertices
    return [idx[ptr[i] : ptr[i + 1]] for i in range(len(seeds))]


def _cell_polytope(
    seed_idx: int, seeds: np.ndarray, domain: np.ndarray, neighbors: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Vertices and halfspaces of one clipped Voronoi cell."""
    s = seeds[seed_idx]
    others = np.delete(seeds, seed_idx, axis=0) if neighbors is None else seeds[neighbors]
    normals = others - s
    offsets = -0.5 * np.einsum("ij,ij->i", normals, others + s)
    halfspaces = np.vstack([domain, np.column_stack([normals, offsets])])
    hs = HalfspaceIntersection(halfspaces, s)
    return hs.intersections, halfspaces


def _cell_centroid(points: np.ndarray) -> np.ndarray:
    hull = ConvexHull(points)
    c0 = points[hull.vertices].mean(axis=0)
    tris = points[hull.simplices]
    vols = np.abs(np.einsum("ij,ij->i", tris[:, 0] - c0, np.cross(tris[:, 1] - c0, tris[:, 2] - c0))) / 6.0
    cents = (tris.sum(axis=1) + c0) / 4.0
    return vols @ cents / vols.sum()


def lloyd(seeds: np.ndarray, steps: int, domain: np.ndarray = UNIT_CUBE) -> np.ndarray:
    """Move each seed to the centroid of its clipped Voronoi cell."""
    seeds = np.array(seeds, dtype=float)
    for _ in range(steps):
        nb = _neighbors(seeds)
        seeds = np.array([_cell_centroid(_cell_polytope(i, seeds, domain, nb[i])[0]) for i in range(len(seeds))])
    return seeds


def random_seeds(n: int, domain: np.ndarray, rng: np.random.Generator, margin: float = 0.02) -> np.ndarray:
    """Uniform points inside the domain, kept ``margin`` away from its boundary."""
    hull = HalfspaceIntersection(domain, _interior_point(domain)).intersections
    lo, hi = hull.min(axis=0), hull.max(axis=0)
    out = np.empty((0, 3))
    while len(out) < n:
        cand = rng.uniform(lo, hi, size=(2 * n, 3))
        out = np.vstack([out, cand[inside(domain, cand, margin)]])
    return out[:n]


def _interior_point(domain: np.ndarray) -> np.ndarray:
    # Chebyshev center: maximize the radius of a ball inside all halfspaces
    norms = np.linalg.norm(domain[:, :3], axis=1)
    res = linprog(
        [0, 0, 0, -1], A_ub=np.column_stack([domain[:, :3], norms]), b_ub=-domain[:, 3],
        bounds=[(None, None)] * 3 + [(0, None)],
    )
    if not res.success or res.x[3] <= 0:
        raise ValueError("domain has empty interior")
    return res.x[:3]


def generate_voronoi(
    n_cells: int,
    domain: np.ndarray = UNIT_CUBE,
    seed: int = 0,
    lloyd_steps: int = 10,
    merge_tol: float = 1e-9,
) -> PolyMesh:
    """Voronoi tessellation of random seeds clipped to a convex domain.

    With ``lloyd_steps > 0`` the seeds move towards a centroidal
    tessellation, which avoids tiny faces and edges; ``0`` keeps the raw
    random tessellation. Vertices closer than ``merge_tol`` are merged.
    """
    domain = np.asarray(domain, dtype=float)
    rng = np.random.default_rng(seed)
    seeds = lloyd(random_seeds(n_cells, domain, rng), lloyd_steps, domain)
    nb = _neighbors(seeds)
    raw, cell_faces = [], []
    for i in range(n_cells):
        pts, halfspaces = _cell_polytope(i, seeds, domain, nb[i])
        base = sum(len(p) for p in raw)
        raw.append(pts)
        loops = []
        for a in halfspaces:
            scale = np.linalg.norm(a[:3])
            on = np.flatnonzero(np.abs(pts @ a[:3] + a[3]) <= 1e-10 * scale)
            if len(on) >= 3:
                loops.append((a / scale, base + on))
        cell_faces.append(loops)
    allpts = np.vstack(raw)
    # merge coincident vertices across and within cells
    tree = cKDTree(allpts)
    rep = np.arange(len(allpts))
    for i, j in sorted(tree.query_pairs(merge_tol)):
        ri, rj = rep[i], rep[j]
        rep[rep == max(ri, rj)] = min(ri, rj)
    uniq, gid = np.unique(rep, return_inverse=True)
    verts = allpts[uniq].copy()
    polyhedra = []
    planes_of: list[list[np.ndarray]] = [[] for _ in range(len(verts))]
    for loops in cell_faces:
        cell = []
        for plane, ids in loops:
            ids = np.unique(gid[ids])
            if len(ids) < 3:
                continue
            cell.append(_sort_loop(verts[ids], ids, plane[:3]))
            for v in ids:
                planes_of[v].append(plane)
        polyhedra.append(cell)
    # snap each vertex onto all of its planes; one cell's three planes alone
    # leave nearly degenerate vertices visibly off the others
    for v, planes in enumerate(planes_of):
        P = np.array(planes)
        if len(P) >= 3 and np.linalg.matrix_rank(P[:, :3], tol=1e-8) == 3:
            verts[v] = np.linalg.lstsq(P[:, :3], -P[:, 3], rcond=None)[0]
    return PolyMesh.from_polyhedra(verts, polyhedra)


def _sort_loop(pts: np.ndarray, ids: np.ndarray, normal: np.ndarray) -> list[int]:
    c = pts.mean(axis=0)
    n = normal / np.linalg.norm(normal)
    u = pts[0] - c
    u -= (u @ n) * n
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    ang = np.arctan2((pts - c) @ v, (pts - c) @ u)
    return [int(i) for i in ids[np.argsort(ang)]]
