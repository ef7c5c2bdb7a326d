"""Global dofs, assembly, essential conditions and linear solvers."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .element import (
    DEFAULT_FORM_DEGREE,
    DEFAULT_LOAD_DEGREE,
    ElementOperators,
    boundary_face_load,
    build_element,
    dof_scaling,
    local_forms,
    local_load,
)
from .facespace import FaceSpace, build_face_spaces
from .mesh import PolyMesh, h_nu_all

logger = logging.getLogger(__name__)

DIRECT_DOF_LIMIT = 200_000

try:  # CHOLMOD is optional; the SuperLU fallback performs the same SPD check
    from sksparse.cholmod import CholmodNotPositiveDefiniteError, cholesky as _cholmod
except ImportError:  # pragma: no cover - depends on the environment
    _cholmod = None


class SolverError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


@dataclass
class GlobalDofMap:
    """Four consecutive dofs per vertex: value, then ``h_nu`` times the gradient."""

    hnu: np.ndarray
    strategy: tuple[str, str] = ("mean", "hP")

    @property
    def n_vertices(self) -> int:
        return len(self.hnu)

    @property
    def ndofs(self) -> int:
        return 4 * len(self.hnu)

    def local(self, vertex_ids) -> np.ndarray:
        v = np.asarray(vertex_ids)
        return (4 * v[:, None] + np.arange(4)).ravel()

    @property
    def scaling(self) -> np.ndarray:
        return dof_scaling(self.hnu)

    def interpolate(self, u: Callable, grad_u: Callable, points: np.ndarray) -> np.ndarray:
        """Scaled dof vector of an exact function."""
        out = np.empty((len(points), 4))
        out[:, 0] = u(points)
        out[:, 1:] = self.hnu[:, None] * grad_u(points)
        return out.ravel()

    def values(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(-1, 4)[:, 0]

    def gradients(self, x: np.ndarray) -> np.ndarray:
        """Unscaled vertex gradients."""
        return x.reshape(-1, 4)[:, 1:] / self.hnu[:, None]


def number_dofs(mesh: PolyMesh, strategy: tuple[str, str] = ("mean", "hP")) -> GlobalDofMap:
    return GlobalDofMap(h_nu_all(mesh, strategy), tuple(strategy))


@dataclass(eq=False)
class Discretization:
    """Mesh plus all face and element tables; independent of coefficients and h_nu."""

    mesh: PolyMesh
    faces: list[FaceSpace]
    elements: list[ElementOperators]
    build_seconds: float = 0.0

    @classmethod
    def build(cls, mesh: PolyMesh, degree: int = DEFAULT_FORM_DEGREE) -> "Discretization":
        t0 = time.perf_counter()
        faces = build_face_spaces(mesh)
        elements = [build_element(mesh, c, faces, degree) for c in range(mesh.n_cells)]
        return cls(mesh, faces, elements, time.perf_counter() - t0)


@dataclass
class SolveReport:
    method: str
    iterations: int = 0
    residual: float = 0.0
    seconds: float = 0.0
    factor_nnz: int = 0

    def summary(self) -> str:
        extra = f" iterations={self.iterations}" if self.method == "cg" else f" factor_nnz={self.factor_nnz}"
        return f"{self.method}: relative residual={self.residual:.3e}{extra} time={self.seconds:.2f}s"


@dataclass(eq=False)
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    report: SolveReport | None = None

    @property
    def ndofs(self) -> int:
        return self.matrix.shape[0]

    def asymmetry(self) -> float:
        A = self.matrix
        d = abs(A - A.T)
        return float(d.max() / abs(A).max()) if d.nnz else 0.0


def check_coefficients(c1: float, c2: float, c3: float) -> None:
    if min(c1, c2, c3) < 0:
        raise ConfigError("coefficients must be non-negative")
    if c1 == 0 and c2 == 0:
        raise ConfigError("inadmissible coefficients: need c1 > 0, or c1 = 0 and c2 > 0")


def assemble(
    disc: Discretization,
    dofmap: GlobalDofMap,
    coeffs: tuple[float, float, float],
    f: Callable | None = None,
    form: str = "hessian",
    load_degree: int = DEFAULT_LOAD_DEGREE,
) -> LinearSystem:
    """Scatter-add ``c1 K_delta + c2 K_nabla + c3 M0`` and the load."""
    c1, c2, c3 = coeffs
    check_coefficients(c1, c2, c3)
    rows, cols, data = [], [], []
    rhs = np.zeros(dofmap.ndofs)
    for ops in disc.elements:
        idx = dofmap.local(ops.vertex_ids)
        hloc = dofmap.hnu[ops.vertex_ids]
        K = local_forms(ops, hloc, form).combined(c1, c2, c3)
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        data.append(K.ravel())
        if f is not None:
            np.add.at(rhs, idx, local_load(ops, f, hloc, load_degree))
    n = dofmap.ndofs
    A = sp.coo_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return LinearSystem(A.tocsr(), rhs)


def add_natural_load(
    system: LinearSystem,
    disc: Discretization,
    dofmap: GlobalDofMap,
    faces: np.ndarray,
    moment: Callable,
    shear: Callable,
    degree: int = DEFAULT_LOAD_DEGREE,
) -> LinearSystem:
    """Add ``int moment . grad v + shear * v`` over the given boundary faces.

    ``moment`` and ``shear`` receive points and the outward unit normal.
    """
    mesh = disc.mesh
    rhs = system.rhs.copy()
    for f in faces:
        (c,) = mesh.face_cells[f]
        ops = disc.elements[c]
        sigma = int(mesh.signs[c][list(mesh.cells[c]).index(f)])
        n_out = sigma * disc.faces[f].frame.n
        vec = boundary_face_load(
            mesh, ops, disc.faces[f], sigma,
            lambda x: moment(x, n_out), lambda x: shear(x, n_out), degree,
        )
        idx = dofmap.local(ops.vertex_ids)
        np.add.at(rhs, idx, vec / dofmap.scaling[idx])
    return LinearSystem(system.matrix, rhs, system.constrained, system.values)


def dirichlet_faces(mesh: PolyMesh, region: Callable | None = None) -> np.ndarray:
    """Boundary faces whose centroid satisfies ``region`` (all if None)."""
    bf = np.flatnonzero(mesh.boundary_faces)
    if region is None:
        return bf
    keep = np.array([bool(region(mesh.face_centroids[f])) for f in bf], dtype=bool)
    return bf[keep]


def dirichlet_vertices(mesh: PolyMesh, region: Callable | None = None) -> np.ndarray:
    faces = dirichlet_faces(mesh, region)
    if len(faces) == 0:
        return np.zeros(0, dtype=int)
    return np.unique(np.concatenate([mesh.faces[f] for f in faces]))


def apply_dirichlet(
    system: LinearSystem,
    dofmap: GlobalDofMap,
    mesh: PolyMesh,
    u: Callable,
    grad_u: Callable,
    region: Callable | None = None,
) -> LinearSystem:
    """Fix all four dofs of every vertex on the closure of the Dirichlet faces.

    ``region`` selects Dirichlet faces by centroid; vertices shared with
    natural faces are constrained. Elimination is symmetric: the known
    values are lifted into the right-hand side, and the constrained rows and
    columns are replaced by the identity.
    """
    verts = dirichlet_vertices(mesh, region)
    pts = mesh.vertices[verts]
    vals = np.asarray(u(pts), dtype=float)
    grads = np.asarray(grad_u(pts), dtype=float)
    if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(grads))):
        raise ConfigError("boundary data not finite at some Dirichlet vertex")
    g = np.column_stack([vals, dofmap.hnu[verts, None] * grads]).ravel()
    idx = dofmap.local(verts)
    n = system.ndofs
    xg = np.zeros(n)
    xg[idx] = g
    rhs = system.rhs - system.matrix @ xg
    rhs[idx] = g
    keep = np.ones(n)
    keep[idx] = 0.0
    D = sp.diags(keep)
    A = (D @ system.matrix @ D + sp.diags(1.0 - keep)).tocsr()
    A.eliminate_zeros()
    return LinearSystem(A, rhs, idx, g)


def surface_gradient(
    mesh: PolyMesh,
    vertices: np.ndarray,
    grad_g1: Callable,
    g2: Callable,
    region: Callable | None = None,
    tol: float = 1e-12,
) -> np.ndarray:
    """Vertex gradients rebuilt from boundary data ``u = g1`` and ``du/dn = g2``.

    ``grad_g1`` is the gradient of any extension of ``g1``; only its
    tangential part is used. A vertex is accepted only if all of its
    Dirichlet faces share one outward normal, since at boundary edges and
    corners the surface gradient is multivalued.
    """
    bfaces = set(dirichlet_faces(mesh, region).tolist())
    out = np.empty((len(vertices), 3))
    for k, v in enumerate(vertices):
        normals = []
        for f in mesh.vertex_faces[v]:
            if f in bfaces:
                (c,) = mesh.face_cells[f]
                sigma = mesh.signs[c][list(mesh.cells[c]).index(f)]
                normals.append(sigma * mesh.face_normals[f])
        if not normals:
            raise ConfigError(f"vertex {v} is not on a Dirichlet face")
        n = normals[0]
        if any(np.linalg.norm(m - n) > tol for m in normals[1:]):
            raise ConfigError(f"vertex {v} lies on a boundary edge or corner; surface gradient is multivalued")
        x = mesh.vertices[v][None, :]
        g = np.asarray(grad_g1(x), dtype=float).reshape(3)
        out[k] = g - (g @ n) * n + float(np.asarray(g2(x)).reshape(())) * n
    return out


def solve(system: LinearSystem, method: str = "auto", tol: float = 1e-10, maxiter: int | None = None):
    """Solve a constrained SPD system; returns the dof vector and a report."""
    A, b = system.matrix, system.rhs
    n = A.shape[0]
    if method == "auto":
        method = "cholesky" if n <= DIRECT_DOF_LIMIT else "cg"
    t0 = time.perf_counter()
    bnorm = np.linalg.norm(b) or 1.0
    if method == "cholesky":
        x, nnz = _cholesky_solve(A, b)
        report = SolveReport("cholesky", factor_nnz=nnz)
    elif method == "cg":
        x, its = _cg_jacobi(A, b, tol, maxiter or 20 * n)
        report = SolveReport("cg", iterations=its)
    else:
        raise ConfigError(f"unknown solver {method!r}")
    report.residual = float(np.linalg.norm(b - A @ x) / bnorm)
    report.seconds = time.perf_counter() - t0
    if method == "cg" and report.residual > tol * 1.01:
        raise SolverError(f"CG stalled at relative residual {report.residual:.3e}")
    system.report = report
    return x, report


def _cholesky_solve(A: sp.csr_matrix, b: np.ndarray) -> tuple[np.ndarray, int]:
    if _cholmod is not None:
        # CHOLMOD may defer the breakdown until the factor is first used
        try:
            factor = _cholmod(A.tocsc())
            nnz = int(factor.L().nnz)
        except CholmodNotPositiveDefiniteError as exc:
            raise SolverError(f"Cholesky breakdown, matrix not SPD: {exc}") from exc
        return factor(b), nnz
    # symmetric-mode SuperLU without pivoting is an LDL^T; positive pivots <=> SPD
    lu = spla.splu(
        A.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True}
    )
    if not np.array_equal(lu.perm_r, lu.perm_c) or np.any(lu.U.diagonal() <= 0):
        raise SolverError("Cholesky breakdown, matrix not SPD")
    return lu.solve(b), int(lu.L.nnz + lu.U.nnz)


def _cg_jacobi(A, b, tol: float, maxiter: int) -> tuple[np.ndarray, int]:
    d = A.diagonal()
    if np.any(d <= 0):
        raise SolverError("non-positive diagonal, matrix not SPD")
    M = spla.LinearOperator(A.shape, matvec=lambda r: r / d)
    count = [0]

    def callback(_):
        count[0] += 1

    # starting from the Jacobi guess makes diagonal systems converge in zero steps
    x, info = spla.cg(A, b, x0=b / d, rtol=tol, atol=0.0, maxiter=maxiter, M=M, callback=callback)
    if info > 0:
        raise SolverError(f"CG did not converge in {maxiter} iterations")
    if info < 0:
        raise SolverError("CG breakdown")
    return x, count[0]


def lagrange_solve(system: LinearSystem, constrained: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Reference solve of the saddle-point form with multipliers on the constraints."""
    A = system.matrix
    n, m = A.shape[0], len(constrained)
    C = sp.csr_matrix((np.ones(m), (np.arange(m), constrained)), shape=(m, n))
    K = sp.bmat([[A, C.T], [C, None]]).tocsc()
    sol = spla.spsolve(K, np.concatenate([system.rhs, values]))
    return sol[:n]


def energy_norm(A: sp.spmatrix, x: np.ndarray) -> float:
    return float(np.sqrt(max(x @ (A @ x), 0.0)))
