"""Element projectors, stabilization and local forms.

Local dofs follow the cell's vertex list, four per vertex: value and the
three gradient components. :class:`ElementOperators` stores tables for
*unscaled* gradients; :func:`local_forms` switches to the scaled dofs
``h_nu * grad v`` in which the stabilization is the Euclidean product.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .facespace import FaceSpace
from .mesh import PolyMesh, decompose, face_triangles
from .polybasis import ScaledMonomialBasis, simplex_points, tetrahedron_rule, triangle_rule

FORMS = ("hessian", "laplacian")
DEFAULT_FORM_DEGREE = 4
DEFAULT_LOAD_DEGREE = 8


@dataclass(eq=False)
class ElementOperators:
    cell: int
    vertex_ids: np.ndarray
    diameter: float
    volume: float
    basis: ScaledMonomialBasis
    pi_delta: np.ndarray  # (10, 4n)
    pi_nabla: np.ndarray  # (10, 4n)
    dof_eval: np.ndarray  # (4n, 10): value and gradient of each monomial at the vertices
    mass: np.ndarray  # integrals of m_i m_j
    grad_gram: np.ndarray  # integrals of grad m_i . grad m_j
    hess_gram: np.ndarray  # integrals of hess m_i : hess m_j
    lap_gram: np.ndarray  # integrals of lap m_i lap m_j
    tets: np.ndarray
    vertex_coords: np.ndarray

    @property
    def pi0(self) -> np.ndarray:
        # the L2 projection coincides with pi_delta on this space
        return self.pi_delta

    @property
    def ndofs(self) -> int:
        return 4 * len(self.vertex_ids)

    def dofs_of(self, fn: Callable, grad: Callable) -> np.ndarray:
        """Unscaled local dof vector of a function given with its gradient."""
        x = self.vertex_coords
        out = np.empty((len(x), 4))
        out[:, 0] = fn(x)
        out[:, 1:] = grad(x)
        return out.ravel()

    def dofs_of_coefficients(self, coeffs) -> np.ndarray:
        """Unscaled dofs of the polynomial ``sum_j coeffs[j] m_j``."""
        return self.dof_eval @ np.asarray(coeffs, dtype=float)


def _face_maps(fs: FaceSpace, local: dict[int, int], nloc: int) -> tuple[np.ndarray, np.ndarray]:
    """Cell dofs -> C1 face dofs (value, tangential gradient) and -> stored-normal derivatives."""
    nf = len(fs.vertex_ids)
    T = np.zeros((3 * nf, 4 * nloc))
    N = np.zeros((nf, 4 * nloc))
    for j, v in enumerate(fs.vertex_ids):
        li = local[int(v)]
        T[3 * j, 4 * li] = 1.0
        T[3 * j + 1, 4 * li + 1 : 4 * li + 4] = fs.frame.v_x
        T[3 * j + 2, 4 * li + 1 : 4 * li + 4] = fs.frame.v_y
        N[j, 4 * li + 1 : 4 * li + 4] = fs.frame.n
    return T, N


def build_element(
    mesh: PolyMesh, cell: int, face_spaces: list[FaceSpace], degree: int = DEFAULT_FORM_DEGREE
) -> ElementOperators:
    geo = mesh.cell_geometry(cell)
    tets, _ = decompose(mesh, cell)
    basis = ScaledMonomialBasis(geo.centroid, geo.diameter, 2)
    verts = geo.vertex_ids
    n = len(verts)
    local = {int(v): i for i, v in enumerate(verts)}

    pts, w = simplex_points(tets, tetrahedron_rule(degree))
    pts, w = pts.reshape(-1, 3), w.ravel()
    vals = basis.values(pts)
    grads = basis.gradients(pts)
    hess = basis.hessians(geo.centroid)  # (10, 3, 3), constant in space
    lap = np.trace(hess, axis1=1, axis2=2)
    vol = w.sum()
    mass = (vals.T * w) @ vals
    grad_gram = sum((grads[:, :, a].T * w) @ grads[:, :, a] for a in range(3))
    hess_gram = vol * np.einsum("iab,jab->ij", hess, hess)
    lap_gram = vol * np.outer(lap, lap)
    int_m = w @ vals

    lhs_d = np.zeros((10, 10))
    rhs_d = np.zeros((10, 4 * n))
    rhs_n = np.zeros((10, 4 * n))
    lhs_d[4:] = hess_gram[4:]
    tri_rule = triangle_rule(3)
    for f, sigma in zip(geo.face_ids, geo.signs):
        fs = face_spaces[f]
        T, N = _face_maps(fs, local, n)
        pr = fs.proj
        n_out = sigma * fs.frame.n
        # Hessian-energy rows, integrated by parts face by face
        hn = hess[4:] @ n_out  # (6, 3)
        wx, wy, wn = hn @ fs.frame.v_x, hn @ fs.frame.v_y, hn @ n_out
        tang = fs.area * (np.outer(wx, pr.pi0_grad[0]) + np.outer(wy, pr.pi0_grad[1])) @ T
        normal = np.outer(sigma * wn, pr.p1_integrals @ pr.pi_nabla) @ N
        rhs_d[4:] += tang + normal
        # boundary P1 moments through the face enhancement
        vc = basis.values(fs.center)
        gc = basis.gradients(fs.center)
        moments = pr.moments @ T
        rhs_d[:4] += fs.p1_in_face_basis(vc[:4], gc[:4]) @ moments
        fpts, fw = simplex_points(face_triangles(mesh, int(f)), tri_rule)
        fv = basis.values(fpts.reshape(-1, 3))
        lhs_d[:4] += (fv[:, :4].T * fw.ravel()) @ fv
        # grad p2 . n_out is affine on the face
        rhs_n[1:] += fs.p1_in_face_basis(gc[1:] @ n_out, hess[1:] @ n_out) @ moments

    pi_delta = np.linalg.solve(lhs_d, rhs_d)
    mean_pi0 = int_m @ pi_delta  # integral of v over the cell
    rhs_n[1:] -= np.outer(lap[1:], mean_pi0)
    rhs_n[0] = mean_pi0
    lhs_n = np.vstack([int_m, grad_gram[1:]])
    pi_nabla = np.linalg.solve(lhs_n, rhs_n)

    xv = mesh.vertices[verts]
    D = np.empty((n, 4, 10))
    D[:, 0, :] = basis.values(xv)
    D[:, 1:, :] = basis.gradients(xv).transpose(0, 2, 1)
    ops = ElementOperators(
        cell=cell,
        vertex_ids=verts,
        diameter=geo.diameter,
        volume=geo.volume,
        basis=basis,
        pi_delta=pi_delta,
        pi_nabla=pi_nabla,
        dof_eval=D.reshape(4 * n, 10),
        mass=mass,
        grad_gram=grad_gram,
        hess_gram=hess_gram,
        lap_gram=lap_gram,
        tets=tets,
        vertex_coords=xv,
    )
    return ops


def pi_delta_cell(mesh, cell, face_spaces) -> np.ndarray:
    return build_element(mesh, cell, face_spaces).pi_delta


def pi_nabla_cell(mesh, cell, face_spaces) -> np.ndarray:
    return build_element(mesh, cell, face_spaces).pi_nabla


# -- scaled dofs, stabilization and forms -----------------------------------


def dof_scaling(hnu_local) -> np.ndarray:
    """Per-dof factors: 1 for values, h_nu for gradient components."""
    h = np.asarray(hnu_local, dtype=float)
    out = np.ones((len(h), 4))
    out[:, 1:] = h[:, None]
    return out.ravel()


def dof_of_projection(ops: ElementOperators, table: np.ndarray, hnu_local) -> np.ndarray:
    """Scaled dofs of the projected polynomial as a map on scaled dofs."""
    s = dof_scaling(hnu_local)
    return (s[:, None] * ops.dof_eval) @ (table / s[None, :])


def stab_matrix(dof_of_pi: np.ndarray) -> np.ndarray:
    """``(I - P)^T (I - P)``: the stabilization on scaled dofs applied to the remainder."""
    r = np.eye(len(dof_of_pi)) - dof_of_pi
    return r.T @ r


@dataclass(eq=False)
class LocalForms:
    k_delta: np.ndarray
    k_nabla: np.ndarray
    m0: np.ndarray

    def combined(self, c1: float, c2: float, c3: float) -> np.ndarray:
        return c1 * self.k_delta + c2 * self.k_nabla + c3 * self.m0


def local_forms(ops: ElementOperators, hnu_local, form: str = "hessian") -> LocalForms:
    """Stabilized local forms on scaled dofs."""
    if form not in FORMS:
        raise ValueError(f"unknown form {form!r}")
    s = dof_scaling(hnu_local)
    D = s[:, None] * ops.dof_eval
    Bd = ops.pi_delta / s[None, :]
    Bn = ops.pi_nabla / s[None, :]
    hP = ops.diameter
    sd = stab_matrix(D @ Bd)
    sn = stab_matrix(D @ Bn)
    gram = ops.hess_gram if form == "hessian" else ops.lap_gram
    return LocalForms(
        k_delta=Bd.T @ gram @ Bd + sd / hP,
        k_nabla=Bn.T @ ops.grad_gram @ Bn + hP * sn,
        m0=Bd.T @ ops.mass @ Bd + hP**3 * sd,
    )


def laplacian_form_variant(ops: ElementOperators, hnu_local) -> np.ndarray:
    return local_forms(ops, hnu_local, form="laplacian").k_delta


def load_moments(ops: ElementOperators, f: Callable, degree: int = DEFAULT_LOAD_DEGREE) -> np.ndarray:
    """Integrals of ``f`` against the ten cell monomials."""
    pts, w = simplex_points(ops.tets, tetrahedron_rule(degree))
    pts = pts.reshape(-1, 3)
    return (w.ravel() * np.asarray(f(pts), dtype=float)) @ ops.basis.values(pts)


def local_load(ops: ElementOperators, f: Callable, hnu_local, degree: int = DEFAULT_LOAD_DEGREE) -> np.ndarray:
    """Scaled-dof load: integral of f against the L2 projection of each basis function."""
    s = dof_scaling(hnu_local)
    return (ops.pi0.T @ load_moments(ops, f, degree)) / s


def boundary_face_load(
    mesh: PolyMesh,
    ops: ElementOperators,
    fs: FaceSpace,
    sigma: int,
    moment: Callable,
    shear: Callable,
    degree: int = DEFAULT_LOAD_DEGREE,
) -> np.ndarray:
    """Unscaled local load of ``int_f moment . grad v + shear * v`` on a boundary face.

    The virtual ``v`` and its tangential gradient are replaced by the face
    projection ``pi_delta`` and the normal derivative by its nodal projection.
    ``moment`` maps points to 3-vectors, ``shear`` to scalars.
    """
    local = {int(v): i for i, v in enumerate(ops.vertex_ids)}
    T, N = _face_maps(fs, local, len(ops.vertex_ids))
    pr = fs.proj
    tris = face_triangles(mesh, fs.face)
    pts, w = simplex_points(tris, triangle_rule(degree))
    pts, w = pts.reshape(-1, 3), w.ravel()
    loc = fs.to_local(pts)
    b = pr.basis
    vals = b.values(loc)  # (q, 6)
    grads = b.gradients(loc)  # (q, 6, 2)
    n_out = sigma * fs.frame.n
    mom = np.asarray(moment(pts), dtype=float)
    sh = np.asarray(shear(pts), dtype=float)
    mx, my, mn = mom @ fs.frame.v_x, mom @ fs.frame.v_y, mom @ n_out
    # v -> pi_delta image; tangential gradient of that image
    tvec = (w * sh) @ vals + (w * mx) @ grads[:, :, 0] + (w * my) @ grads[:, :, 1]
    face_c1 = tvec @ pr.pi_delta
    # normal derivative along n_out = sigma * stored-normal derivative
    nvec = (w * mn) @ b.values(loc)[:, :3]
    face_n = sigma * (nvec @ pr.pi_nabla)
    return face_c1 @ T + face_n @ N
