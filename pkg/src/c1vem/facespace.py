"""Face-level virtual spaces and projector tables.

Each planar face carries two 2D virtual spaces:

* the nodal space, with one value per vertex, projected onto P1 by
  ``pi_nabla`` (energy projection plus boundary average);
* the C1 space, with value and tangential gradient per vertex, projected onto
  P2 by ``pi_delta`` (Hessian-energy projection plus boundary P1 moments).

Dof vectors of the C1 space are interleaved per vertex as
``[v, dv/dx~, dv/dy~]`` in face-frame coordinates, following the vertex loop.
Every table is computed from boundary integrals only, so the virtual
functions are never evaluated inside the face.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .mesh import FaceFrame, PolyMesh
from .polybasis import ScaledMonomialBasis, edge_gauss, simplex_points, triangle_rule

EDGE_RULE_POINTS = 3  # exact to degree 5; edge integrands are at most quartic


def hermite(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cubic Hermite shape functions on [0, 1] and their s-derivatives.

    Columns: value at 0, slope at 0, value at 1, slope at 1.
    """
    s = np.asarray(s, dtype=float)
    h = np.stack([1 - 3 * s**2 + 2 * s**3, s - 2 * s**2 + s**3, 3 * s**2 - 2 * s**3, -(s**2) + s**3], -1)
    dh = np.stack([-6 * s + 6 * s**2, 1 - 4 * s + 3 * s**2, 6 * s - 6 * s**2, -2 * s + 3 * s**2], -1)
    return h, dh


@dataclass(frozen=True, eq=False)
class FacePolygon:
    """A planar polygon in its own 2D coordinates, loop counter-clockwise."""

    xy: np.ndarray

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float)
        if xy.ndim != 2 or xy.shape[1] != 2 or len(xy) < 3:
            raise ValueError("polygon needs an (n>=3, 2) vertex array")
        object.__setattr__(self, "xy", xy)
        self._area_centroid  # reject clockwise or degenerate loops up front

    @property
    def n(self) -> int:
        return len(self.xy)

    @cached_property
    def _area_centroid(self):
        p, q = self.xy, np.roll(self.xy, -1, axis=0)
        cross = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
        area = 0.5 * cross.sum()
        if area <= 0:
            raise ValueError("polygon has non-positive area (clockwise or degenerate loop)")
        centroid = ((p + q) * cross[:, None]).sum(axis=0) / (6.0 * area)
        return float(area), centroid

    @property
    def area(self) -> float:
        return self._area_centroid[0]

    @property
    def centroid(self) -> np.ndarray:
        return self._area_centroid[1]

    @cached_property
    def diameter(self) -> float:
        d = self.xy[:, None, :] - self.xy[None, :, :]
        return float(np.sqrt((d**2).sum(-1)).max())

    @cached_property
    def edge_vectors(self) -> np.ndarray:
        return np.roll(self.xy, -1, axis=0) - self.xy

    @cached_property
    def lengths(self) -> np.ndarray:
        lengths = np.linalg.norm(self.edge_vectors, axis=1)
        if np.any(lengths == 0):
            raise ValueError(f"zero-length edge {int(np.argmin(lengths))}")
        return lengths

    @cached_property
    def tangents(self) -> np.ndarray:
        return self.edge_vectors / self.lengths[:, None]

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward in-plane edge normals (tangent rotated clockwise)."""
        t = self.tangents
        return np.column_stack([t[:, 1], -t[:, 0]])

    @cached_property
    def basis(self) -> ScaledMonomialBasis:
        return ScaledMonomialBasis(self.centroid, self.diameter, 2)

    def triangles(self) -> np.ndarray:
        c = np.broadcast_to(self.centroid, self.xy.shape)
        return np.stack([c, self.xy, np.roll(self.xy, -1, axis=0)], axis=1)

    def quadrature(self, degree: int) -> tuple[np.ndarray, np.ndarray]:
        pts, w = simplex_points(self.triangles(), triangle_rule(degree))
        return pts.reshape(-1, 2), w.ravel()


@dataclass
class EdgeTrace:
    """Restriction data of a C1 face function to one edge, parametrised by s in [0, 1]."""

    length: float
    tangent: np.ndarray
    normal: np.ndarray
    cubic: np.ndarray  # power-basis coefficients of v(s)
    normal_derivative: np.ndarray  # endpoint values of grad v . n_e

    def value(self, s):
        return np.polynomial.polynomial.polyval(s, self.cubic)

    def tangential_derivative(self, s):
        return np.polynomial.polynomial.polyval(s, np.polynomial.polynomial.polyder(self.cubic)) / self.length

    def normal_derivative_at(self, s):
        s = np.asarray(s, dtype=float)
        return (1 - s) * self.normal_derivative[0] + s * self.normal_derivative[1]


# Hermite basis in power form: rows are H0..H3, columns coefficients of 1, s, s^2, s^3
_HERMITE_POWER = np.array([[1, 0, -3, 2], [0, 1, -2, 1], [0, 0, 3, -2], [0, 0, -1, 1]], dtype=float)


def edge_trace(poly: FacePolygon, edge: int, dofs) -> EdgeTrace:
    n = poly.n
    if not 0 <= edge < n:
        raise ValueError(f"edge {edge} not in polygon")
    dofs = np.asarray(dofs, dtype=float).reshape(n, 3)
    a, b = edge, (edge + 1) % n
    L, t, nrm = poly.lengths[edge], poly.tangents[edge], poly.normals[edge]
    data = np.array([dofs[a, 0], L * dofs[a, 1:] @ t, dofs[b, 0], L * dofs[b, 1:] @ t])
    return EdgeTrace(L, t, nrm, data @ _HERMITE_POWER, np.array([dofs[a, 1:] @ nrm, dofs[b, 1:] @ nrm]))


@dataclass(frozen=True, eq=False)
class _EdgeOps:
    """Linear maps from face dofs to edge traces at Gauss points."""

    points: np.ndarray  # (n, q, 2)
    weights: np.ndarray  # (n, q), physical
    value: np.ndarray  # (n, q, 3n)   v on the edge (cubic)
    grad: np.ndarray  # (n, q, 2, 3n) full tangential gradient on the edge
    value_linear: np.ndarray  # (n, q, n) piecewise-linear trace of nodal dofs


def _edge_ops(poly: FacePolygon) -> _EdgeOps:
    n = poly.n
    rule = edge_gauss(EDGE_RULE_POINTS)
    s = rule.points[:, 1]
    q = len(s)
    h, dh = hermite(s)
    pts = poly.xy[:, None, :] + s[None, :, None] * poly.edge_vectors[:, None, :]
    w = poly.lengths[:, None] * rule.weights[None, :]
    value = np.zeros((n, q, 3 * n))
    grad = np.zeros((n, q, 2, 3 * n))
    lin = np.zeros((n, q, n))
    for e in range(n):
        a, b = e, (e + 1) % n
        L, t, nrm = poly.lengths[e], poly.tangents[e], poly.normals[e]
        value[e, :, 3 * a] = h[:, 0]
        value[e, :, 3 * a + 1 : 3 * a + 3] = h[:, 1, None] * L * t
        value[e, :, 3 * b] = h[:, 2]
        value[e, :, 3 * b + 1 : 3 * b + 3] = h[:, 3, None] * L * t
        # d/dt from the cubic, d/dn linear between endpoint gradients
        dt = np.zeros((q, 3 * n))
        dt[:, 3 * a] = dh[:, 0] / L
        dt[:, 3 * a + 1 : 3 * a + 3] = dh[:, 1, None] * t
        dt[:, 3 * b] = dh[:, 2] / L
        dt[:, 3 * b + 1 : 3 * b + 3] = dh[:, 3, None] * t
        dn = np.zeros((q, 3 * n))
        dn[:, 3 * a + 1 : 3 * a + 3] = (1 - s)[:, None] * nrm
        dn[:, 3 * b + 1 : 3 * b + 3] = s[:, None] * nrm
        grad[e] = t[None, :, None] * dt[:, None, :] + nrm[None, :, None] * dn[:, None, :]
        lin[e, :, a] = 1 - s
        lin[e, :, b] = s
    return _EdgeOps(pts, w, value, grad, lin)


def pi_nabla_face(poly: FacePolygon, ops: _EdgeOps | None = None) -> np.ndarray:
    """(3, n) table: nodal vertex values -> P1 coefficients."""
    ops = ops or _edge_ops(poly)
    basis = poly.basis
    m = basis.values(ops.points.reshape(-1, 2))[:, :3].reshape(poly.n, -1, 3)
    grads = basis.gradients(poly.centroid)[:3]  # constant for P1
    edge_int = np.einsum("eq,eqj->ej", ops.weights, ops.value_linear)  # int_e v, (n_edges, n)
    lhs = np.zeros((3, 3))
    rhs = np.zeros((3, poly.n))
    lhs[0] = np.einsum("eq,eqj->j", ops.weights, m)
    rhs[0] = edge_int.sum(axis=0)
    for i in (1, 2):
        lhs[i] = poly.area * grads @ grads[i]
        rhs[i] = (poly.normals @ grads[i]) @ edge_int
    return np.linalg.solve(lhs, rhs)


def pi_delta_face(poly: FacePolygon, ops: _EdgeOps | None = None) -> np.ndarray:
    """(6, 3n) table: C1 face dofs -> P2 coefficients."""
    ops = ops or _edge_ops(poly)
    basis = poly.basis
    m = basis.values(ops.points.reshape(-1, 2)).reshape(poly.n, -1, 6)
    hess = basis.hessians(poly.centroid)  # (6, 2, 2), constant
    lhs = np.zeros((6, 6))
    rhs = np.zeros((6, 3 * poly.n))
    for i in range(3):
        lhs[i] = np.einsum("eq,eqj,eq->j", ops.weights, m, m[:, :, i])
        rhs[i] = np.einsum("eq,eq,eqk->k", ops.weights, m[:, :, i], ops.value)
    for i in range(3, 6):
        lhs[i] = poly.area * np.einsum("ab,jab->j", hess[i], hess)
        hn = poly.normals @ hess[i]  # (H n_e), (n_edges, 2)
        rhs[i] = np.einsum("eq,ea,eqak->k", ops.weights, hn, ops.grad)
    return np.linalg.solve(lhs, rhs)


def pi0_grad_face(poly: FacePolygon, ops: _EdgeOps | None = None) -> np.ndarray:
    """(2, 3n) table: C1 face dofs -> mean tangential gradient."""
    ops = ops or _edge_ops(poly)
    edge_int = np.einsum("eq,eqk->ek", ops.weights, ops.value)
    return poly.normals.T @ edge_int / poly.area


def face_mass(poly: FacePolygon, degree: int = 4) -> np.ndarray:
    pts, w = poly.quadrature(degree)
    m = poly.basis.values(pts)
    return np.einsum("q,qi,qj->ij", w, m, m)


def face_moments_p1(poly: FacePolygon, pi_delta: np.ndarray) -> np.ndarray:
    """(3, 3n) table: C1 face dofs -> integrals of v against the P1 monomials."""
    return face_mass(poly)[:3, :] @ pi_delta


@dataclass(frozen=True, eq=False)
class FaceProjectors:
    polygon: FacePolygon
    pi_nabla: np.ndarray
    pi_delta: np.ndarray
    pi0_grad: np.ndarray
    moments: np.ndarray
    p1_integrals: np.ndarray  # integrals of the three P1 monomials

    @property
    def basis(self) -> ScaledMonomialBasis:
        return self.polygon.basis

    def eval_pi_delta(self, dofs, points) -> np.ndarray:
        return self.basis.values(points) @ (self.pi_delta @ np.asarray(dofs, dtype=float))


def face_projectors(poly: FacePolygon) -> FaceProjectors:
    ops = _edge_ops(poly)
    pid = pi_delta_face(poly, ops)
    mass = face_mass(poly)
    return FaceProjectors(
        polygon=poly,
        pi_nabla=pi_nabla_face(poly, ops),
        pi_delta=pid,
        pi0_grad=pi0_grad_face(poly, ops),
        moments=mass[:3, :] @ pid,
        p1_integrals=mass[0, :3].copy(),
    )


@dataclass(frozen=True, eq=False)
class FaceSpace:
    """Projectors of one mesh face together with its 3D frame."""

    face: int
    frame: FaceFrame
    vertex_ids: np.ndarray
    area: float
    proj: FaceProjectors

    def to_local(self, points) -> np.ndarray:
        return self.frame.to_local(points)

    @cached_property
    def center(self) -> np.ndarray:
        """3D position of the face basis center."""
        return self.frame.to_global(self.proj.polygon.centroid)

    def p1_in_face_basis(self, value_at_center, gradient) -> np.ndarray:
        """Face P1 coefficients of the restriction of a 3D affine function.

        ``value_at_center`` (shape (...,)) is the function at :attr:`center`,
        ``gradient`` (shape (..., 3)) its constant gradient.
        """
        h = self.proj.polygon.diameter
        g = np.asarray(gradient, dtype=float)
        return np.stack(
            [np.asarray(value_at_center, dtype=float), h * g @ self.frame.v_x, h * g @ self.frame.v_y],
            axis=-1,
        )


def build_face_space(mesh: PolyMesh, face: int, frame: FaceFrame | None = None) -> FaceSpace:
    frame = frame or mesh.frames[face]
    poly = FacePolygon(frame.to_local(mesh.vertices[mesh.faces[face]]))
    return FaceSpace(face, frame, mesh.faces[face], poly.area, face_projectors(poly))


def build_face_spaces(mesh: PolyMesh) -> list[FaceSpace]:
    return [build_face_space(mesh, f) for f in range(len(mesh.faces))]
