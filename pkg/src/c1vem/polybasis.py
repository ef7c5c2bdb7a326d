"""Scaled monomial bases and simplex quadrature.

Monomials are ordered graded-lexicographically, e.g. for degree 2 in 3D::

    1, x, y, z, x^2, xy, xz, y^2, yz, z^2

and every module that stores polynomial coefficients relies on this order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

MAX_QUADRATURE_DEGREE = 30


@lru_cache(maxsize=None)
def exponents(dim: int, degree: int) -> np.ndarray:
    """Exponent table of all monomials of total degree <= ``degree``."""
    rows = []
    for total in range(degree + 1):
        block = [a for a in product(range(total + 1), repeat=dim) if sum(a) == total]
        rows.extend(sorted(block, reverse=True))
    table = np.array(rows, dtype=int)
    table.setflags(write=False)
    return table


def basis_size(dim: int, degree: int) -> int:
    return len(exponents(dim, degree))


@dataclass(frozen=True, eq=False)
class ScaledMonomialBasis:
    """Monomials ``((x - center) / scale) ** alpha`` with ``|alpha| <= degree``."""

    center: np.ndarray
    scale: float
    degree: int = 2
    exps: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float)
        if center.ndim != 1 or center.size not in (2, 3):
            raise ValueError("basis center must be a 2D or 3D point")
        if not self.scale > 0:
            raise ValueError("basis scale must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "exps", exponents(center.size, self.degree))

    @property
    def dim(self) -> int:
        return self.center.size

    def __len__(self) -> int:
        return len(self.exps)

    def _scaled(self, points) -> tuple[np.ndarray, bool]:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.dim:
            raise ValueError(f"expected {self.dim}D points, got shape {pts.shape}")
        return (pts - self.center) / self.scale, single

    def _table(self, s: np.ndarray) -> np.ndarray:
        # table[n, j, p] = s[n, j] ** p
        table = np.empty(s.shape + (self.degree + 1,))
        table[:, :, 0] = 1.0
        for p in range(1, self.degree + 1):
            table[:, :, p] = table[:, :, p - 1] * s
        return table

    @staticmethod
    def _gather(table: np.ndarray, exps: np.ndarray) -> np.ndarray:
        out = table[:, 0, exps[:, 0]]
        for j in range(1, exps.shape[1]):
            out = out * table[:, j, exps[:, j]]
        return out

    def values(self, points) -> np.ndarray:
        s, single = self._scaled(points)
        out = self._gather(self._table(s), self.exps)
        return out[0] if single else out

    def gradients(self, points) -> np.ndarray:
        """Gradients with shape (N, nbasis, dim)."""
        s, single = self._scaled(points)
        table = self._table(s)
        out = np.empty((len(s), len(self), self.dim))
        for j in range(self.dim):
            e = self.exps.copy()
            coef = e[:, j] / self.scale
            e[:, j] = np.maximum(e[:, j] - 1, 0)
            out[:, :, j] = coef * self._gather(table, e)
        return out[0] if single else out

    def hessians(self, points) -> np.ndarray:
        """Hessians with shape (N, nbasis, dim, dim)."""
        s, single = self._scaled(points)
        table = self._table(s)
        d = self.dim
        out = np.empty((len(s), len(self), d, d))
        for i in range(d):
            for j in range(i, d):
                e = self.exps.copy()
                coef = e[:, i].astype(float)
                e[:, i] = e[:, i] - 1
                coef = coef * e[:, j]
                e[:, j] = e[:, j] - 1
                val = coef / self.scale**2 * self._gather(table, np.maximum(e, 0))
                out[:, :, i, j] = val
                out[:, :, j, i] = val
        return out[0] if single else out

    def laplacians(self, points) -> np.ndarray:
        return np.trace(self.hessians(points), axis1=-2, axis2=-1)


def eval_basis(basis: ScaledMonomialBasis, points) -> np.ndarray:
    return basis.values(points)


def grad_basis(basis: ScaledMonomialBasis, points) -> np.ndarray:
    return basis.gradients(points)


def hessian_basis(basis: ScaledMonomialBasis, points) -> np.ndarray:
    return basis.hessians(points)


# -- quadrature ---------------------------------------------------------------

REFERENCE_MEASURE = {"segment": 1.0, "triangle": 0.5, "tetrahedron": 1.0 / 6.0}


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    simplex: str
    points: np.ndarray  # barycentric coordinates, (q, d + 1)
    weights: np.ndarray  # reference-measure units, sum = reference measure
    degree: int

    def __len__(self) -> int:
        return len(self.weights)


def _jacobi01(n: int, alpha: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi nodes on [0, 1] for the weight (1 - t)**alpha."""
    x, w = roots_jacobi(n, alpha, 0)
    return (1.0 + x) / 2.0, w / 2.0 ** (alpha + 1)


@lru_cache(maxsize=None)
def edge_gauss(npoints: int) -> QuadratureRule:
    """Gauss-Legendre rule on [0, 1]; exact up to degree ``2 * npoints - 1``."""
    if not 1 <= npoints <= 10:
        raise ValueError("edge_gauss supports 1 to 10 points")
    x, w = leggauss(npoints)
    t = (1.0 + x) / 2.0
    return QuadratureRule("segment", np.column_stack([1.0 - t, t]), w / 2.0, 2 * npoints - 1)


def _check_degree(degree: int) -> int:
    if not 0 <= degree <= MAX_QUADRATURE_DEGREE:
        raise ValueError(
            f"quadrature exactness {degree} unavailable (max {MAX_QUADRATURE_DEGREE})"
        )
    return max(1, (degree + 2) // 2)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi (Stroud) rule on the reference triangle."""
    n = _check_degree(degree)
    u, wu = _jacobi01(n, 1)
    v, wv = _jacobi01(n, 0)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv)
    x = U.ravel()
    y = (V * (1.0 - U)).ravel()
    bary = np.column_stack([1.0 - x - y, x, y])
    return QuadratureRule("triangle", bary, W.ravel(), degree)


@lru_cache(maxsize=None)
def tetrahedron_rule(degree: int) -> QuadratureRule:
    """Collapsed Gauss-Jacobi (Stroud) rule on the reference tetrahedron."""
    n = _check_degree(degree)
    u, wu = _jacobi01(n, 2)
    v, wv = _jacobi01(n, 1)
    w, ww = _jacobi01(n, 0)
    U, V, Wc = np.meshgrid(u, v, w, indexing="ij")
    weights = np.einsum("i,j,k->ijk", wu, wv, ww).ravel()
    x = U.ravel()
    y = (V * (1.0 - U)).ravel()
    z = (Wc * (1.0 - U) * (1.0 - V)).ravel()
    bary = np.column_stack([1.0 - x - y - z, x, y, z])
    return QuadratureRule("tetrahedron", bary, weights, degree)


def simplex_points(simplices: np.ndarray, rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    """Map a rule onto physical simplices.

    ``simplices`` has shape (T, d + 1, 3) (or (T, d + 1, 2) for planar
    triangles). Returns points (T, q, dim) and weights (T, q) in physical
    measure.
    """
    simplices = np.asarray(simplices, dtype=float)
    pts = np.einsum("qk,tkd->tqd", rule.points, simplices)
    edges = simplices[:, 1:, :] - simplices[:, :1, :]
    k = edges.shape[1]
    if k == edges.shape[2]:
        jac = np.abs(np.linalg.det(edges))
    elif k == 1:
        jac = np.linalg.norm(edges[:, 0, :], axis=-1)
    elif k == 2:
        a, b = edges[:, 0, :], edges[:, 1, :]
        gram = np.einsum("ti,ti->t", a, a) * np.einsum("ti,ti->t", b, b)
        gram -= np.einsum("ti,ti->t", a, b) ** 2
        jac = np.sqrt(np.maximum(gram, 0.0))
    else:
        raise ValueError("unsupported simplex embedding")
    return pts, jac[:, None] * rule.weights[None, :]


def rule_for(simplices: np.ndarray, degree: int) -> QuadratureRule:
    nverts = np.asarray(simplices).shape[1]
    if nverts == 2:
        return edge_gauss(max(1, (degree + 2) // 2))
    if nverts == 3:
        return triangle_rule(degree)
    if nverts == 4:
        return tetrahedron_rule(degree)
    raise ValueError("simplices must have 2, 3 or 4 vertices")


def integrate(fn: Callable[[np.ndarray], np.ndarray], simplices, degree: int):
    """Integrate ``fn`` over a union of simplices.

    ``fn`` receives an (N, dim) array of points and returns (N,) or (N, ...)
    values; the result has the trailing shape of ``fn``'s output.
    """
    simplices = np.asarray(simplices, dtype=float)
    pts, w = simplex_points(simplices, rule_for(simplices, degree))
    vals = np.asarray(fn(pts.reshape(-1, pts.shape[-1])))
    vals = vals.reshape((w.size,) + vals.shape[1:])
    return np.tensordot(w.ravel(), vals, axes=(0, 0))
