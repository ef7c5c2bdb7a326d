"""Manufactured-solution problems.

Each problem is defined by a closed-form sympy expression for ``u``; the
forcing term, derivatives and natural boundary data are derived
symbolically and compiled to vectorized numpy callables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

X, Y, Z = sp.symbols("x y z", real=True)
XYZ = (X, Y, Z)


def _compile(expr) -> Callable[[np.ndarray], np.ndarray]:
    fn = sp.lambdify(XYZ, expr, "numpy")

    def wrapped(points):
        p = np.asarray(points, dtype=float)
        out = fn(p[..., 0], p[..., 1], p[..., 2])
        return np.broadcast_to(np.asarray(out, dtype=float), p.shape[:-1]).copy()

    return wrapped


def _compile_array(exprs) -> Callable[[np.ndarray], np.ndarray]:
    arr = np.array(exprs, dtype=object)
    shape = arr.shape
    parts = [_compile(e) for e in arr.ravel()]

    def wrapped(points):
        p = np.asarray(points, dtype=float)
        vals = np.stack([fn(p) for fn in parts], axis=-1)
        return vals.reshape(p.shape[:-1] + shape)

    return wrapped


@dataclass(eq=False)
class ManufacturedProblem:
    name: str
    expr: sp.Expr
    coeffs: tuple[float, float, float]
    # selects Dirichlet boundary faces by centroid; None means the whole boundary
    dirichlet_region: Callable[[np.ndarray], bool] | None = None
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def gradient_expr(self):
        return [sp.diff(self.expr, s) for s in XYZ]

    @property
    def hessian_expr(self):
        return [[sp.diff(self.expr, a, b) for b in XYZ] for a in XYZ]

    @property
    def laplacian_expr(self):
        return sum(sp.diff(self.expr, s, 2) for s in XYZ)

    @property
    def forcing_expr(self):
        c1, c2, c3 = (sp.nsimplify(c) for c in self.coeffs)
        lap = self.laplacian_expr
        bilap = sum(sp.diff(lap, s, 2) for s in XYZ)
        return sp.simplify(c1 * bilap - c2 * lap + c3 * self.expr)

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def u(self):
        return self._get("u", lambda: _compile(self.expr))

    @property
    def grad(self):
        return self._get("grad", lambda: _compile_array(self.gradient_expr))

    @property
    def hessian(self):
        return self._get("hess", lambda: _compile_array(self.hessian_expr))

    @property
    def laplacian(self):
        return self._get("lap", lambda: _compile(self.laplacian_expr))

    @property
    def grad_laplacian(self):
        return self._get("glap", lambda: _compile_array([sp.diff(self.laplacian_expr, s) for s in XYZ]))

    @property
    def f(self):
        return self._get("f", lambda: _compile(self.forcing_expr))

    def natural_data(self, form: str = "hessian"):
        """Boundary load densities ``(moment, shear)`` for faces without essential conditions.

        The weak form picks up ``int moment . grad v + shear * v`` on those
        faces; both vanish when the natural conditions are homogeneous.
        """
        c1, c2, _ = self.coeffs

        def moment(x, n):
            if form == "hessian":
                return c1 * self.hessian(x) @ n
            return c1 * self.laplacian(x)[:, None] * n[None, :]

        def shear(x, n):
            return -c1 * self.grad_laplacian(x) @ n + c2 * self.grad(x) @ n

        return moment, shear

    @property
    def is_p2(self) -> bool:
        poly = sp.Poly(self.expr, *XYZ) if self.expr.is_polynomial(*XYZ) else None
        return poly is not None and poly.total_degree() <= 2


def _off_x_faces(c: np.ndarray) -> bool:
    # Dirichlet everywhere except the planes x = 0 and x = 1
    return not (abs(c[0]) < 1e-12 or abs(c[0] - 1.0) < 1e-12)


def registry() -> dict[str, ManufacturedProblem]:
    return {
        "patch-p2": ManufacturedProblem(
            "patch-p2",
            X**2 + X * Y + Z**2 - 2 * X + 1,
            (1.0, 1.0, 1.0),
            description="quadratic patch test, full clamped boundary",
        ),
        "example1": ManufacturedProblem(
            "example1",
            sp.sin(sp.pi * X * Y * Z),
            (1.0, 0.0, 1.0),
            description="bi-Laplacian with reaction, u = sin(pi x y z)",
        ),
        "example2": ManufacturedProblem(
            "example2",
            X**4 * Y * Z / 12,
            (1.0, 0.0, 0.0),
            dirichlet_region=_off_x_faces,
            description="bi-Laplacian, natural conditions on x = 0 and x = 1",
        ),
        "example3": ManufacturedProblem(
            "example3",
            sp.sin(2 * X * Y) * sp.cos(Z),
            (0.0, 1.0, 1.0),
            description="second-order reaction-diffusion, u = sin(2xy) cos(z)",
        ),
    }


def get_problem(name: str, coeffs: tuple[float, float, float] | None = None) -> ManufacturedProblem:
    reg = registry()
    if name not in reg:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(reg)}")
    prob = reg[name]
    if coeffs is not None:
        prob = ManufacturedProblem(prob.name, prob.expr, tuple(coeffs), prob.dirichlet_region, prob.description)
    return prob
