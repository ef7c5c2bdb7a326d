"""Relative error measures between an exact solution and a discrete one."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..polybasis import simplex_points, tetrahedron_rule
from ..system import Discretization, GlobalDofMap

DEFAULT_ERROR_DEGREE = 8


class ZeroNormError(ZeroDivisionError):
    pass


def _ratio(num: float, den: float, what: str) -> float:
    if den == 0.0:
        raise ZeroNormError(f"exact solution has zero {what}")
    return float(np.sqrt(num / den))


def projected_coefficients(disc: Discretization, dofmap: GlobalDofMap, x: np.ndarray, which: str) -> list[np.ndarray]:
    """Per-cell polynomial coefficients of the chosen projection of ``x``."""
    out = []
    for ops in disc.elements:
        loc = x[dofmap.local(ops.vertex_ids)] / dofmap.scaling[dofmap.local(ops.vertex_ids)]
        table = {"delta": ops.pi_delta, "nabla": ops.pi_nabla, "zero": ops.pi0}[which]
        out.append(table @ loc)
    return out


def broken_errors(
    disc: Discretization,
    dofmap: GlobalDofMap,
    x: np.ndarray,
    u: Callable,
    grad_u: Callable,
    hess_u: Callable,
    degree: int = DEFAULT_ERROR_DEGREE,
) -> dict[str, float]:
    """Relative H2-seminorm, H1-seminorm and L2 errors of the projected solution."""
    rule = tetrahedron_rule(degree)
    acc = np.zeros(6)  # err2, ref2, err1, ref1, err0, ref0
    for ops in disc.elements:
        idx = dofmap.local(ops.vertex_ids)
        loc = x[idx] / dofmap.scaling[idx]
        cd, cn = ops.pi_delta @ loc, ops.pi_nabla @ loc
        pts, w = simplex_points(ops.tets, rule)
        pts, w = pts.reshape(-1, 3), w.ravel()
        b = ops.basis
        H = np.einsum("j,jab->ab", cd, b.hessians(b.center))
        dh = hess_u(pts) - H
        g = grad_u(pts)
        dg = g - b.gradients(pts).transpose(0, 2, 1) @ cn
        uu = u(pts)
        du = uu - b.values(pts) @ cd
        hu = hess_u(pts)
        acc += [
            w @ np.einsum("qab,qab->q", dh, dh),
            w @ np.einsum("qab,qab->q", hu, hu),
            w @ np.einsum("qa,qa->q", dg, dg),
            w @ np.einsum("qa,qa->q", g, g),
            w @ du**2,
            w @ uu**2,
        ]
    return {
        "eH2": _ratio(acc[0], acc[1], "H2 seminorm"),
        "eH1": _ratio(acc[2], acc[3], "H1 seminorm"),
        "eL2": _ratio(acc[4], acc[5], "L2 norm"),
    }


def error_h2(disc, dofmap, x, u, grad_u, hess_u, degree=DEFAULT_ERROR_DEGREE) -> float:
    return broken_errors(disc, dofmap, x, u, grad_u, hess_u, degree)["eH2"]


def error_h1(disc, dofmap, x, u, grad_u, hess_u, degree=DEFAULT_ERROR_DEGREE) -> float:
    return broken_errors(disc, dofmap, x, u, grad_u, hess_u, degree)["eH1"]


def error_l2(disc, dofmap, x, u, grad_u, hess_u, degree=DEFAULT_ERROR_DEGREE) -> float:
    return broken_errors(disc, dofmap, x, u, grad_u, hess_u, degree)["eL2"]


def error_linf(vertices: np.ndarray, dofmap: GlobalDofMap, x: np.ndarray, u: Callable) -> float:
    exact = u(vertices)
    den = np.abs(exact).max()
    if den == 0.0:
        raise ZeroNormError("exact solution vanishes at all vertices")
    return float(np.abs(exact - dofmap.values(x)).max() / den)


def error_linf_grad(vertices: np.ndarray, dofmap: GlobalDofMap, x: np.ndarray, grad_u: Callable) -> float:
    exact = grad_u(vertices)
    den = np.abs(exact).max()
    if den == 0.0:
        raise ZeroNormError("exact gradient vanishes at all vertices")
    return float(np.abs(exact - dofmap.gradients(x)).max() / den)
