"""Solution output for visualization."""

from __future__ import annotations

import numpy as np

from ..system import Discretization, GlobalDofMap
from ..vtkio import write_vtk


def export_solution(disc: Discretization, dofmap: GlobalDofMap, x: np.ndarray, path) -> None:
    """Write vertex values, unscaled gradients and per-cell ``pi_delta`` coefficients."""
    coeffs = np.empty((len(disc.elements), 10))
    for ops in disc.elements:
        idx = dofmap.local(ops.vertex_ids)
        coeffs[ops.cell] = ops.pi_delta @ (x[idx] / dofmap.scaling[idx])
    write_vtk(
        path,
        disc.mesh,
        point_data={"u": dofmap.values(x), "grad_u": dofmap.gradients(x)},
        cell_data={"pi_delta": coeffs},
        title="c1vem solution",
    )
