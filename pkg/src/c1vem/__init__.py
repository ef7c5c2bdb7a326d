"""C1-conforming lowest-order virtual elements on polyhedral meshes."""

from .mesh import PolyMesh, generate_structured_cube, load_mesh
from .system import Discretization, apply_dirichlet, assemble, number_dofs, solve

__version__ = "0.1.0"

__all__ = [
    "Discretization", "PolyMesh", "apply_dirichlet", "assemble", "generate_structured_cube",
    "load_mesh", "number_dofs", "solve",
]
