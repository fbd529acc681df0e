"""Mixed finite elements for linear elasticity on brick meshes with strongly
symmetric, H(div)-conforming stresses."""

from .assembly import MaterialModel, QuadratureRule, assemble_system
from .mesh import BrickMesh, build_box_mesh, global_dof_map, unit_cube_mesh
from .ref_element import FULL, RIGID, MatrixPolynomial, VectorPolynomial, nodal_basis
from .solver import Discretization, convergence_study, manufactured_case, solve_saddle

__all__ = [
    "FULL",
    "RIGID",
    "BrickMesh",
    "Discretization",
    "MaterialModel",
    "MatrixPolynomial",
    "QuadratureRule",
    "VectorPolynomial",
    "assemble_system",
    "build_box_mesh",
    "convergence_study",
    "global_dof_map",
    "manufactured_case",
    "nodal_basis",
    "solve_saddle",
    "unit_cube_mesh",
]
