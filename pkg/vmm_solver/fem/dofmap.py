"""
    Global numbering of C1 degrees of freedom.

    Hermite: vertex v owns DOFs (2v, 2v + 1) = (u, u').
    Argyris: vertex v owns DOFs 6v .. 6v + 5 = (u, u_x, u_y, u_xx, u_xy, u_yy),
    edge e owns DOF 6 n_vertices + e = derivative along the global edge normal at its midpoint.
    The global normal of edge (p, q), p < q, is the tangent p -> q rotated clockwise.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from vmm_solver.exceptions import DimensionMismatchError
from vmm_solver.fem.base import ElementKind
from vmm_solver.mesh import LOCAL_EDGES, Mesh, locate_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DofMap:
    """
    Local -> global DOF numbering with boundary classification and edge sign conventions.
    """

    mesh: Mesh
    kind: ElementKind
    cell_dofs: np.ndarray  # (n_cells, n_local)
    # Factor between the global basis function and the local one on a cell (+-1 for edge DOFs).
    cell_signs: np.ndarray  # (n_cells, n_local)
    n_dofs: int
    boundary_trace_dofs: np.ndarray
    # Boundary edge normal derivative DOFs, free unless the clamped auxiliary condition is used.
    boundary_normal_dofs: np.ndarray
    edge_normal_signs: np.ndarray  # (n_cells, 3), empty in 1-D
    edge_normals: np.ndarray  # (n_edges, 2), empty in 1-D

    def free_dofs(self, constrained: np.ndarray) -> np.ndarray:
        mask = np.ones(self.n_dofs, dtype=bool)
        mask[np.asarray(constrained, dtype=np.int64)] = False
        return np.flatnonzero(mask)


def _global_edge_normals(mesh: Mesh) -> np.ndarray:
    tangents = mesh.vertices[mesh.edges[:, 1]] - mesh.vertices[mesh.edges[:, 0]]
    tangents = tangents / np.linalg.norm(tangents, axis=1, keepdims=True)
    return np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)


def build_dof_map(mesh: Mesh, kind: ElementKind) -> DofMap:
    """
    Numbers the DOFs of `kind` on `mesh`.

    :param mesh: Mesh of matching dimension.
    :param kind: Element kind.
    """
    if mesh.dimension != kind.dimension:
        raise DimensionMismatchError(
            f"{kind.tag} needs a {kind.dimension}-D mesh, got a {mesh.dimension}-D one!"
        )

    if kind is ElementKind.HERMITE3_1D:
        vertex_dofs = 2 * mesh.cells[:, :, None] + np.arange(2)[None, None, :]
        cell_dofs = vertex_dofs.reshape(mesh.n_cells, 4)
        dofmap = DofMap(
            mesh=mesh,
            kind=kind,
            cell_dofs=cell_dofs,
            cell_signs=np.ones(cell_dofs.shape),
            n_dofs=2 * mesh.n_vertices,
            boundary_trace_dofs=2 * mesh.boundary_vertices,
            boundary_normal_dofs=2 * mesh.boundary_vertices + 1,
            edge_normal_signs=np.zeros((mesh.n_cells, 0)),
            edge_normals=np.zeros((0, 2)),
        )
    else:
        n_vertex_dofs = 6 * mesh.n_vertices
        vertex_dofs = (6 * mesh.cells[:, :, None] + np.arange(6)[None, None, :]).reshape(
            mesh.n_cells, 18
        )
        edge_dofs = n_vertex_dofs + mesh.cell_edges
        cell_dofs = np.hstack([vertex_dofs, edge_dofs])

        edge_normal_signs = np.empty((mesh.n_cells, 3))
        for k, (a, b) in enumerate(LOCAL_EDGES):
            edge_normal_signs[:, k] = np.where(
                mesh.cells[:, a] < mesh.cells[:, b], 1.0, -1.0
            )
        cell_signs = np.hstack([np.ones((mesh.n_cells, 18)), edge_normal_signs])

        boundary_trace_dofs = (
            6 * mesh.boundary_vertices[:, None] + np.arange(6)[None, :]
        ).reshape(-1)
        dofmap = DofMap(
            mesh=mesh,
            kind=kind,
            cell_dofs=cell_dofs,
            cell_signs=cell_signs,
            n_dofs=n_vertex_dofs + mesh.n_edges,
            boundary_trace_dofs=boundary_trace_dofs,
            boundary_normal_dofs=n_vertex_dofs + mesh.boundary_edges,
            edge_normal_signs=edge_normal_signs,
            edge_normals=_global_edge_normals(mesh),
        )

    for array in (
        dofmap.cell_dofs,
        dofmap.cell_signs,
        dofmap.boundary_trace_dofs,
        dofmap.boundary_normal_dofs,
        dofmap.edge_normal_signs,
        dofmap.edge_normals,
    ):
        array.setflags(write=False)
    logger.debug(
        "Built %s DOF map: %d DOFs, %d boundary trace DOFs.",
        kind.tag,
        dofmap.n_dofs,
        dofmap.boundary_trace_dofs.size,
    )
    return dofmap


def interpolate(
    dofmap: DofMap,
    value: Callable[[np.ndarray], np.ndarray],
    gradient: Callable[[np.ndarray], np.ndarray],
    hessian: Callable[[np.ndarray], np.ndarray],
) -> np.ndarray:
    """
    Global interpolant coefficients of a field given by value / gradient / Hessian evaluators.

    :param dofmap: DOF map.
    :param value: points (n, d) -> (n,).
    :param gradient: points (n, d) -> (n, d).
    :param hessian: points (n, d) -> (n, d, d).
    """
    mesh = dofmap.mesh
    vertices = np.asarray(mesh.vertices)
    coefficients = np.zeros(dofmap.n_dofs)

    values = np.asarray(value(vertices), dtype=float).reshape(-1)
    gradients = np.asarray(gradient(vertices), dtype=float).reshape(-1, mesh.dimension)

    if dofmap.kind is ElementKind.HERMITE3_1D:
        coefficients[0::2] = values
        coefficients[1::2] = gradients[:, 0]
        return coefficients

    hessians = np.asarray(hessian(vertices), dtype=float).reshape(-1, 2, 2)
    block = coefficients[: 6 * mesh.n_vertices].reshape(-1, 6)
    block[:, 0] = values
    block[:, 1:3] = gradients
    block[:, 3] = hessians[:, 0, 0]
    block[:, 4] = hessians[:, 0, 1]
    block[:, 5] = hessians[:, 1, 1]

    midpoints = 0.5 * (vertices[mesh.edges[:, 0]] + vertices[mesh.edges[:, 1]])
    midpoint_gradients = np.asarray(gradient(midpoints), dtype=float).reshape(-1, 2)
    coefficients[6 * mesh.n_vertices :] = np.einsum(
        "ed,ed->e", midpoint_gradients, dofmap.edge_normals
    )
    return coefficients


def local_coefficients(dofmap: DofMap, coefficients: np.ndarray, cell_index: int) -> np.ndarray:
    """
    Coefficients of the local (outward normal) basis on one cell.
    """
    return coefficients[dofmap.cell_dofs[cell_index]] * dofmap.cell_signs[cell_index]


def evaluate_coefficients(
    dofmap: DofMap, element, coefficients: np.ndarray, points: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Evaluates a global finite element function at physical points.

    Returns (values, gradients, hessians, owners); points outside the mesh give NaN and owner -1.
    Derivatives are taken from the owning cell (broken evaluation on cell interfaces).

    :param dofmap: DOF map.
    :param element: Element instance of the DOF map kind.
    :param coefficients: Global coefficient vector.
    :param points: Physical points (n, d).
    """
    mesh = dofmap.mesh
    dimension = mesh.dimension
    points = np.asarray(points, dtype=float).reshape(-1, dimension)
    owners, _ = locate_points(mesh, points)

    values = np.full(points.shape[0], np.nan)
    gradients = np.full((points.shape[0], dimension), np.nan)
    hessians = np.full((points.shape[0], dimension, dimension), np.nan)
    for cell_index in np.unique(owners[owners >= 0]):
        selection = np.flatnonzero(owners == cell_index)
        basis = element.evaluate(mesh.cell_coordinates(cell_index), points[selection])
        local = local_coefficients(dofmap, coefficients, cell_index)
        values[selection] = basis.values @ local
        gradients[selection] = np.einsum("pkd,k->pd", basis.gradients, local)
        hessians[selection] = np.einsum("pkde,k->pde", basis.hessians, local)
    return values, gradients, hessians, owners


__all__ = [
    "DofMap",
    "build_dof_map",
    "interpolate",
    "local_coefficients",
    "evaluate_coefficients",
]
