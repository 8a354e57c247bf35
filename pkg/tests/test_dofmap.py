"""
    Tests for global DOF numbering and edge sign conventions.
"""

import numpy as np
import pytest

from vmm_solver.exceptions import DimensionMismatchError
from vmm_solver.fem import ElementKind, build_dof_map
from vmm_solver.mesh import LOCAL_EDGES, build_disk_mesh


def test_hermite_numbering(interval_mesh):
    dofmap = build_dof_map(interval_mesh, ElementKind.HERMITE3_1D)
    assert dofmap.n_dofs == 10
    assert dofmap.boundary_trace_dofs.tolist() == [0, 8]
    assert dofmap.boundary_normal_dofs.tolist() == [1, 9]
    assert dofmap.cell_dofs[1].tolist() == [2, 3, 4, 5]
    assert np.all(dofmap.cell_signs == 1.0)


def test_argyris_numbering(square_mesh):
    dofmap = build_dof_map(square_mesh, ElementKind.ARGYRIS5_2D)
    assert dofmap.n_dofs == 70
    assert dofmap.cell_dofs.shape == (8, 21)
    assert dofmap.boundary_trace_dofs.size == 6 * square_mesh.boundary_vertices.size
    assert dofmap.boundary_normal_dofs.size == square_mesh.boundary_edges.size == 8
    assert np.all(dofmap.cell_dofs[:, 18:] >= 6 * square_mesh.n_vertices)


def test_every_dof_is_used(square_mesh):
    dofmap = build_dof_map(square_mesh, ElementKind.ARGYRIS5_2D)
    assert np.unique(dofmap.cell_dofs).tolist() == list(range(dofmap.n_dofs))


@pytest.mark.parametrize("mesh", [build_disk_mesh(1.0, 8, 1), build_disk_mesh(2.0, 6, 2)])
def test_shared_edges_have_opposite_signs(mesh):
    dofmap = build_dof_map(mesh, ElementKind.ARGYRIS5_2D)
    seen = {}
    for cell_index in range(mesh.n_cells):
        for k in range(3):
            edge = int(mesh.cell_edges[cell_index, k])
            seen.setdefault(edge, []).append(dofmap.cell_signs[cell_index, 18 + k])
    for edge, signs in seen.items():
        if len(signs) == 2:
            assert signs[0] == -signs[1]
        else:
            assert edge in mesh.boundary_edges


def test_global_normals_match_positive_signs():
    mesh = build_disk_mesh(1.0, 8, 1)
    dofmap = build_dof_map(mesh, ElementKind.ARGYRIS5_2D)
    for cell_index in range(mesh.n_cells):
        triangle = mesh.cell_coordinates(cell_index)
        centroid = triangle.mean(axis=0)
        for k, (a, b) in enumerate(LOCAL_EDGES):
            edge = mesh.cell_edges[cell_index, k]
            midpoint = 0.5 * (triangle[a] + triangle[b])
            outward = np.sign(dofmap.edge_normals[edge] @ (midpoint - centroid))
            assert outward == dofmap.edge_normal_signs[cell_index, k]


def test_free_dofs(interval_mesh):
    dofmap = build_dof_map(interval_mesh, ElementKind.HERMITE3_1D)
    free = dofmap.free_dofs(dofmap.boundary_trace_dofs)
    assert free.tolist() == [1, 2, 3, 4, 5, 6, 7, 9]


def test_dimension_mismatch(interval_mesh):
    with pytest.raises(DimensionMismatchError):
        build_dof_map(interval_mesh, ElementKind.ARGYRIS5_2D)
