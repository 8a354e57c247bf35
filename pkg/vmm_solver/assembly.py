"""
    Assembly of the regularized operator, loads, Gram matrices and essential boundary conditions.

    The operator of the regularized problem is K(eps) = eps * B + N with
        B[i, j] = (lap phi_j, lap phi_i)
        N[i, j] = -(A:D2 phi_j, phi_i) + (b.grad phi_j + c phi_j, phi_i)
    and the load is F(eps) = F0 + eps * F1 with F0[i] = (f, phi_i) and F1 collecting the moment
    terms of problems whose exact solution solves the regularized problem.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterator, NamedTuple, Optional

import numpy as np
from scipy import sparse

from vmm_solver.consts import (
    AUX_BC_CHOICES,
    AUX_BC_CLAMPED,
    AUX_BC_SIMPLY_SUPPORTED,
    QUADRATURE_DEFAULT_DEGREE_1D,
    QUADRATURE_DEFAULT_DEGREE_2D,
)
from vmm_solver.exceptions import (
    CoefficientEvaluationError,
    ConfigurationError,
    DimensionMismatchError,
    FieldEvaluationError,
    MissingBoundaryDataError,
)
from vmm_solver.fem import BaseElement, DofMap, build_element_instance, interpolate, quadrature_rule
from vmm_solver.fem.argyris import outward_normals
from vmm_solver.mesh import LOCAL_EDGES, Mesh
from vmm_solver.problems.spec import ProblemSpec

logger = logging.getLogger(__name__)


class GramKind(Enum):
    """
    Inner products on the finite element space.
    ENERGY is eps ||lap w||^2 + ||grad w||^2 (eps passed separately).
    """

    L2 = "L2"
    H1 = "H1"
    H1_SEMINORM = "H1_seminorm"
    H2 = "H2"
    ENERGY = "Energy"


@dataclass(frozen=True)
class SparseSystem:
    """
    Square system in CSR layout with constraint bookkeeping.
    """

    matrix: sparse.csr_matrix
    load: np.ndarray
    constrained: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    prescribed: np.ndarray = field(default_factory=lambda: np.zeros(0))
    symmetric: bool = False

    @property
    def n_dofs(self) -> int:
        return int(self.matrix.shape[0])


@dataclass(frozen=True)
class OperatorBlocks:
    """
    eps independent pieces of the regularized system, assembled once and reused across eps.
    """

    biharmonic: sparse.csr_matrix
    second_order: sparse.csr_matrix
    load: np.ndarray
    moment_load: np.ndarray

    def operator(self, eps: float) -> sparse.csr_matrix:
        if eps == 0.0:
            return self.second_order.copy()
        return (eps * self.biharmonic + self.second_order).tocsr()

    def load_vector(self, eps: float) -> np.ndarray:
        return self.load + eps * self.moment_load

    def system(self, eps: float) -> SparseSystem:
        return SparseSystem(matrix=self.operator(eps), load=self.load_vector(eps))


class CellData(NamedTuple):
    """
    Basis of the global functions restricted to one cell, at its quadrature points.
    """

    index: int
    dofs: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    values: np.ndarray  # (q, k)
    gradients: np.ndarray  # (q, k, d)
    hessians: np.ndarray  # (q, k, d, d)

    @property
    def laplacians(self) -> np.ndarray:
        return np.trace(self.hessians, axis1=2, axis2=3)


def default_quadrature_degree(dimension: int) -> int:
    return QUADRATURE_DEFAULT_DEGREE_1D if dimension == 1 else QUADRATURE_DEFAULT_DEGREE_2D


def iterate_cells(
    dofmap: DofMap, element: BaseElement, quadrature_degree: Optional[int] = None
) -> Iterator[CellData]:
    """
    Yields per cell tabulations of the global basis (edge sign conventions applied), cells ascending.
    """
    mesh = dofmap.mesh
    rule = quadrature_rule(
        mesh.dimension, quadrature_degree or default_quadrature_degree(mesh.dimension)
    )
    for cell_index in range(mesh.n_cells):
        basis, points, weights = element.tabulate(mesh.cell_coordinates(cell_index), rule)
        signs = dofmap.cell_signs[cell_index]
        yield CellData(
            index=cell_index,
            dofs=dofmap.cell_dofs[cell_index],
            points=points,
            weights=weights,
            values=basis.values * signs,
            gradients=basis.gradients * signs[None, :, None],
            hessians=basis.hessians * signs[None, :, None, None],
        )


def evaluate_coefficient(
    name: str, evaluator: Callable[[np.ndarray], np.ndarray], points: np.ndarray, cell_index: int
) -> np.ndarray:
    """
    Evaluates a field at quadrature points of a cell, mapping failures to CoefficientEvaluationError.
    """
    try:
        with np.errstate(all="ignore"):
            values = np.asarray(evaluator(points), dtype=float)
    except FieldEvaluationError as field_error:
        failed = field_error.failed_points[0] if field_error.failed_points else 0
        raise CoefficientEvaluationError(
            f"Field {name} failed on cell {cell_index}: {field_error}",
            cell_index=cell_index,
            point=tuple(float(v) for v in points[failed]),
        ) from field_error
    except (ArithmeticError, ValueError) as evaluation_error:
        raise CoefficientEvaluationError(
            f"Field {name} failed on cell {cell_index}: {evaluation_error}",
            cell_index=cell_index,
            point=tuple(float(v) for v in points[0]),
        ) from evaluation_error

    bad = ~np.isfinite(values.reshape(points.shape[0], -1)).all(axis=1)
    if np.any(bad):
        point = tuple(float(v) for v in points[np.flatnonzero(bad)[0]])
        raise CoefficientEvaluationError(
            f"Field {name} is not finite on cell {cell_index} at {point}!",
            cell_index=cell_index,
            point=point,
        )
    return values


class _Accumulator:
    """
    Collects local matrices cell by cell and sums them in COO -> CSR order (deterministic).
    """

    def __init__(self, n_dofs: int, n_cells: int, n_local: int):
        self.n_dofs = n_dofs
        self.rows = np.empty((n_cells, n_local, n_local), dtype=np.int64)
        self.cols = np.empty((n_cells, n_local, n_local), dtype=np.int64)
        self.data = np.zeros((n_cells, n_local, n_local))

    def add(self, cell_index: int, dofs: np.ndarray, local: np.ndarray) -> None:
        self.rows[cell_index] = dofs[:, None]
        self.cols[cell_index] = dofs[None, :]
        self.data[cell_index] = local

    def tocsr(self) -> sparse.csr_matrix:
        return sparse.coo_matrix(
            (self.data.reshape(-1), (self.rows.reshape(-1), self.cols.reshape(-1))),
            shape=(self.n_dofs, self.n_dofs),
        ).tocsr()


def _check_dimensions(mesh: Mesh, dofmap: DofMap, problem: Optional[ProblemSpec]) -> None:
    if mesh.dimension != dofmap.kind.dimension or (
        problem is not None and problem.dimension != mesh.dimension
    ):
        raise DimensionMismatchError(
            f"Mesh ({mesh.dimension}-D), element ({dofmap.kind.tag}) and problem"
            f" ({getattr(problem, 'dimension', '-')}-D) dimensions disagree!"
        )


def _boundary_moment_load(
    dofmap: DofMap,
    element: BaseElement,
    problem: ProblemSpec,
    quadrature_degree: Optional[int],
) -> np.ndarray:
    """
    Natural auxiliary condition lap u = lap g: entry i = integral over the boundary of lap(g) d_n phi_i.
    """
    mesh = dofmap.mesh
    load = np.zeros(dofmap.n_dofs)
    if not problem.moment_consistent or problem.exact is None:
        return load

    if mesh.dimension == 1:
        for vertex, outward in ((0, -1.0), (mesh.n_vertices - 1, 1.0)):
            cell_index = 0 if vertex == 0 else mesh.n_cells - 1
            point = mesh.vertices[vertex : vertex + 1]
            basis = element.evaluate(mesh.cell_coordinates(cell_index), point)
            laplacian = problem.boundary_laplacian(point)
            dofs = dofmap.cell_dofs[cell_index]
            np.add.at(load, dofs, outward * laplacian[0] * basis.gradients[0, :, 0])
        return load

    rule = quadrature_rule(1, quadrature_degree or default_quadrature_degree(1))
    for edge in mesh.boundary_edges:
        cell_index = int(mesh.edge_cells[edge, 0])
        local_edge = int(np.flatnonzero(mesh.cell_edges[cell_index] == edge)[0])
        triangle = mesh.cell_coordinates(cell_index)
        a, b = LOCAL_EDGES[local_edge]
        points = triangle[a] + rule.points * (triangle[b] - triangle[a])
        weights = rule.weights * np.linalg.norm(triangle[b] - triangle[a])

        basis = element.evaluate(triangle, points)
        normal = outward_normals(triangle)[local_edge]
        normal_derivatives = (basis.gradients @ normal) * dofmap.cell_signs[cell_index]
        laplacian = evaluate_coefficient(
            "laplacian", problem.boundary_laplacian, points, cell_index
        )
        np.add.at(
            load,
            dofmap.cell_dofs[cell_index],
            np.einsum("q,q,qi->i", weights, laplacian, normal_derivatives),
        )
    return load


def assemble_blocks(
    mesh: Mesh,
    dofmap: DofMap,
    problem: ProblemSpec,
    *,
    quadrature_degree: Optional[int] = None,
    element: Optional[BaseElement] = None,
) -> OperatorBlocks:
    """
    Assembles B, N, F0 and F1 in a single pass over the cells.

    :param mesh: Mesh (must be the DOF map mesh).
    :param dofmap: DOF map.
    :param problem: Problem with coefficients and source.
    :param quadrature_degree: Exactness degree override.
    :param element: Element instance override.
    """
    _check_dimensions(mesh, dofmap, problem)
    element = build_element_instance(element or dofmap.kind)
    n_local = dofmap.kind.n_local_dofs
    biharmonic = _Accumulator(dofmap.n_dofs, mesh.n_cells, n_local)
    second_order = _Accumulator(dofmap.n_dofs, mesh.n_cells, n_local)
    load = np.zeros(dofmap.n_dofs)
    moment_load = np.zeros(dofmap.n_dofs)
    with_moment = problem.moment_consistent and problem.exact is not None

    for cell in iterate_cells(dofmap, element, quadrature_degree):
        laplacians = cell.laplacians
        biharmonic.add(
            cell.index,
            cell.dofs,
            np.einsum("q,qi,qj->ij", cell.weights, laplacians, laplacians),
        )

        A = evaluate_coefficient("A", problem.A, cell.points, cell.index)
        trial = -np.einsum("qde,qjde->qj", A, cell.hessians)
        if problem.b is not None:
            b = evaluate_coefficient("b", problem.b, cell.points, cell.index)
            trial = trial + np.einsum("qd,qjd->qj", b, cell.gradients)
        if problem.c is not None:
            c = evaluate_coefficient("c", problem.c, cell.points, cell.index)
            trial = trial + c[:, None] * cell.values
        second_order.add(
            cell.index,
            cell.dofs,
            np.einsum("q,qi,qj->ij", cell.weights, cell.values, trial),
        )

        f = evaluate_coefficient("f", problem.f, cell.points, cell.index)
        np.add.at(load, cell.dofs, np.einsum("q,q,qi->i", cell.weights, f, cell.values))
        if with_moment:
            bilaplacian = evaluate_coefficient(
                "bilaplacian", problem.exact.bilaplacian, cell.points, cell.index
            )
            np.add.at(
                moment_load,
                cell.dofs,
                np.einsum("q,q,qi->i", cell.weights, bilaplacian, cell.values),
            )

    moment_load += _boundary_moment_load(dofmap, element, problem, quadrature_degree)
    blocks = OperatorBlocks(
        biharmonic=biharmonic.tocsr(),
        second_order=second_order.tocsr(),
        load=load,
        moment_load=moment_load,
    )
    logger.info(
        "Assembled %s system: %d DOFs, %d nonzeros.",
        dofmap.kind.tag,
        dofmap.n_dofs,
        blocks.second_order.nnz,
    )
    return blocks


def assemble_operator(
    mesh: Mesh,
    dofmap: DofMap,
    problem: ProblemSpec,
    eps: float,
    *,
    quadrature_degree: Optional[int] = None,
) -> SparseSystem:
    """
    Operator matrix of the regularized form eps (lap w, lap v) - (A:D2w, v) + (b.grad w + c w, v).
    The returned system has a zero load.
    """
    if eps < 0:
        raise ConfigurationError(f"eps must be nonnegative, got {eps}!")
    blocks = assemble_blocks(mesh, dofmap, problem, quadrature_degree=quadrature_degree)
    return SparseSystem(matrix=blocks.operator(eps), load=np.zeros(dofmap.n_dofs))


def assemble_load(
    mesh: Mesh,
    dofmap: DofMap,
    problem: ProblemSpec,
    eps: float = 0.0,
    *,
    quadrature_degree: Optional[int] = None,
) -> np.ndarray:
    """
    Load vector (f, phi_i), plus the moment terms for eps > 0 when the problem carries them.
    """
    blocks = assemble_blocks(mesh, dofmap, problem, quadrature_degree=quadrature_degree)
    return blocks.load_vector(eps)


@dataclass(frozen=True)
class GramBlocks:
    """
    L2 mass, gradient, full Hessian and Laplacian Gram matrices.
    """

    mass: sparse.csr_matrix
    gradient: sparse.csr_matrix
    hessian: sparse.csr_matrix
    laplacian: sparse.csr_matrix

    def combine(self, kind: GramKind, eps: float = 0.0) -> sparse.csr_matrix:
        if kind is GramKind.L2:
            return self.mass.copy()
        if kind is GramKind.H1_SEMINORM:
            return self.gradient.copy()
        if kind is GramKind.H1:
            return (self.mass + self.gradient).tocsr()
        if kind is GramKind.H2:
            return (self.mass + self.gradient + self.hessian).tocsr()
        if eps == 0.0:
            return self.gradient.copy()
        return (eps * self.laplacian + self.gradient).tocsr()


def assemble_gram_blocks(
    dofmap: DofMap, *, quadrature_degree: Optional[int] = None
) -> GramBlocks:
    """
    Assembles all Gram blocks in a single pass.
    """
    element = build_element_instance(dofmap.kind)
    n_local = dofmap.kind.n_local_dofs
    n_cells = dofmap.mesh.n_cells
    accumulators = {
        name: _Accumulator(dofmap.n_dofs, n_cells, n_local)
        for name in ("mass", "gradient", "hessian", "laplacian")
    }
    for cell in iterate_cells(dofmap, element, quadrature_degree):
        w = cell.weights
        accumulators["mass"].add(
            cell.index, cell.dofs, np.einsum("q,qi,qj->ij", w, cell.values, cell.values)
        )
        accumulators["gradient"].add(
            cell.index,
            cell.dofs,
            np.einsum("q,qid,qjd->ij", w, cell.gradients, cell.gradients),
        )
        accumulators["hessian"].add(
            cell.index,
            cell.dofs,
            np.einsum("q,qide,qjde->ij", w, cell.hessians, cell.hessians),
        )
        laplacians = cell.laplacians
        accumulators["laplacian"].add(
            cell.index, cell.dofs, np.einsum("q,qi,qj->ij", w, laplacians, laplacians)
        )
    return GramBlocks(**{name: acc.tocsr() for name, acc in accumulators.items()})


def assemble_gram(
    mesh: Mesh,
    dofmap: DofMap,
    kind: GramKind,
    eps: float = 0.0,
    *,
    quadrature_degree: Optional[int] = None,
) -> sparse.csr_matrix:
    """
    Gram matrix of the requested inner product on the finite element space.

    :param mesh: Mesh (must be the DOF map mesh).
    :param dofmap: DOF map.
    :param kind: Inner product.
    :param eps: Weight of the Laplacian block for GramKind.ENERGY.
    """
    _check_dimensions(mesh, dofmap, None)
    return assemble_gram_blocks(dofmap, quadrature_degree=quadrature_degree).combine(kind, eps)


def constrained_dofs(dofmap: DofMap, aux_bc: str = AUX_BC_SIMPLY_SUPPORTED) -> np.ndarray:
    """
    DOFs fixed by essential conditions: the boundary trace DOFs, plus boundary normal derivatives when clamped.
    """
    if aux_bc not in AUX_BC_CHOICES:
        raise ConfigurationError(
            f"Unknown auxiliary boundary condition {aux_bc!r}, expected one of {AUX_BC_CHOICES}!"
        )
    if aux_bc == AUX_BC_CLAMPED:
        return np.union1d(dofmap.boundary_trace_dofs, dofmap.boundary_normal_dofs)
    return np.asarray(dofmap.boundary_trace_dofs)


def boundary_values(dofmap: DofMap, problem: ProblemSpec) -> np.ndarray:
    """
    Global vector carrying interpolated boundary data (all DOFs, only constrained ones are used).
    """
    if problem.exact is None:
        if problem.homogeneous_boundary:
            return np.zeros(dofmap.n_dofs)
        raise MissingBoundaryDataError(
            f"Problem {problem.name!r} has no exact solution bundle to take boundary derivatives from!"
        )
    exact = problem.exact
    with np.errstate(all="ignore"):
        values = interpolate(dofmap, exact.value, exact.gradient, exact.hessian)
    return values


def apply_boundary_conditions(
    system: SparseSystem,
    dofmap: DofMap,
    problem: ProblemSpec,
    *,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
) -> SparseSystem:
    """
    Imposes u = g (and d_n u = d_n g when clamped) by row replacement and column elimination.

    Constrained rows become identity rows with the prescribed value on the right hand side;
    known values are moved to the load so the remaining operator acts on free DOFs only.
    """
    constrained = constrained_dofs(dofmap, aux_bc)
    g_full = boundary_values(dofmap, problem)
    prescribed = g_full[constrained]
    if not np.all(np.isfinite(prescribed)):
        raise MissingBoundaryDataError(
            f"Boundary data of {problem.name!r} is not finite at {int(np.count_nonzero(~np.isfinite(prescribed)))} constrained DOF(s)!"
        )

    g = np.zeros(dofmap.n_dofs)
    g[constrained] = prescribed
    load = system.load - system.matrix @ g

    is_free = np.ones(dofmap.n_dofs)
    is_free[constrained] = 0.0
    free = sparse.diags(is_free)
    matrix = (free @ system.matrix @ free + sparse.diags(1.0 - is_free)).tocsr()
    matrix.sort_indices()
    load[constrained] = prescribed

    logger.debug(
        "Applied %d essential constraint(s) (%s auxiliary condition).",
        constrained.size,
        aux_bc,
    )
    return replace(
        system,
        matrix=matrix,
        load=load,
        constrained=constrained,
        prescribed=prescribed,
    )


__all__ = [
    "GramKind",
    "SparseSystem",
    "OperatorBlocks",
    "GramBlocks",
    "CellData",
    "iterate_cells",
    "assemble_blocks",
    "assemble_operator",
    "assemble_load",
    "assemble_gram",
    "assemble_gram_blocks",
    "constrained_dofs",
    "boundary_values",
    "apply_boundary_conditions",
]
