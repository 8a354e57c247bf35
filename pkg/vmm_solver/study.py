"""
    End-to-end regularized solves, error norms and eps / h convergence studies.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from vmm_solver.assembly import (
    OperatorBlocks,
    apply_boundary_conditions,
    assemble_blocks,
    iterate_cells,
)
from vmm_solver.consts import AUX_BC_SIMPLY_SUPPORTED
from vmm_solver.exceptions import ConfigurationError, VmmError
from vmm_solver.fem import (
    BaseElement,
    DofMap,
    ElementKind,
    build_dof_map,
    build_element_instance,
    evaluate_coefficients,
)
from vmm_solver.linalg import SolveReport, solve_linear
from vmm_solver.mesh import Mesh
from vmm_solver.problems.spec import ExactBundle, ProblemSpec
from vmm_solver.utils import resolve_thread_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Discretization:
    """
    eps independent part of a solve: mesh, DOF map, element and assembled blocks.
    """

    problem: ProblemSpec
    mesh: Mesh
    dofmap: DofMap
    element: BaseElement
    blocks: OperatorBlocks
    quadrature_degree: Optional[int] = None


def discretize(
    problem: ProblemSpec, mesh: Mesh, *, quadrature_degree: Optional[int] = None
) -> Discretization:
    """
    Builds the DOF map and assembles the operator blocks once for reuse across eps.
    """
    kind = ElementKind.for_dimension(mesh.dimension)
    dofmap = build_dof_map(mesh, kind)
    blocks = assemble_blocks(mesh, dofmap, problem, quadrature_degree=quadrature_degree)
    return Discretization(
        problem=problem,
        mesh=mesh,
        dofmap=dofmap,
        element=build_element_instance(kind),
        blocks=blocks,
        quadrature_degree=quadrature_degree,
    )


@dataclass(frozen=True)
class SolutionField:
    """
    Finite element solution u_h for one eps.
    """

    dofmap: DofMap
    element: BaseElement
    coefficients: np.ndarray
    eps: float
    report: SolveReport

    @property
    def mesh(self) -> Mesh:
        return self.dofmap.mesh

    def evaluate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Values, gradients and Hessians at physical points (NaN outside the mesh).
        """
        values, gradients, hessians, _ = evaluate_coefficients(
            self.dofmap, self.element, self.coefficients, points
        )
        return values, gradients, hessians


def solve_vmm(
    problem: ProblemSpec,
    mesh: Mesh,
    eps: float,
    *,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
    quadrature_degree: Optional[int] = None,
    discretization: Optional[Discretization] = None,
) -> SolutionField:
    """
    Assembles, constrains and solves the regularized problem.
    A singular system is not an error: the field carries the singular flag.

    :param problem: Problem to solve.
    :param mesh: Mesh of the problem domain.
    :param eps: Regularization parameter (0 allowed).
    :param aux_bc: Auxiliary boundary condition (simply supported or clamped).
    :param quadrature_degree: Exactness degree override.
    :param discretization: Previously assembled discretization of the same problem and mesh.
    """
    if eps < 0:
        raise ConfigurationError(f"eps must be nonnegative, got {eps}!")
    if discretization is None:
        discretization = discretize(problem, mesh, quadrature_degree=quadrature_degree)

    system = apply_boundary_conditions(
        discretization.blocks.system(eps), discretization.dofmap, problem, aux_bc=aux_bc
    )
    coefficients, report = solve_linear(system)
    return SolutionField(
        dofmap=discretization.dofmap,
        element=discretization.element,
        coefficients=coefficients,
        eps=float(eps),
        report=report,
    )


@dataclass(frozen=True)
class ErrorNorms:
    """
    L2, H1 seminorm, Laplacian and energy norm errors.
    """

    l2: float
    h1: float
    lap: float
    energy: float

    def __iter__(self):
        # Unpacks as (L2, H1 seminorm, Lap).
        return iter((self.l2, self.h1, self.lap))


def error_norms(
    solution: SolutionField,
    exact: ExactBundle,
    *,
    quadrature_degree: Optional[int] = None,
) -> ErrorNorms:
    """
    Cellwise quadrature of (u_h - u)^2, |grad(u_h - u)|^2 and (lap u_h - lap u)^2.
    The Laplacian of u_h is evaluated per cell (broken).

    :param solution: Finite element solution.
    :param exact: Exact solution bundle.
    """
    squares = np.zeros(3)
    coefficients = solution.coefficients
    for cell in iterate_cells(solution.dofmap, solution.element, quadrature_degree):
        local = coefficients[cell.dofs]
        value_error = cell.values @ local - exact.value(cell.points)
        gradient_error = np.einsum("qkd,k->qd", cell.gradients, local) - exact.gradient(
            cell.points
        ).reshape(-1, solution.mesh.dimension)
        laplacian_error = cell.laplacians @ local - exact.laplacian(cell.points)
        squares += (
            cell.weights @ value_error**2,
            cell.weights @ np.sum(gradient_error**2, axis=1),
            cell.weights @ laplacian_error**2,
        )

    l2, h1, lap = np.sqrt(squares)
    energy = math.sqrt(solution.eps * lap**2 + h1**2) if np.isfinite(lap) else float("nan")
    return ErrorNorms(l2=float(l2), h1=float(h1), lap=float(lap), energy=float(energy))


def h2_norm(solution: SolutionField, *, quadrature_degree: Optional[int] = None) -> float:
    """
    Full H2 norm of the finite element solution.
    """
    total = 0.0
    coefficients = solution.coefficients
    for cell in iterate_cells(solution.dofmap, solution.element, quadrature_degree):
        local = coefficients[cell.dofs]
        values = cell.values @ local
        gradients = np.einsum("qkd,k->qd", cell.gradients, local)
        hessians = np.einsum("qkde,k->qde", cell.hessians, local)
        total += cell.weights @ (
            values**2 + np.sum(gradients**2, axis=1) + np.sum(hessians**2, axis=(1, 2))
        )
    return float(np.sqrt(total))


def source_l2_norm(
    problem: ProblemSpec, dofmap: DofMap, eps: float, *, quadrature_degree: Optional[int] = None
) -> float:
    total = 0.0
    element = build_element_instance(dofmap.kind)
    for cell in iterate_cells(dofmap, element, quadrature_degree):
        total += cell.weights @ problem.source(cell.points, eps) ** 2
    return float(np.sqrt(total))


SCHEDULE_KINDS = ("eps", "coupled", "h")


@dataclass(frozen=True)
class Schedule:
    """
    Sequence of (eps, mesh level) pairs of a convergence study.

    kind "eps": eps values on one fixed mesh, orders against eps.
    kind "coupled": eps = h^beta over a mesh sequence, orders against h.
    kind "h": fixed eps over a mesh sequence, orders against h.
    `extra_eps` rows are solved after the main schedule on the last mesh and carry no order.
    """

    kind: str
    eps_values: Tuple[float, ...] = ()
    levels: Tuple[int, ...] = ()
    beta: Optional[float] = None
    extra_eps: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ConfigurationError(f"Unknown schedule kind {self.kind!r}!")

    @classmethod
    def eps_halving(cls, start: float, halvings: int, extra_eps: Sequence[float] = ()) -> "Schedule":
        values = tuple(start / 2.0**k for k in range(int(halvings) + 1))
        return cls(kind="eps", eps_values=values, extra_eps=tuple(extra_eps))

    @classmethod
    def eps_list(cls, values: Sequence[float], extra_eps: Sequence[float] = ()) -> "Schedule":
        return cls(kind="eps", eps_values=tuple(float(v) for v in values), extra_eps=tuple(extra_eps))

    @classmethod
    def coupled(cls, beta: float, levels: Sequence[int]) -> "Schedule":
        return cls(kind="coupled", beta=float(beta), levels=tuple(int(n) for n in levels))

    @classmethod
    def h_refinement(cls, levels: Sequence[int], eps: float) -> "Schedule":
        return cls(kind="h", eps_values=(float(eps),), levels=tuple(int(n) for n in levels))

    @property
    def order_parameter(self) -> str:
        return "eps" if self.kind == "eps" else "h"

    @property
    def n_points(self) -> int:
        return len(self.eps_values) if self.kind == "eps" else len(self.levels)

    def describe(self) -> str:
        if self.kind == "eps":
            return f"eps schedule {list(self.eps_values)} on a fixed mesh"
        if self.kind == "coupled":
            return f"coupled eps = h^{self.beta} over levels {list(self.levels)}"
        return f"fixed eps = {self.eps_values[0]} over levels {list(self.levels)}"


@dataclass(frozen=True)
class TableRow:
    eps: float
    h: float
    l2_err: float
    l2_order: Optional[float]
    h1_err: float
    h1_order: Optional[float]
    lap_err: float
    lap_order: Optional[float]
    energy_err: float = float("nan")
    # ||u_h||_H2 / ||f||_L2, not written to the CSV.
    h2_ratio: float = float("nan")
    singular: bool = False
    n_dofs: int = 0
    extra: bool = False
    failure: Optional[str] = None


@dataclass(frozen=True)
class ConvergenceTable:
    rows: List[TableRow]
    schedule: Optional[Schedule] = None
    problem_name: str = ""
    notes: List[str] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(row, name) for row in self.rows], dtype=float)


def compute_orders(errors: Sequence[float], parameters: Sequence[float]) -> List[Optional[float]]:
    """
    order_k = log(e_{k-1} / e_k) / log(p_{k-1} / p_k), None for the first entry.
    Undefined quotients (nonpositive or non finite values) give NaN.
    """
    if len(errors) != len(parameters):
        raise ConfigurationError("Errors and parameters must have the same length!")
    orders: List[Optional[float]] = [None] * min(1, len(errors))
    for k in range(1, len(errors)):
        e_prev, e_curr = errors[k - 1], errors[k]
        p_prev, p_curr = parameters[k - 1], parameters[k]
        defined = all(
            np.isfinite(v) and v > 0 for v in (e_prev, e_curr, p_prev, p_curr)
        ) and p_prev != p_curr
        if not defined:
            orders.append(float("nan"))
        elif e_prev == e_curr:
            orders.append(0.0)
        else:
            orders.append(math.log(e_prev / e_curr) / math.log(p_prev / p_curr))
    return orders


def _evaluate_row(
    discretization: Discretization, eps: float, aux_bc: str, extra: bool = False
) -> TableRow:
    problem = discretization.problem
    mesh = discretization.mesh
    n_dofs = discretization.dofmap.n_dofs
    try:
        solution = solve_vmm(
            problem,
            mesh,
            eps,
            aux_bc=aux_bc,
            quadrature_degree=discretization.quadrature_degree,
            discretization=discretization,
        )
        errors = error_norms(
            solution, problem.exact, quadrature_degree=discretization.quadrature_degree
        )
        source_norm = source_l2_norm(
            problem, discretization.dofmap, eps, quadrature_degree=discretization.quadrature_degree
        )
        ratio = (
            h2_norm(solution, quadrature_degree=discretization.quadrature_degree) / source_norm
            if source_norm > 0
            else float("nan")
        )
    except VmmError as row_error:
        logger.warning("Row eps=%g h=%g failed: %s", eps, mesh.h, row_error)
        nan = float("nan")
        return TableRow(
            eps=float(eps),
            h=float(mesh.h),
            l2_err=nan,
            l2_order=None,
            h1_err=nan,
            h1_order=None,
            lap_err=nan,
            lap_order=None,
            singular=True,
            n_dofs=n_dofs,
            extra=extra,
            failure=str(row_error),
        )

    row = TableRow(
        eps=float(eps),
        h=float(mesh.h),
        l2_err=errors.l2,
        l2_order=None,
        h1_err=errors.h1,
        h1_order=None,
        lap_err=errors.lap,
        lap_order=None,
        energy_err=errors.energy,
        h2_ratio=ratio,
        singular=solution.report.singular,
        n_dofs=n_dofs,
        extra=extra,
    )
    logger.info(
        "eps=%g h=%.4g: L2 %.3e, H1 %.3e, Lap %.3e%s",
        eps,
        mesh.h,
        row.l2_err,
        row.h1_err,
        row.lap_err,
        " (singular)" if row.singular else "",
    )
    return row


def _with_orders(rows: List[TableRow], parameter: str) -> List[TableRow]:
    main = [row for row in rows if not row.extra]
    parameters = [getattr(row, parameter) for row in main]
    orders = {
        name: compute_orders([getattr(row, f"{name}_err") for row in main], parameters)
        for name in ("l2", "h1", "lap")
    }
    result = []
    for index, row in enumerate(main):
        result.append(
            replace(
                row,
                l2_order=orders["l2"][index],
                h1_order=orders["h1"][index],
                lap_order=orders["lap"][index],
            )
        )
    return result + [row for row in rows if row.extra]


def convergence_study(
    problem: ProblemSpec,
    schedule: Schedule,
    meshes: Union[Mesh, Sequence[Mesh], None] = None,
    *,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
    quadrature_degree: Optional[int] = None,
    threads: Optional[int] = None,
    n_boundary: int = 8,
) -> ConvergenceTable:
    """
    Runs a convergence study. Rows follow the schedule order; failed rows are recorded, not raised.

    :param problem: Problem with an exact solution bundle.
    :param schedule: eps / mesh schedule.
    :param meshes: Fixed mesh for "eps" schedules, mesh sequence for the others.
        When omitted, meshes are built from the schedule levels on the problem domain.
    :param threads: Worker count (defaults to the thread count environment variable).
    """
    if problem.exact is None:
        raise ConfigurationError(f"Problem {problem.name!r} has no exact solution to measure errors!")
    if schedule.n_points < 2:
        raise ConfigurationError("A convergence study needs at least 2 schedule points!")
    workers = resolve_thread_count(threads)

    if schedule.kind == "eps":
        if meshes is None or not isinstance(meshes, Mesh):
            raise ConfigurationError("An eps schedule needs exactly one fixed mesh!")
        discretization = discretize(problem, meshes, quadrature_degree=quadrature_degree)
        tasks = [(discretization, eps, False) for eps in schedule.eps_values]
        tasks += [(discretization, eps, True) for eps in schedule.extra_eps]
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(
                executor.map(lambda task: _evaluate_row(task[0], task[1], aux_bc, task[2]), tasks)
            )
    else:
        if meshes is None:
            meshes = [
                problem.domain.build_mesh(n, n_boundary=n_boundary) for n in schedule.levels
            ]
        elif isinstance(meshes, Mesh):
            raise ConfigurationError(f"A {schedule.kind} schedule needs a mesh sequence!")
        meshes = list(meshes)
        if len(meshes) != len(schedule.levels) and schedule.levels:
            raise ConfigurationError("Mesh sequence and schedule levels differ in length!")

        def run_level(mesh: Mesh) -> TableRow:
            eps = mesh.h**schedule.beta if schedule.kind == "coupled" else schedule.eps_values[0]
            level = discretize(problem, mesh, quadrature_degree=quadrature_degree)
            return _evaluate_row(level, eps, aux_bc)

        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(run_level, meshes))

    table = ConvergenceTable(
        rows=_with_orders(rows, schedule.order_parameter),
        schedule=schedule,
        problem_name=problem.name,
    )
    logger.info("Convergence study of %s finished (%s).", problem.name, schedule.describe())
    return table


def stability_spread(table: ConvergenceTable) -> float:
    """
    max / min of ||u_h||_H2 / ||f||_L2 over the non singular rows.
    """
    ratios = np.array(
        [row.h2_ratio for row in table.rows if not row.singular and np.isfinite(row.h2_ratio)]
    )
    if ratios.size == 0 or ratios.min() <= 0:
        return float("nan")
    return float(ratios.max() / ratios.min())


__all__ = [
    "Discretization",
    "discretize",
    "SolutionField",
    "ErrorNorms",
    "Schedule",
    "TableRow",
    "ConvergenceTable",
    "solve_vmm",
    "error_norms",
    "h2_norm",
    "source_l2_norm",
    "convergence_study",
    "compute_orders",
    "stability_spread",
]
