"""
    Discrete stability diagnostics: discrete dual norms and discrete Calderon-Zygmund constants.

    All computations are dense on the free subspace (DOFs not fixed by essential conditions)
    and restricted to small meshes.
"""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from vmm_solver.assembly import assemble_gram_blocks, constrained_dofs, iterate_cells
from vmm_solver.consts import (
    AUX_BC_SIMPLY_SUPPORTED,
    CZ_UNIFORMITY_MIN_RATIO,
    DIAGNOSTICS_DEFAULT_DENSE_CEILING,
)
from vmm_solver.exceptions import ConfigurationError, DiagnosticCeilingError, GramFactorizationError
from vmm_solver.fem import DofMap, build_element_instance
from vmm_solver.internal.files import atomic_write_text
from vmm_solver.linalg import generalized_symmetric_smallest_eig
from vmm_solver.mesh import Mesh
from vmm_solver.problems.spec import ProblemSpec
from vmm_solver.study import SolutionField, discretize
from vmm_solver.utils import resolve_thread_count

logger = logging.getLogger(__name__)

DUAL_NORM_KINDS = ("L2h", "Hm2h")


@dataclass(frozen=True)
class CZReport:
    """
    Discrete Calderon-Zygmund constant of one (mesh, eps) pair.
    `mode` holds the full coefficient vector of the minimizing function (zero on constrained DOFs).
    """

    eps: float
    h: float
    n_dofs: int
    c_h: float
    adjoint: bool
    mode: np.ndarray = field(repr=False, compare=False, default=None)


@dataclass(frozen=True)
class CZOperators:
    """
    Dense operator and Gram matrices restricted to the free subspace.
    """

    eps: float
    h: float
    free: np.ndarray
    n_dofs: int
    operator: np.ndarray  # K_ff
    mass: np.ndarray  # L2 Gram M_ff
    h2_gram: np.ndarray  # full H2 Gram H_ff


def _check_ceiling(n_dofs: int, ceiling: int) -> None:
    if n_dofs > ceiling:
        raise DiagnosticCeilingError(
            f"Dense diagnostic needs {n_dofs} DOFs, above the ceiling of {ceiling}!",
            n_dofs=n_dofs,
            ceiling=ceiling,
        )


def _cho_factor(matrix: np.ndarray, name: str):
    try:
        return scipy.linalg.cho_factor(matrix, lower=True)
    except np.linalg.LinAlgError as factor_error:
        raise GramFactorizationError(
            f"{name} Gram matrix is not positive definite on the free subspace: {factor_error}"
        ) from factor_error


def _dense_free_block(matrix, free: np.ndarray) -> np.ndarray:
    return matrix[free][:, free].toarray()


def _load_against_basis(
    dofmap: DofMap, v: Union[SolutionField, Callable], quadrature_degree: Optional[int]
) -> np.ndarray:
    """
    r_i = (v, phi_i) by quadrature.
    """
    element = build_element_instance(dofmap.kind)
    load = np.zeros(dofmap.n_dofs)
    for cell in iterate_cells(dofmap, element, quadrature_degree):
        if isinstance(v, SolutionField):
            values = cell.values @ v.coefficients[cell.dofs]
        else:
            values = np.asarray(v(cell.points), dtype=float)
        np.add.at(load, cell.dofs, np.einsum("q,q,qi->i", cell.weights, values, cell.values))
    return load


def discrete_dual_norm(
    v: Union[SolutionField, Callable[[np.ndarray], np.ndarray]],
    mesh: Mesh,
    dofmap: DofMap,
    kind: str,
    *,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
    ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING,
    quadrature_degree: Optional[int] = None,
) -> float:
    """
    Discrete dual norm of v over the free subspace.

    L2h:  sup (v, w_h) / ||w_h||_L2  = sqrt(r^T M^-1 r)
    Hm2h: sup (v, w_h) / ||w_h||_H2  = sqrt(r^T H^-1 r)
    with r_i = (v, phi_i) over free DOFs.

    :param v: Finite element function or scalar field evaluator.
    :param mesh: Mesh (must be the DOF map mesh).
    :param dofmap: DOF map.
    :param kind: "L2h" or "Hm2h".
    """
    if kind not in DUAL_NORM_KINDS:
        raise ConfigurationError(f"Unknown dual norm {kind!r}, expected one of {DUAL_NORM_KINDS}!")
    if mesh.dimension != dofmap.mesh.dimension:
        raise ConfigurationError("Mesh and DOF map disagree!")
    _check_ceiling(dofmap.n_dofs, ceiling)

    free = dofmap.free_dofs(constrained_dofs(dofmap, aux_bc))
    load = _load_against_basis(dofmap, v, quadrature_degree)[free]
    blocks = assemble_gram_blocks(dofmap, quadrature_degree=quadrature_degree)
    if kind == "L2h":
        gram = _dense_free_block(blocks.mass, free)
    else:
        gram = _dense_free_block(blocks.mass + blocks.gradient + blocks.hessian, free)

    factor = _cho_factor(gram, "L2" if kind == "L2h" else "H2")
    value = float(load @ scipy.linalg.cho_solve(factor, load))
    return float(np.sqrt(max(value, 0.0)))


def cz_operators(
    problem: ProblemSpec,
    mesh: Mesh,
    eps: float,
    *,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
    ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING,
    quadrature_degree: Optional[int] = None,
) -> CZOperators:
    """
    Assembles the dense free-subspace matrices used by the Calderon-Zygmund probes.
    """
    discretization = discretize(problem, mesh, quadrature_degree=quadrature_degree)
    dofmap = discretization.dofmap
    _check_ceiling(dofmap.n_dofs, ceiling)

    free = dofmap.free_dofs(constrained_dofs(dofmap, aux_bc))
    grams = assemble_gram_blocks(dofmap, quadrature_degree=quadrature_degree)
    return CZOperators(
        eps=float(eps),
        h=float(mesh.h),
        free=free,
        n_dofs=dofmap.n_dofs,
        operator=_dense_free_block(discretization.blocks.operator(eps), free),
        mass=_dense_free_block(grams.mass, free),
        h2_gram=_dense_free_block(grams.mass + grams.gradient + grams.hessian, free),
    )


def _cz_pencil(operators: CZOperators, adjoint: bool):
    """
    (numerator, denominator) matrices of the squared Rayleigh quotient.
    Primal: K^T M^-1 K over H. Adjoint: K H^-1 K^T over M.
    """
    K = operators.operator
    if adjoint:
        factor = _cho_factor(operators.h2_gram, "H2")
        return K @ scipy.linalg.cho_solve(factor, K.T), operators.mass
    factor = _cho_factor(operators.mass, "L2")
    return K.T @ scipy.linalg.cho_solve(factor, K), operators.h2_gram


def rayleigh_quotient(operators: CZOperators, coefficients: np.ndarray, adjoint: bool = False) -> float:
    """
    ||L_h v||_L2h / ||v||_H2 (primal) or ||L_h^* v||_Hm2h / ||v||_L2 (adjoint) of a function
    given by its full or free coefficient vector.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.size == operators.n_dofs:
        coefficients = coefficients[operators.free]
    K = operators.operator
    if adjoint:
        image = K.T @ coefficients
        numerator = image @ scipy.linalg.cho_solve(_cho_factor(operators.h2_gram, "H2"), image)
        denominator = coefficients @ operators.mass @ coefficients
    else:
        image = K @ coefficients
        numerator = image @ scipy.linalg.cho_solve(_cho_factor(operators.mass, "L2"), image)
        denominator = coefficients @ operators.h2_gram @ coefficients
    return float(np.sqrt(max(numerator, 0.0) / denominator))


def discrete_cz_constant(
    problem: ProblemSpec,
    mesh: Mesh,
    eps: float,
    adjoint: bool = False,
    *,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
    ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING,
    quadrature_degree: Optional[int] = None,
) -> CZReport:
    """
    c_h = min over v_h of ||L_h v_h||_L2h / ||v_h||_H2, or the adjoint constant
    min ||L_h^* v_h||_Hm2h / ||v_h||_L2, as the square root of a smallest generalized eigenvalue.

    :param problem: Problem providing the coefficients.
    :param mesh: Small mesh (DOF count under the ceiling).
    :param eps: Regularization parameter.
    :param adjoint: Probe the adjoint operator.
    """
    operators = cz_operators(
        problem, mesh, eps, aux_bc=aux_bc, ceiling=ceiling, quadrature_degree=quadrature_degree
    )
    numerator, denominator = _cz_pencil(operators, adjoint)
    value, vector = generalized_symmetric_smallest_eig(numerator, denominator)

    mode = np.zeros(operators.n_dofs)
    mode[operators.free] = vector
    report = CZReport(
        eps=float(eps),
        h=float(mesh.h),
        n_dofs=operators.n_dofs,
        c_h=float(np.sqrt(max(value, 0.0))),
        adjoint=bool(adjoint),
        mode=mode,
    )
    logger.info(
        "CZ constant%s: eps=%g h=%.4g DOFs=%d c_h=%.6g",
        " (adjoint)" if adjoint else "",
        eps,
        mesh.h,
        operators.n_dofs,
        report.c_h,
    )
    return report


@dataclass(frozen=True)
class UniformityReport:
    """
    CZ constants over refinement levels with eps = h^beta.
    """

    reports: List[CZReport]
    ratio: float
    passed: bool
    archived: Optional[List[float]] = None


def cz_uniformity_probe(
    problem: ProblemSpec,
    levels: Sequence[int] = (8, 16, 32, 64),
    *,
    beta: float = 2.0,
    adjoint: bool = False,
    min_ratio: float = CZ_UNIFORMITY_MIN_RATIO,
    archive_path: Optional[str] = None,
    threads: Optional[int] = None,
    n_boundary: int = 8,
    ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING,
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
    quadrature_degree: Optional[int] = None,
) -> UniformityReport:
    """
    Computes c_h over mesh levels with eps = h^beta and reports min / max.
    A ratio below `min_ratio` is reported (warning), never raised.

    When `archive_path` is given, values are written there on first computation and the
    previously archived values are returned in `archived` on later runs.
    """
    if len(levels) < 3:
        raise ConfigurationError("The uniformity probe needs at least 3 refinement levels!")

    def run_level(n: int) -> CZReport:
        mesh = problem.domain.build_mesh(n, n_boundary=n_boundary)
        return discrete_cz_constant(
            problem,
            mesh,
            mesh.h**beta,
            adjoint,
            aux_bc=aux_bc,
            ceiling=ceiling,
            quadrature_degree=quadrature_degree,
        )

    with ThreadPoolExecutor(max_workers=resolve_thread_count(threads)) as executor:
        reports = list(executor.map(run_level, levels))

    constants = np.array([report.c_h for report in reports])
    ratio = float(constants.min() / constants.max()) if constants.max() > 0 else 0.0
    passed = bool(np.all(constants > 0) and ratio >= min_ratio)
    if not passed:
        logger.warning(
            "CZ uniformity probe failed for %s: min/max ratio %.3g (bound %.3g).",
            problem.name,
            ratio,
            min_ratio,
        )

    archived = None
    if archive_path is not None:
        archived = _archive_constants(archive_path, problem.name, list(levels), beta, reports)
    return UniformityReport(reports=reports, ratio=ratio, passed=passed, archived=archived)


def _archive_constants(
    path: str, name: str, levels: List[int], beta: float, reports: List[CZReport]
) -> Optional[List[float]]:
    key = f"{name}:beta={beta}:levels={','.join(str(n) for n in levels)}"
    archive = {}
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as stream:
            archive = json.load(stream)
        if key in archive:
            return [float(value) for value in archive[key]["c_h"]]

    archive[key] = {
        "h": [report.h for report in reports],
        "eps": [report.eps for report in reports],
        "c_h": [report.c_h for report in reports],
    }
    atomic_write_text(path, lambda stream: json.dump(archive, stream, indent=2, sort_keys=True))
    logger.info("Archived CZ constants of %s to %s.", name, path)
    return None


__all__ = [
    "CZReport",
    "CZOperators",
    "UniformityReport",
    "discrete_dual_norm",
    "cz_operators",
    "rayleigh_quotient",
    "discrete_cz_constant",
    "cz_uniformity_probe",
]
