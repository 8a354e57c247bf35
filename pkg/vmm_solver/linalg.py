"""
    Linear algebra: direct sparse solves of the nonsymmetric system and dense symmetric eigensolves.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse.csgraph import reverse_cuthill_mckee
from scipy.sparse.linalg import splu

from vmm_solver.assembly import SparseSystem
from vmm_solver.consts import EIGEN_NEGATIVE_TOLERANCE, SOLVER_RESIDUAL_TOLERANCE
from vmm_solver.exceptions import DimensionMismatchError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveReport:
    """
    Outcome of a direct solve. The residual is recomputed from the unfactored system.
    """

    residual: float
    pivot_growth: float
    singular: bool
    n_dofs: int = 0
    factor_nnz: int = 0


def fill_reducing_permutation(matrix: sparse.spmatrix) -> np.ndarray:
    """
    Reverse Cuthill-McKee ordering of the symmetrized sparsity pattern.
    """
    pattern = abs(matrix) + abs(matrix).T
    return np.asarray(
        reverse_cuthill_mckee(sparse.csr_matrix(pattern), symmetric_mode=True), dtype=np.int64
    )


def _relative_residual(matrix, solution: np.ndarray, load: np.ndarray) -> float:
    residual = np.linalg.norm(matrix @ solution - load)
    scale = np.linalg.norm(load)
    return float(residual / scale) if scale > 0 else float(residual)


def solve_linear(
    system: SparseSystem, *, tolerance: float = SOLVER_RESIDUAL_TOLERANCE
) -> Tuple[np.ndarray, SolveReport]:
    """
    Solves K x = F by sparse LU with partial pivoting after reverse Cuthill-McKee reordering,
    followed by one step of iterative refinement.

    Singular systems are reported through `SolveReport.singular` (the solution is then NaN
    when no factorization exists).

    :param system: System with constraints already applied.
    :param tolerance: Relative residual above which the solve is flagged singular.
    """
    matrix = sparse.csr_matrix(system.matrix)
    load = np.asarray(system.load, dtype=float)
    n_dofs = matrix.shape[0]
    if matrix.shape != (n_dofs, n_dofs) or load.shape != (n_dofs,):
        raise DimensionMismatchError(
            f"System shapes disagree: matrix {matrix.shape}, load {load.shape}!"
        )

    permutation = fill_reducing_permutation(matrix)
    permuted = matrix[permutation][:, permutation].tocsc()
    try:
        factorization = splu(permuted, permc_spec="NATURAL", diag_pivot_thresh=1.0)
    except RuntimeError as factor_error:
        logger.warning("Factorization failed (%s); system is singular.", factor_error)
        report = SolveReport(
            residual=float("inf"),
            pivot_growth=float("inf"),
            singular=True,
            n_dofs=n_dofs,
        )
        return np.full(n_dofs, np.nan), report

    permuted_load = load[permutation]
    with np.errstate(all="ignore"):
        permuted_solution = factorization.solve(permuted_load)
        correction = factorization.solve(permuted_load - permuted @ permuted_solution)
        permuted_solution = permuted_solution + correction

    solution = np.empty(n_dofs)
    solution[permutation] = permuted_solution

    with np.errstate(all="ignore"):
        residual = _relative_residual(matrix, solution, load)
    matrix_scale = np.abs(permuted.data).max() if permuted.nnz else 1.0
    upper = factorization.U
    pivot_growth = float(np.abs(upper.data).max() / matrix_scale) if upper.nnz else 0.0
    singular = bool(not np.all(np.isfinite(solution)) or not residual <= tolerance)

    report = SolveReport(
        residual=residual,
        pivot_growth=pivot_growth,
        singular=singular,
        n_dofs=n_dofs,
        factor_nnz=int(factorization.L.nnz + upper.nnz),
    )
    if singular:
        logger.warning(
            "Solve flagged singular: relative residual %.3e (tolerance %.1e).",
            residual,
            tolerance,
        )
    else:
        logger.info(
            "Solved %d DOFs: relative residual %.3e, pivot growth %.3e.",
            n_dofs,
            residual,
            pivot_growth,
        )
    return solution, report


def _dense(matrix) -> np.ndarray:
    if sparse.issparse(matrix):
        return matrix.toarray()
    return np.array(matrix, dtype=float)


def generalized_symmetric_smallest_eig(A, B) -> Tuple[float, np.ndarray]:
    """
    Smallest eigenpair of A x = lambda B x for symmetric PSD A and symmetric PD B.

    Reduced to the standard problem L^-1 A L^-T y = lambda y with B = L L^T.
    The eigenvector is B-normalized (x^T B x = 1) with its largest entry positive.

    :param A: Symmetric positive semidefinite matrix (dense or sparse).
    :param B: Symmetric positive definite matrix of the same size.
    """
    A = _dense(A)
    B = _dense(B)
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise DimensionMismatchError(f"Matrix shapes disagree: {A.shape} and {B.shape}!")

    try:
        lower = scipy.linalg.cholesky(0.5 * (B + B.T), lower=True)
    except np.linalg.LinAlgError as cholesky_error:
        raise NotPositiveDefiniteError(
            f"Right hand side matrix is not positive definite: {cholesky_error}"
        ) from cholesky_error

    reduced = scipy.linalg.solve_triangular(lower, 0.5 * (A + A.T), lower=True)
    reduced = scipy.linalg.solve_triangular(lower, reduced.T, lower=True).T
    reduced = 0.5 * (reduced + reduced.T)
    values, vectors = scipy.linalg.eigh(reduced, subset_by_index=[0, 0])

    value = float(values[0])
    vector = scipy.linalg.solve_triangular(lower.T, vectors[:, 0], lower=False)
    vector = vector / np.sqrt(vector @ B @ vector)
    if vector[np.argmax(np.abs(vector))] < 0:
        vector = -vector

    scale = max(1.0, float(np.abs(np.diag(reduced)).max()))
    if value < -EIGEN_NEGATIVE_TOLERANCE * scale:
        logger.warning("Smallest generalized eigenvalue is negative (%.3e).", value)
    return value, vector


__all__ = [
    "SolveReport",
    "solve_linear",
    "generalized_symmetric_smallest_eig",
    "fill_reducing_permutation",
]
