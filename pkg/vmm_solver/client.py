"""
    Main client of the solver.
    Provides root interface for solving problems, running studies and diagnostics.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from vmm_solver.consts import (
    AUX_BC_CHOICES,
    AUX_BC_SIMPLY_SUPPORTED,
    DEFAULT_SEED,
    DIAGNOSTICS_DEFAULT_DENSE_CEILING,
    EIGEN_NEGATIVE_TOLERANCE,
    ELLIPTICITY_DEFAULT_SAMPLES,
)
from vmm_solver.exceptions import ConfigurationError, EllipticityBoundError
from vmm_solver.utils import get_run_information_tags, resolve_thread_count

# Components.
from vmm_solver.diagnostics import CZReport, UniformityReport, cz_uniformity_probe, discrete_cz_constant
from vmm_solver.mesh import Mesh, MeshReport, validate_mesh
from vmm_solver.problems import ProblemSpec, builtin_problem, ellipticity_probe, load_problem_config
from vmm_solver.problems.ellipticity import EllipticityReport
from vmm_solver.study import (
    ConvergenceTable,
    ErrorNorms,
    Schedule,
    SolutionField,
    convergence_study,
    error_norms,
    solve_vmm,
)
from vmm_solver.writers import BaseWriter, build_writer_instance, table_records, write_cz_reports

logger = logging.getLogger(__name__)


class _Client:
    """
    ## Solver client.
    Main interface holding run settings shared by solves, studies and diagnostics.

    ### Example use:
    ```python
    import vmm_solver
    client = vmm_solver.Client(aux_bc="clamped")
    solution = client.solve("sine1d", eps=1e-4, n=64)
    ```
    """

    # Instances.
    writer: BaseWriter

    # Settings.
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED
    quadrature_degree: Optional[int] = None
    dense_ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING
    threads: int = 1
    n_boundary: int = 8
    seed: Optional[int] = DEFAULT_SEED
    kwargs_settings: Dict[str, Any] = dict()

    def __init__(
        self,
        *,
        writer: Optional[Union[BaseWriter, Callable, str]] = None,
        # Settings.
        aux_bc: str = AUX_BC_SIMPLY_SUPPORTED,
        quadrature_degree: Optional[int] = None,
        dense_ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING,
        threads: Optional[int] = None,
        n_boundary: int = 8,
        seed: Optional[int] = DEFAULT_SEED,
        # Other params.
        **kwargs_settings,
    ):
        """
        :param writer: Sink for study tables and diagnostic reports (path, writer or function).
        :param aux_bc: Auxiliary boundary condition, simply supported or clamped.
        :param quadrature_degree: Exactness degree override for all integrals.
        :param dense_ceiling: Maximal DOF count of dense diagnostics.
        :param threads: Worker count (defaults to the thread count environment variable).
        :param n_boundary: Boundary vertices of the coarsest disk mesh.
        :param seed: Seed of sampling probes (None for unscrambled sequences).
        """
        if aux_bc not in AUX_BC_CHOICES:
            raise ConfigurationError(f"Unknown auxiliary condition {aux_bc!r}, expected one of {AUX_BC_CHOICES}!")
        if dense_ceiling < 1:
            raise ConfigurationError("Dense diagnostic ceiling must be positive!")

        self.writer = build_writer_instance(writer)

        # Options.
        self.aux_bc = aux_bc
        self.quadrature_degree = quadrature_degree
        self.dense_ceiling = dense_ceiling
        self.threads = resolve_thread_count(threads)
        self.n_boundary = n_boundary
        self.seed = seed
        self.kwargs_settings = kwargs_settings.copy()

        logger.debug("Client created: %s", get_run_information_tags())

    @staticmethod
    def resolve_problem(problem: Union[ProblemSpec, str]) -> ProblemSpec:
        """
        Returns a problem from a problem instance, a built-in name or a JSON configuration path.
        """
        if isinstance(problem, ProblemSpec):
            return problem
        if not isinstance(problem, str):
            raise ConfigurationError(f"Cannot build a problem from {problem!r}!")
        if problem.endswith(".json"):
            return load_problem_config(problem)
        return builtin_problem(problem)

    def build_mesh(self, problem: ProblemSpec, n: int) -> Mesh:
        return problem.domain.build_mesh(n, n_boundary=self.n_boundary)

    def solve(self, problem: Union[ProblemSpec, str], eps: float, *, n: int) -> SolutionField:
        """
        Solves one regularized problem on the level `n` mesh of its domain.
        """
        problem = self.resolve_problem(problem)
        return solve_vmm(
            problem,
            self.build_mesh(problem, n),
            eps,
            aux_bc=self.aux_bc,
            quadrature_degree=self.quadrature_degree,
        )

    def errors(self, solution: SolutionField, problem: Union[ProblemSpec, str]) -> ErrorNorms:
        problem = self.resolve_problem(problem)
        if problem.exact is None:
            raise ConfigurationError(f"Problem {problem.name!r} has no exact solution!")
        return error_norms(solution, problem.exact, quadrature_degree=self.quadrature_degree)

    def study(
        self,
        problem: Union[ProblemSpec, str],
        schedule: Schedule,
        *,
        n: Optional[int] = None,
        write: bool = True,
    ) -> ConvergenceTable:
        """
        Runs a convergence study; eps schedules use the level `n` mesh.
        The table is passed to the client writer when `write` is set.
        """
        problem = self.resolve_problem(problem)
        meshes = None
        if schedule.kind == "eps":
            if n is None:
                raise ConfigurationError("An eps schedule needs the mesh level `n`!")
            meshes = self.build_mesh(problem, n)
        table = convergence_study(
            problem,
            schedule,
            meshes,
            aux_bc=self.aux_bc,
            quadrature_degree=self.quadrature_degree,
            threads=self.threads,
            n_boundary=self.n_boundary,
        )
        if write:
            self.writer.write_records(*table_records(table))
        return table

    def diagnose(
        self,
        problem: Union[ProblemSpec, str],
        *,
        n: Optional[int] = None,
        eps: Optional[float] = None,
        levels: Optional[Sequence[int]] = None,
        beta: float = 2.0,
        adjoint: bool = False,
        archive_path: Optional[str] = None,
        write: bool = True,
    ) -> Union[CZReport, UniformityReport]:
        """
        Discrete CZ constant on one mesh (eps defaults to h^beta), or the uniformity
        probe over `levels` when given.
        """
        problem = self.resolve_problem(problem)
        if levels:
            result = cz_uniformity_probe(
                problem,
                levels,
                beta=beta,
                adjoint=adjoint,
                archive_path=archive_path,
                threads=self.threads,
                n_boundary=self.n_boundary,
                ceiling=self.dense_ceiling,
                aux_bc=self.aux_bc,
                quadrature_degree=self.quadrature_degree,
            )
            reports: List[CZReport] = list(result.reports)
        else:
            if n is None:
                raise ConfigurationError("A single CZ probe needs the mesh level `n`!")
            mesh = self.build_mesh(problem, n)
            result = discrete_cz_constant(
                problem,
                mesh,
                mesh.h**beta if eps is None else eps,
                adjoint,
                aux_bc=self.aux_bc,
                ceiling=self.dense_ceiling,
                quadrature_degree=self.quadrature_degree,
            )
            reports = [result]
        if write:
            write_cz_reports(reports, self.writer)
        return result

    def validate(
        self,
        problem: Union[ProblemSpec, str],
        *,
        n: int,
        n_samples: int = ELLIPTICITY_DEFAULT_SAMPLES,
    ) -> Dict[str, Union[MeshReport, EllipticityReport]]:
        """
        Validates the level `n` mesh and probes the ellipticity of the coefficient.
        Raises `EllipticityBoundError` when the sampled minimum violates the declared `lambda_lower`.
        """
        problem = self.resolve_problem(problem)
        mesh_report = validate_mesh(self.build_mesh(problem, n))
        ellipticity = ellipticity_probe(problem.A, problem.domain, n_samples, seed=self.seed)
        bound = problem.lambda_lower
        if bound is not None and ellipticity.min_eigenvalue < bound - EIGEN_NEGATIVE_TOLERANCE * max(1.0, abs(bound)):
            raise EllipticityBoundError(
                f"Sampled minimal eigenvalue {ellipticity.min_eigenvalue:.6g} of {problem.name} "
                f"at {tuple(ellipticity.argmin_point.tolist())} is below the declared bound {bound:.6g}!",
                ellipticity.min_eigenvalue,
                bound,
            )
        return {"mesh": mesh_report, "ellipticity": ellipticity}


# Public name of the facade.
Client = _Client
