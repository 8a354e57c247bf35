"""
    Command line interface: solve, study, diagnose and validate subcommands.

    Exit codes: 0 on success, 1 on usage / configuration errors, 2 on numerical failures
    (including singular solves that were not expected with `--expect-singular`).
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from vmm_solver.__version__ import __version__
from vmm_solver.client import Client
from vmm_solver.consts import (
    AUX_BC_CHOICES,
    AUX_BC_SIMPLY_SUPPORTED,
    DEFAULT_SEED,
    DIAGNOSTICS_DEFAULT_DENSE_CEILING,
    ELLIPTICITY_DEFAULT_SAMPLES,
    EXIT_CODE_SUCCESS,
    EXIT_CODE_USAGE,
)
from vmm_solver.exceptions import ConfigurationError, UnexpectedSingularityError, VmmError
from vmm_solver.mesh import dump_mesh
from vmm_solver.study import Schedule
from vmm_solver.utils import get_run_information_tags
from vmm_solver.writers import PrintWriter, build_writer_instance, write_cz_reports, write_field, write_table

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("solve", "study", "diagnose", "validate")
DEFAULT_FIELD_GRID = 21


@dataclass(frozen=True)
class RunConfig:
    """
    Validated command line configuration of one run.
    """

    subcommand: str
    problem: Optional[str] = None
    config: Optional[str] = None
    n: int = 16
    n_boundary: int = 8
    eps: Tuple[float, ...] = ()
    eps_start: Optional[float] = None
    halvings: Optional[int] = None
    coupled_beta: Optional[float] = None
    levels: Tuple[int, ...] = ()
    extra_eps: Tuple[float, ...] = ()
    out: Optional[str] = None
    dump_mesh: Optional[str] = None
    grid: int = DEFAULT_FIELD_GRID
    quad_degree: Optional[int] = None
    aux_bc: str = AUX_BC_SIMPLY_SUPPORTED
    seed: int = DEFAULT_SEED
    samples: int = ELLIPTICITY_DEFAULT_SAMPLES
    threads: Optional[int] = None
    expect_singular: bool = False
    adjoint: bool = False
    ceiling: int = DIAGNOSTICS_DEFAULT_DENSE_CEILING
    archive: Optional[str] = None
    verbosity: int = 0

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigurationError(f"Unknown subcommand {self.subcommand!r}!")
        if (self.problem is None) == (self.config is None):
            raise ConfigurationError("Pass exactly one of --problem and --config!")
        if self.n < 1 or self.n_boundary < 1 or self.grid < 2 or self.samples < 1:
            raise ConfigurationError("Mesh, grid and sample parameters must be positive!")
        if any(n < 1 for n in self.levels):
            raise ConfigurationError("Mesh levels must be positive!")
        if any(eps < 0 for eps in self.eps + self.extra_eps) or (
            self.eps_start is not None and self.eps_start <= 0
        ):
            raise ConfigurationError("eps values must be nonnegative (the start value positive)!")
        if self.halvings is not None and self.eps_start is None:
            raise ConfigurationError("--halvings needs --eps-start!")
        if self.eps_start is not None and self.halvings is None:
            raise ConfigurationError("--eps-start needs --halvings!")
        if self.halvings is not None and self.halvings < 1:
            raise ConfigurationError("--halvings must be at least 1!")

        forms = [bool(self.eps), self.eps_start is not None, self.coupled_beta is not None]
        if self.subcommand == "study" and sum(forms) != 1:
            raise ConfigurationError(
                "Pass exactly one eps schedule: --eps, --eps-start with --halvings, or --coupled-beta!"
            )
        if self.subcommand == "solve" and len(self.eps) != 1:
            raise ConfigurationError("solve needs exactly one --eps value!")
        if self.subcommand == "diagnose" and len(self.eps) > 1:
            raise ConfigurationError("diagnose takes at most one --eps value!")
        if self.coupled_beta is not None and self.subcommand == "study" and not self.levels:
            raise ConfigurationError("--coupled-beta needs --levels!")

    @property
    def problem_argument(self) -> str:
        return self.problem if self.problem is not None else self.config

    def schedule(self) -> Schedule:
        """
        eps / mesh schedule of a study run.
        """
        if self.coupled_beta is not None:
            return Schedule.coupled(self.coupled_beta, self.levels)
        if self.eps_start is not None:
            return Schedule.eps_halving(self.eps_start, self.halvings, self.extra_eps)
        if self.levels:
            if len(self.eps) != 1:
                raise ConfigurationError("An h refinement study (--levels) takes exactly one --eps value!")
            return Schedule.h_refinement(self.levels, self.eps[0])
        return Schedule.eps_list(self.eps, self.extra_eps)

    @classmethod
    def from_namespace(cls, namespace: argparse.Namespace) -> "RunConfig":
        values = {
            key: value
            for key, value in vars(namespace).items()
            if key in cls.__dataclass_fields__ and value is not None
        }
        for key in ("eps", "levels", "extra_eps"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(**values)


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--problem", help="Built-in problem name (test1..test4, sine1d, ...).")
    source.add_argument("--config", help="Problem configuration file (JSON).")
    parser.add_argument("--n", type=int, help="Mesh level (cells per side, disk refinements).")
    parser.add_argument("--n-boundary", dest="n_boundary", type=int, help="Boundary vertices of the coarsest disk mesh.")
    parser.add_argument("--quad-degree", dest="quad_degree", type=int, help="Quadrature exactness degree override.")
    parser.add_argument("--aux-bc", dest="aux_bc", choices=AUX_BC_CHOICES, help="Auxiliary boundary condition.")
    parser.add_argument("--seed", type=int, help="Seed of sampling probes.")
    parser.add_argument("--threads", type=int, help="Worker threads (default from VMM_SOLVER_THREADS).")
    parser.add_argument("--out", help="Output CSV path (stdout table when omitted).")
    parser.add_argument("--dump-mesh", dest="dump_mesh", help="Also write the mesh to this path.")
    parser.add_argument("-v", "--verbose", dest="verbosity", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vmm-solver",
        description="C1 finite element solver for non-divergence elliptic problems (vanishing moment method).",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)

    solve = subparsers.add_parser("solve", help="Solve one regularized problem and dump the field.")
    _add_common_arguments(solve)
    solve.add_argument("--eps", type=float, nargs=1, help="Regularization parameter.")
    solve.add_argument("--grid", type=int, help="Field samples per axis.")
    solve.add_argument("--expect-singular", dest="expect_singular", action="store_true", default=None)

    study = subparsers.add_parser("study", help="Run an eps or h convergence study.")
    _add_common_arguments(study)
    study.add_argument("--eps", type=float, nargs="+", help="eps values (or the fixed eps with --levels).")
    study.add_argument("--eps-start", dest="eps_start", type=float, help="First eps of a halving schedule.")
    study.add_argument("--halvings", type=int, help="Number of eps halvings.")
    study.add_argument("--coupled-beta", dest="coupled_beta", type=float, help="eps = h^beta over --levels.")
    study.add_argument("--levels", type=int, nargs="+", help="Mesh levels of h schedules.")
    study.add_argument("--extra-eps", dest="extra_eps", type=float, nargs="+", help="Reference rows without order.")
    study.add_argument("--expect-singular", dest="expect_singular", action="store_true", default=None)

    diagnose = subparsers.add_parser("diagnose", help="Discrete Calderon-Zygmund constants.")
    _add_common_arguments(diagnose)
    diagnose.add_argument("--eps", type=float, nargs=1, help="eps (default h^beta).")
    diagnose.add_argument("--coupled-beta", dest="coupled_beta", type=float, help="beta of eps = h^beta (default 2).")
    diagnose.add_argument("--levels", type=int, nargs="+", help="Run the uniformity probe over these levels.")
    diagnose.add_argument("--adjoint", action="store_true", default=None, help="Probe the adjoint operator.")
    diagnose.add_argument("--ceiling", type=int, help="Dense diagnostic DOF ceiling.")
    diagnose.add_argument("--archive", help="JSON archive of uniformity probe values.")

    validate = subparsers.add_parser("validate", help="Validate the mesh and the coefficient ellipticity.")
    _add_common_arguments(validate)
    validate.add_argument("--samples", type=int, help="Ellipticity probe sample count.")
    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("vmm_solver").setLevel(level)


def _output_writer(config: RunConfig):
    return build_writer_instance(config.out) if config.out else PrintWriter()


def _client(config: RunConfig) -> Client:
    return Client(
        writer=_output_writer(config),
        aux_bc=config.aux_bc,
        quadrature_degree=config.quad_degree,
        dense_ceiling=config.ceiling,
        threads=config.threads,
        n_boundary=config.n_boundary,
        seed=config.seed,
    )


def _maybe_dump_mesh(client: Client, config: RunConfig, problem) -> None:
    if config.dump_mesh:
        dump_mesh(client.build_mesh(problem, config.n), config.dump_mesh)


def _run_solve(config: RunConfig) -> int:
    client = _client(config)
    problem = client.resolve_problem(config.problem_argument)
    _maybe_dump_mesh(client, config, problem)
    solution = client.solve(problem, config.eps[0], n=config.n)
    write_field(solution, config.grid, _output_writer(config), problem)

    if problem.exact is not None and not solution.report.singular:
        errors = client.errors(solution, problem)
        logger.info("Errors: L2 %.6e, H1 %.6e, Lap %.6e", errors.l2, errors.h1, errors.lap)
    if solution.report.singular and not config.expect_singular:
        raise UnexpectedSingularityError(
            f"Solve of {problem.name} at eps={config.eps[0]} is singular "
            f"(relative residual {solution.report.residual:.3e})!"
        )
    return EXIT_CODE_SUCCESS


def _run_study(config: RunConfig) -> int:
    client = _client(config)
    problem = client.resolve_problem(config.problem_argument)
    _maybe_dump_mesh(client, config, problem)
    table = client.study(problem, config.schedule(), n=config.n, write=False)
    write_table(table, _output_writer(config))

    singular = [row for row in table.rows if row.singular]
    if singular and not config.expect_singular:
        raise UnexpectedSingularityError(
            f"{len(singular)} study row(s) of {problem.name} are singular or failed "
            f"(first at eps={singular[0].eps:g}, h={singular[0].h:.4g})!"
        )
    return EXIT_CODE_SUCCESS


def _run_diagnose(config: RunConfig) -> int:
    client = _client(config)
    problem = client.resolve_problem(config.problem_argument)
    _maybe_dump_mesh(client, config, problem)
    result = client.diagnose(
        problem,
        n=config.n,
        eps=config.eps[0] if config.eps else None,
        levels=config.levels or None,
        beta=2.0 if config.coupled_beta is None else config.coupled_beta,
        adjoint=config.adjoint,
        archive_path=config.archive,
        write=False,
    )
    reports = getattr(result, "reports", [result])
    write_cz_reports(reports, _output_writer(config))
    return EXIT_CODE_SUCCESS


def _run_validate(config: RunConfig) -> int:
    client = _client(config)
    problem = client.resolve_problem(config.problem_argument)
    _maybe_dump_mesh(client, config, problem)
    result = client.validate(problem, n=config.n, n_samples=config.samples)
    mesh_report, ellipticity = result["mesh"], result["ellipticity"]
    rows = [
        ("h", mesh_report.h),
        ("min_diameter", mesh_report.min_diameter),
        ("max_diameter", mesh_report.max_diameter),
        ("worst_shape_ratio", mesh_report.worst_shape_ratio),
        ("quasi_uniformity", mesh_report.quasi_uniformity),
        ("conforming", mesh_report.conforming),
        ("min_eigenvalue", ellipticity.min_eigenvalue),
        ("max_eigenvalue", ellipticity.max_eigenvalue),
        ("skipped_samples", ellipticity.n_skipped),
    ]
    _output_writer(config).write_records(("quantity", "value"), rows)
    for issue in mesh_report.issues:
        logger.warning("Mesh issue: %s", issue)
    if not mesh_report.conforming:
        raise ConfigurationError(f"Mesh of {problem.name} at n={config.n} is not valid!")
    return EXIT_CODE_SUCCESS


_RUNNERS = {
    "solve": _run_solve,
    "study": _run_study,
    "diagnose": _run_diagnose,
    "validate": _run_validate,
}


def run_cli(args: Optional[Sequence[str]] = None) -> int:
    """
    Runs one subcommand and returns its exit code.
    Failures are reported as one line on stderr.

    :param args: Command line arguments without the program name.
    """
    parser = build_parser()
    try:
        namespace = parser.parse_args(list(args) if args is not None else None)
    except SystemExit as parse_exit:
        # argparse exits 0 for --help / --version and 2 on usage errors.
        return EXIT_CODE_SUCCESS if parse_exit.code in (0, None) else EXIT_CODE_USAGE

    _configure_logging(namespace.verbosity)
    logger.debug("Run information: %s", get_run_information_tags())
    try:
        config = RunConfig.from_namespace(namespace)
        return _RUNNERS[config.subcommand](config)
    except VmmError as run_error:
        print(f"vmm-solver: {type(run_error).__name__}: {run_error}", file=sys.stderr)
        return run_error.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run_cli(argv))


__all__ = ["RunConfig", "build_parser", "run_cli", "main"]
