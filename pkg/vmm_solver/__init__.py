"""
    VMM Solver.

    C1 conforming finite element solver for linear second order elliptic problems
    in non-divergence form, -A:D2u + b.grad u + c u = f, regularized by the
    vanishing moment method: eps * bilaplacian(u) - A:D2u + ... = f with an
    auxiliary boundary condition, discretized by cubic Hermite elements (1-D)
    and Argyris quintic elements (2-D).

    Provides convergence studies in eps and h, discrete stability diagnostics
    and a command line interface (`vmm-solver`).
"""

from vmm_solver.writers import (
    BaseWriter,
    CsvFileWriter,
    FuncWriter,
    PrintWriter,
    VoidWriter,
    read_table,
    write_cz_reports,
    write_field,
    write_table,
)

# Internal exceptions.
from vmm_solver.exceptions import VmmError, ConfigurationError, OutputError

# Base API.
from vmm_solver.client import Client

# Additional API.
from vmm_solver.mesh import (
    Mesh,
    build_disk_mesh,
    build_interval_mesh,
    build_rectangle_mesh,
    dump_mesh,
    validate_mesh,
)
from vmm_solver.problems import ProblemSpec, builtin_problem, load_problem_config
from vmm_solver.study import ConvergenceTable, Schedule, SolutionField, convergence_study, solve_vmm
from vmm_solver.diagnostics import CZReport, discrete_cz_constant, discrete_dual_norm

# Library specific information.
from vmm_solver.__version__ import (
    __version__,
    __url__,
    __title__,
    __license__,
    __description__,
    __copyright__,
    __author_email__,
    __author__,
)

__all__ = [
    "Client",
    "BaseWriter",
    "CsvFileWriter",
    "FuncWriter",
    "PrintWriter",
    "VoidWriter",
    "VmmError",
    "ConfigurationError",
    "OutputError",
    "Mesh",
    "build_interval_mesh",
    "build_rectangle_mesh",
    "build_disk_mesh",
    "validate_mesh",
    "dump_mesh",
    "ProblemSpec",
    "builtin_problem",
    "load_problem_config",
    "Schedule",
    "SolutionField",
    "ConvergenceTable",
    "solve_vmm",
    "convergence_study",
    "CZReport",
    "discrete_cz_constant",
    "discrete_dual_norm",
    "write_table",
    "read_table",
    "write_field",
    "write_cz_reports",
]
