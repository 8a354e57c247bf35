"""
    Problem definitions: coefficient fields, sources, exact solutions and built-in tests.
"""

from vmm_solver.problems.spec import Domain, ExactBundle, ProblemSpec, manufactured_source
from vmm_solver.problems.expression import ScalarFieldExpression, parse_scalar_field
from vmm_solver.problems.builtin import BUILTIN_PROBLEMS, builtin_problem
from vmm_solver.problems.ellipticity import EllipticityReport, ellipticity_probe
from vmm_solver.problems.config import load_problem_config, problem_from_dict

__all__ = [
    "Domain",
    "ExactBundle",
    "ProblemSpec",
    "manufactured_source",
    "ScalarFieldExpression",
    "parse_scalar_field",
    "BUILTIN_PROBLEMS",
    "builtin_problem",
    "EllipticityReport",
    "ellipticity_probe",
    "load_problem_config",
    "problem_from_dict",
]
