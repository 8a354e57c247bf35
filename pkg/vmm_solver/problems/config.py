"""
    Problem configuration files (JSON).

    Example:
        {
            "name": "custom",
            "dimension": 2,
            "domain": {"kind": "rectangle", "x_bounds": [-1, 1], "y_bounds": [-1, 1]},
            "A": [["2 + sin(10*x*y)/2", "0"], ["0", "abs(y - 2*x)^(1/4) + 3"]],
            "f": "1",
            "lambda_lower": 1.5
        }
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional

import numpy as np

from vmm_solver.consts import DEFAULT_SEED, SYMMETRY_TOLERANCE
from vmm_solver.exceptions import ConfigurationError
from vmm_solver.problems.builtin import BUILTIN_EXACT_SOLUTIONS
from vmm_solver.problems.expression import ScalarFieldExpression
from vmm_solver.problems.spec import Domain, ProblemSpec, manufactured_source

logger = logging.getLogger(__name__)

KNOWN_KEYS = {
    "name",
    "dimension",
    "domain",
    "A",
    "b",
    "c",
    "f",
    "exact",
    "lambda_lower",
    "moment_consistent",
}


def _expression(value: Any, dimension: int, where: str) -> ScalarFieldExpression:
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigurationError(f"{where} must be an expression string or a number, got {value!r}!")
    return ScalarFieldExpression(str(value), dimension=dimension)


def _parse_domain(raw: Any, dimension: int) -> Domain:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigurationError("`domain` must be an object with a `kind` key!")
    kind = raw["kind"]
    try:
        if kind == "interval":
            domain = Domain("interval", x_bounds=tuple(float(v) for v in raw["bounds"]))
        elif kind == "rectangle":
            domain = Domain(
                "rectangle",
                x_bounds=tuple(float(v) for v in raw["x_bounds"]),
                y_bounds=tuple(float(v) for v in raw["y_bounds"]),
            )
        elif kind == "disk":
            domain = Domain("disk", radius=float(raw["radius"]))
        else:
            raise ConfigurationError(f"Unknown domain kind {kind!r}!")
    except (KeyError, TypeError, ValueError) as domain_error:
        raise ConfigurationError(f"Invalid `domain` entry: {domain_error}") from domain_error
    if domain.dimension != dimension:
        raise ConfigurationError(
            f"Domain {kind!r} is {domain.dimension}-D but `dimension` is {dimension}!"
        )
    return domain


def _parse_matrix(raw: Any, dimension: int):
    if dimension == 1 and not isinstance(raw, list):
        raw = [[raw]]
    if (
        not isinstance(raw, list)
        or len(raw) != dimension
        or any(not isinstance(row, list) or len(row) != dimension for row in raw)
    ):
        raise ConfigurationError(f"`A` must be a {dimension}x{dimension} matrix of expressions!")
    entries: List[List[ScalarFieldExpression]] = [
        [_expression(entry, dimension, f"A[{i}][{j}]") for j, entry in enumerate(row)]
        for i, row in enumerate(raw)
    ]

    def field(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, dimension)
        return np.stack(
            [np.stack([entry(points) for entry in row], axis=-1) for row in entries], axis=-2
        )

    return field, entries


def _parse_vector(raw: Any, dimension: int):
    if dimension == 1 and not isinstance(raw, list):
        raw = [raw]
    if not isinstance(raw, list) or len(raw) != dimension:
        raise ConfigurationError(f"`b` must be a list of {dimension} expression(s)!")
    entries = [_expression(entry, dimension, f"b[{i}]") for i, entry in enumerate(raw)]

    def field(points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, dimension)
        return np.stack([entry(points) for entry in entries], axis=-1)

    return field


def _check_symmetry(domain: Domain, entries) -> None:
    if len(entries) == 1 or entries[0][1].text == entries[1][0].text:
        return
    samples = domain.map_unit_samples(np.random.default_rng(DEFAULT_SEED).random((64, 2)))
    upper = entries[0][1].evaluate_raw(samples)
    lower = entries[1][0].evaluate_raw(samples)
    if not np.allclose(upper, lower, rtol=SYMMETRY_TOLERANCE, atol=SYMMETRY_TOLERANCE, equal_nan=True):
        raise ConfigurationError("`A` must be symmetric: A[0][1] and A[1][0] differ!")


def problem_from_dict(raw: Dict[str, Any], default_name: str = "custom") -> ProblemSpec:
    """
    Builds a problem from an already decoded configuration object.
    """
    if not isinstance(raw, dict):
        raise ConfigurationError("Problem configuration must be a JSON object!")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigurationError(f"Unknown configuration key(s): {sorted(unknown)}!")

    dimension = raw.get("dimension")
    if dimension not in (1, 2):
        raise ConfigurationError(f"`dimension` must be 1 or 2, got {dimension!r}!")
    domain = _parse_domain(raw.get("domain"), dimension)
    if "A" not in raw:
        raise ConfigurationError("`A` is required!")
    A, entries = _parse_matrix(raw["A"], dimension)
    _check_symmetry(domain, entries)
    b = _parse_vector(raw["b"], dimension) if "b" in raw else None
    c = _expression(raw["c"], dimension, "c") if "c" in raw else None

    exact = None
    if "exact" in raw:
        name = raw["exact"]
        if name not in BUILTIN_EXACT_SOLUTIONS:
            raise ConfigurationError(
                f"Unknown exact solution {name!r}, expected one of {sorted(BUILTIN_EXACT_SOLUTIONS)}!"
            )
        exact = BUILTIN_EXACT_SOLUTIONS[name]()
        try:
            probe = np.asarray(exact.value(domain.map_unit_samples(np.full((1, 2), 0.5))))
        except (IndexError, ValueError):
            probe = None
        if probe is None or probe.shape != (1,):
            raise ConfigurationError(f"Exact solution {name!r} does not match dimension {dimension}!")

    if "f" in raw:
        f = _expression(raw["f"], dimension, "f")
    elif exact is not None:
        f = manufactured_source(A, exact, b=b, c=c)
    else:
        raise ConfigurationError("`f` is required when no `exact` solution is named!")

    moment_consistent = bool(raw.get("moment_consistent", False))
    if moment_consistent and (exact is None or exact.bilaplacian is None):
        raise ConfigurationError(
            "`moment_consistent` needs an exact solution with a known bilaplacian!"
        )

    lambda_lower: Optional[float] = raw.get("lambda_lower")
    return ProblemSpec(
        name=str(raw.get("name", default_name)),
        domain=domain,
        A=A,
        f=f,
        b=b,
        c=c,
        exact=exact,
        lambda_lower=None if lambda_lower is None else float(lambda_lower),
        moment_consistent=moment_consistent,
        homogeneous_boundary=exact is None,
        description="problem configuration file",
    )


def load_problem_config(path: str) -> ProblemSpec:
    """
    Loads a problem from a JSON configuration file.

    :param path: Path to the file.
    """
    try:
        with open(path, "r", encoding="utf-8") as stream:
            raw = json.load(stream)
    except OSError as read_error:
        raise ConfigurationError(f"Unable to read problem configuration {path}: {read_error}") from read_error
    except json.JSONDecodeError as decode_error:
        raise ConfigurationError(
            f"Problem configuration {path} is not valid JSON: {decode_error}"
        ) from decode_error

    default_name = os.path.splitext(os.path.basename(path))[0]
    problem = problem_from_dict(raw, default_name=default_name)
    logger.info("Loaded problem %r from %s.", problem.name, path)
    return problem


__all__ = ["load_problem_config", "problem_from_dict"]
