"""
    Quadrature rules on the reference interval [0, 1] and the unit reference triangle.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import ceil

import numpy as np
from scipy.special import roots_jacobi

from vmm_solver.consts import QUADRATURE_MAX_DEGREE
from vmm_solver.exceptions import QuadratureUnavailableError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureRule:
    """
    Quadrature rule in reference coordinates.
    Weights sum to the reference measure (1 for [0, 1], 1/2 for the unit triangle).
    """

    dimension: int
    points: np.ndarray  # (n_points, dimension)
    weights: np.ndarray  # (n_points,)
    degree: int

    @property
    def n_points(self) -> int:
        return int(self.weights.size)


def _gauss_legendre_unit(n_points: int):
    nodes, weights = np.polynomial.legendre.leggauss(n_points)
    return 0.5 * (nodes + 1.0), 0.5 * weights


@lru_cache(maxsize=None)
def quadrature_rule(dimension: int, degree: int) -> QuadratureRule:
    """
    Returns a rule exact for polynomials of total degree <= `degree`.

    1-D rules are Gauss-Legendre. Triangle rules are collapsed (Duffy) tensor rules:
    Gauss-Jacobi with weight (1 - s) along s and Gauss-Legendre along t, mapped by x = s, y = t (1 - s).

    :param dimension: 1 or 2.
    :param degree: Required exactness degree, 1 <= degree <= QUADRATURE_MAX_DEGREE.
    """
    if dimension not in (1, 2):
        raise QuadratureUnavailableError(
            f"Quadrature is available in dimension 1 or 2, requested {dimension}!"
        )
    if not 1 <= int(degree) <= QUADRATURE_MAX_DEGREE:
        raise QuadratureUnavailableError(
            f"Quadrature degree must be within [1, {QUADRATURE_MAX_DEGREE}], requested {degree}!"
        )
    degree = int(degree)
    n_points = int(ceil((degree + 1) / 2))

    if dimension == 1:
        nodes, weights = _gauss_legendre_unit(n_points)
        points = nodes.reshape(-1, 1)
    else:
        jacobi_nodes, jacobi_weights = roots_jacobi(n_points, 1.0, 0.0)
        s_nodes = 0.5 * (jacobi_nodes + 1.0)
        s_weights = 0.25 * jacobi_weights
        t_nodes, t_weights = _gauss_legendre_unit(n_points)
        s, t = np.meshgrid(s_nodes, t_nodes, indexing="ij")
        ws, wt = np.meshgrid(s_weights, t_weights, indexing="ij")
        points = np.stack([s.reshape(-1), (t * (1.0 - s)).reshape(-1)], axis=1)
        weights = (ws * wt).reshape(-1)

    points = np.ascontiguousarray(points)
    weights = np.ascontiguousarray(weights)
    points.setflags(write=False)
    weights.setflags(write=False)
    logger.debug(
        "Built %d-D quadrature rule of degree %d with %d points.",
        dimension,
        degree,
        weights.size,
    )
    return QuadratureRule(
        dimension=dimension, points=points, weights=weights, degree=degree
    )


__all__ = ["QuadratureRule", "quadrature_rule"]
