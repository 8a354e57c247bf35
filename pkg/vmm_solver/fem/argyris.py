"""
    Quintic Argyris element built directly on the physical triangle.

    Local DOF order: for each vertex (u, u_x, u_y, u_xx, u_xy, u_yy), then the outward
    normal derivative at the midpoint of local edges e0 = (v1, v2), e1 = (v2, v0), e2 = (v0, v1).
    The basis is the dual basis of these functionals, obtained by inverting the generalized
    Vandermonde matrix in coordinates shifted to the first vertex and scaled by the longest edge.
"""

import logging
from typing import Tuple

import numpy as np

from vmm_solver.consts import ELEMENT_CONDITION_THRESHOLD
from vmm_solver.exceptions import DegenerateElementError
from vmm_solver.fem.base import BaseElement, BasisEval, ElementKind
from vmm_solver.mesh import LOCAL_EDGES

logger = logging.getLogger(__name__)

# Exponents (i, j) of the 21 quintic monomials xi^i eta^j.
MONOMIAL_EXPONENTS = np.array(
    [(d - j, j) for d in range(6) for j in range(d + 1)], dtype=np.int64
)

# Derivative order of every local functional; functional i scales by s ** -order[i].
_VERTEX_ORDERS = (0, 1, 1, 2, 2, 2)
FUNCTIONAL_ORDERS = np.array(_VERTEX_ORDERS * 3 + (1, 1, 1), dtype=float)


def _powers(base: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """
    base[:, None] ** exponents with negative exponents mapped to 0.
    """
    safe = np.maximum(exponents, 0)
    result = base[:, None] ** safe[None, :]
    return np.where(exponents[None, :] >= 0, result, 0.0)


def monomial_table(xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """
    Monomials and their scaled derivatives at (xi, eta).
    Returns shape (6, n_points, 21): value, d_xi, d_eta, d_xixi, d_xieta, d_etaeta.
    """
    i = MONOMIAL_EXPONENTS[:, 0]
    j = MONOMIAL_EXPONENTS[:, 1]
    xi = np.asarray(xi, dtype=float).reshape(-1)
    eta = np.asarray(eta, dtype=float).reshape(-1)

    xi_pow = {shift: _powers(xi, i - shift) for shift in (0, 1, 2)}
    eta_pow = {shift: _powers(eta, j - shift) for shift in (0, 1, 2)}
    return np.stack(
        [
            xi_pow[0] * eta_pow[0],
            i * xi_pow[1] * eta_pow[0],
            j * xi_pow[0] * eta_pow[1],
            i * (i - 1) * xi_pow[2] * eta_pow[0],
            i * j * xi_pow[1] * eta_pow[1],
            j * (j - 1) * xi_pow[0] * eta_pow[2],
        ],
        axis=0,
    )


def outward_normals(triangle: np.ndarray) -> np.ndarray:
    """
    Unit outward normals of the local edges of a positively oriented triangle, shape (3, 2).
    """
    normals = np.empty((3, 2))
    for k, (a, b) in enumerate(LOCAL_EDGES):
        tangent = triangle[b] - triangle[a]
        tangent = tangent / np.linalg.norm(tangent)
        normals[k] = (tangent[1], -tangent[0])
    return normals


def edge_midpoints(triangle: np.ndarray) -> np.ndarray:
    return np.array([0.5 * (triangle[a] + triangle[b]) for a, b in LOCAL_EDGES])


def _scaling(triangle: np.ndarray) -> Tuple[np.ndarray, float]:
    lengths = [np.linalg.norm(triangle[b] - triangle[a]) for a, b in LOCAL_EDGES]
    return triangle[0], float(max(lengths))


def _scaled_vandermonde(triangle: np.ndarray, origin: np.ndarray, scale: float) -> np.ndarray:
    """
    21 x 21 matrix of the scaled functionals applied to the monomials.
    """
    scaled_vertices = (triangle - origin) / scale
    table = monomial_table(scaled_vertices[:, 0], scaled_vertices[:, 1])
    rows = []
    for vertex in range(3):
        rows.extend(table[:, vertex, :])

    scaled_midpoints = (edge_midpoints(triangle) - origin) / scale
    mid_table = monomial_table(scaled_midpoints[:, 0], scaled_midpoints[:, 1])
    for k, normal in enumerate(outward_normals(triangle)):
        rows.append(normal[0] * mid_table[1, k] + normal[1] * mid_table[2, k])
    return np.array(rows)


def argyris_coefficients(triangle: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Monomial coefficients C (21 x 21, column k = basis function k) of the physical basis.
    Returns (C, origin, scale).

    :param triangle: Vertex coordinates, shape (3, 2), positively oriented.
    """
    triangle = np.asarray(triangle, dtype=float).reshape(3, 2)
    origin, scale = _scaling(triangle)
    if not scale > 0:
        raise DegenerateElementError("Triangle has zero size!", condition=np.inf)

    vandermonde = _scaled_vandermonde(triangle, origin, scale)
    condition = float(np.linalg.cond(vandermonde))
    if not np.isfinite(condition) or condition > ELEMENT_CONDITION_THRESHOLD:
        raise DegenerateElementError(
            f"Argyris duality matrix is near singular (condition {condition:.3e}) on triangle {triangle.tolist()}!",
            condition=condition,
        )
    coefficients = np.linalg.solve(vandermonde, np.diag(scale**FUNCTIONAL_ORDERS))
    return coefficients, origin, scale


def _evaluate_with_coefficients(
    coefficients: np.ndarray, origin: np.ndarray, scale: float, points: np.ndarray
) -> BasisEval:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    scaled = (points - origin) / scale
    table = monomial_table(scaled[:, 0], scaled[:, 1]) @ coefficients  # (6, n, 21)

    values = table[0]
    gradients = np.stack([table[1], table[2]], axis=-1) / scale
    hessians = np.empty(values.shape + (2, 2))
    hessians[..., 0, 0] = table[3]
    hessians[..., 0, 1] = table[4]
    hessians[..., 1, 0] = table[4]
    hessians[..., 1, 1] = table[5]
    return BasisEval(values=values, gradients=gradients, hessians=hessians / scale**2)


def argyris_basis(triangle: np.ndarray, point: np.ndarray) -> BasisEval:
    """
    Evaluates the 21 Argyris basis functions of a physical triangle at one or more points.

    :param triangle: Vertex coordinates, shape (3, 2).
    :param point: Physical point (2,) or points (n, 2).
    """
    coefficients, origin, scale = argyris_coefficients(triangle)
    return _evaluate_with_coefficients(coefficients, origin, scale, point)


class ArgyrisElement(BaseElement):
    """
    C1 quintic Argyris element (21 local DOFs).
    """

    kind = ElementKind.ARGYRIS5_2D

    def evaluate(self, cell_coordinates: np.ndarray, points: np.ndarray) -> BasisEval:
        return argyris_basis(cell_coordinates, points)

    def functional_matrix(self, cell_coordinates: np.ndarray) -> np.ndarray:
        triangle = np.asarray(cell_coordinates, dtype=float).reshape(3, 2)
        coefficients, origin, scale = argyris_coefficients(triangle)
        at_vertices = _evaluate_with_coefficients(coefficients, origin, scale, triangle)
        at_midpoints = _evaluate_with_coefficients(
            coefficients, origin, scale, edge_midpoints(triangle)
        )

        rows = []
        for vertex in range(3):
            hessian = at_vertices.hessians[vertex]
            rows.extend(
                [
                    at_vertices.values[vertex],
                    at_vertices.gradients[vertex, :, 0],
                    at_vertices.gradients[vertex, :, 1],
                    hessian[:, 0, 0],
                    hessian[:, 0, 1],
                    hessian[:, 1, 1],
                ]
            )
        for k, normal in enumerate(outward_normals(triangle)):
            rows.append(at_midpoints.gradients[k] @ normal)
        return np.array(rows)

    def interpolate_local(self, cell_coordinates, value, gradient, hessian) -> np.ndarray:
        triangle = np.asarray(cell_coordinates, dtype=float).reshape(3, 2)
        values = np.asarray(value(triangle), dtype=float).reshape(3)
        gradients = np.asarray(gradient(triangle), dtype=float).reshape(3, 2)
        hessians = np.asarray(hessian(triangle), dtype=float).reshape(3, 2, 2)

        local = np.empty(21)
        for vertex in range(3):
            local[6 * vertex : 6 * vertex + 6] = (
                values[vertex],
                gradients[vertex, 0],
                gradients[vertex, 1],
                hessians[vertex, 0, 0],
                hessians[vertex, 0, 1],
                hessians[vertex, 1, 1],
            )
        midpoint_gradients = np.asarray(
            gradient(edge_midpoints(triangle)), dtype=float
        ).reshape(3, 2)
        local[18:] = np.einsum(
            "kd,kd->k", midpoint_gradients, outward_normals(triangle)
        )
        return local


__all__ = [
    "ArgyrisElement",
    "argyris_basis",
    "argyris_coefficients",
    "monomial_table",
    "outward_normals",
]
