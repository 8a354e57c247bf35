"""
    Cubic Hermite element on intervals.
    Local DOFs: u(a), u'(a), u(b), u'(b).
"""

import numpy as np

from vmm_solver.fem.base import BaseElement, BasisEval, ElementKind


def hermite_basis(t, cell_length: float) -> BasisEval:
    """
    Evaluates the four cubic Hermite functions at reference coordinates `t` in [0, 1].
    Derivatives are physical (chain rule by the cell length).

    :param t: Scalar or array of reference coordinates.
    :param cell_length: Physical length of the cell.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    length = float(cell_length)
    t2, t3 = t * t, t * t * t

    values = np.stack(
        [
            1.0 - 3.0 * t2 + 2.0 * t3,
            length * (t - 2.0 * t2 + t3),
            3.0 * t2 - 2.0 * t3,
            length * (t3 - t2),
        ],
        axis=1,
    )
    first = np.stack(
        [
            -6.0 * t + 6.0 * t2,
            length * (1.0 - 4.0 * t + 3.0 * t2),
            6.0 * t - 6.0 * t2,
            length * (3.0 * t2 - 2.0 * t),
        ],
        axis=1,
    ) / length
    second = np.stack(
        [
            -6.0 + 12.0 * t,
            length * (6.0 * t - 4.0),
            6.0 - 12.0 * t,
            length * (6.0 * t - 2.0),
        ],
        axis=1,
    ) / length**2

    return BasisEval(
        values=values,
        gradients=first[:, :, None],
        hessians=second[:, :, None, None],
    )


class HermiteElement(BaseElement):
    """
    C1 cubic Hermite element (4 local DOFs).
    """

    kind = ElementKind.HERMITE3_1D

    def evaluate(self, cell_coordinates: np.ndarray, points: np.ndarray) -> BasisEval:
        a, b = np.asarray(cell_coordinates, dtype=float).reshape(2)
        x = np.asarray(points, dtype=float).reshape(-1)
        return hermite_basis((x - a) / (b - a), b - a)

    def functional_matrix(self, cell_coordinates: np.ndarray) -> np.ndarray:
        nodes = np.asarray(cell_coordinates, dtype=float).reshape(2, 1)
        basis = self.evaluate(cell_coordinates, nodes)
        rows = [
            basis.values[0],
            basis.gradients[0, :, 0],
            basis.values[1],
            basis.gradients[1, :, 0],
        ]
        return np.stack(rows, axis=0)

    def interpolate_local(self, cell_coordinates, value, gradient, hessian) -> np.ndarray:
        nodes = np.asarray(cell_coordinates, dtype=float).reshape(2, 1)
        values = np.asarray(value(nodes), dtype=float).reshape(2)
        slopes = np.asarray(gradient(nodes), dtype=float).reshape(2)
        return np.array([values[0], slopes[0], values[1], slopes[1]])


__all__ = ["HermiteElement", "hermite_basis"]
