"""
    Base abstract class for all C1 elements.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Tuple

import numpy as np

from vmm_solver.fem.quadrature import QuadratureRule


class ElementKind(Enum):
    """
    Supported C1 elements.
    Value is (tag, dimension, polynomial degree, DOFs per vertex, DOFs per edge).
    """

    HERMITE3_1D = ("Hermite3_1D", 1, 3, 2, 0)
    ARGYRIS5_2D = ("Argyris5_2D", 2, 5, 6, 1)

    @property
    def tag(self) -> str:
        return self.value[0]

    @property
    def dimension(self) -> int:
        return self.value[1]

    @property
    def degree(self) -> int:
        return self.value[2]

    @property
    def dofs_per_vertex(self) -> int:
        return self.value[3]

    @property
    def dofs_per_edge(self) -> int:
        return self.value[4]

    @property
    def n_local_dofs(self) -> int:
        n_vertices = self.dimension + 1
        n_edges = 3 if self.dimension == 2 else 0
        return n_vertices * self.dofs_per_vertex + n_edges * self.dofs_per_edge

    @classmethod
    def for_dimension(cls, dimension: int) -> "ElementKind":
        return cls.HERMITE3_1D if dimension == 1 else cls.ARGYRIS5_2D


@dataclass(frozen=True)
class BasisEval:
    """
    Values and physical derivatives of all local basis functions at a batch of points.
    """

    values: np.ndarray  # (n_points, n_basis)
    gradients: np.ndarray  # (n_points, n_basis, dimension)
    hessians: np.ndarray  # (n_points, n_basis, dimension, dimension)

    @property
    def laplacians(self) -> np.ndarray:
        return np.trace(self.hessians, axis1=2, axis2=3)

    @property
    def n_points(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_basis(self) -> int:
        return int(self.values.shape[1])


# Field evaluators used by interpolation: points (n, d) -> (n,), (n, d), (n, d, d).
ValueField = Callable[[np.ndarray], np.ndarray]


class BaseElement:
    """
    Base element class. Cannot be used as element.
    Elements build basis functions on the physical cell from its vertex coordinates.
    """

    kind: ElementKind

    def evaluate(self, cell_coordinates: np.ndarray, points: np.ndarray) -> BasisEval:
        """
        Evaluates the local basis at physical points.
        Should be implemented in elements.
        """
        raise NotImplementedError()

    def reference_to_physical(
        self, cell_coordinates: np.ndarray, reference_points: np.ndarray
    ) -> Tuple[np.ndarray, float]:
        """
        Maps reference points to the cell, returns (physical points, |det J|).
        """
        cell_coordinates = np.asarray(cell_coordinates, dtype=float)
        origin = cell_coordinates[0]
        jacobian = (cell_coordinates[1:] - origin).T  # (d, d)
        physical = origin + np.asarray(reference_points) @ jacobian.T
        return physical, abs(float(np.linalg.det(jacobian)))

    def tabulate(
        self, cell_coordinates: np.ndarray, rule: QuadratureRule
    ) -> Tuple[BasisEval, np.ndarray, np.ndarray]:
        """
        Returns basis evaluation, physical quadrature points and physical weights on a cell.
        """
        physical, determinant = self.reference_to_physical(
            cell_coordinates, rule.points
        )
        return self.evaluate(cell_coordinates, physical), physical, rule.weights * determinant

    def functional_matrix(self, cell_coordinates: np.ndarray) -> np.ndarray:
        """
        Matrix F[i, k] = L_i(psi_k) of the local DOF functionals applied to the local basis.
        Identity for a correctly built element.
        """
        raise NotImplementedError()

    def interpolate_local(
        self,
        cell_coordinates: np.ndarray,
        value: ValueField,
        gradient: ValueField,
        hessian: ValueField,
    ) -> np.ndarray:
        """
        Applies the local DOF functionals to a field given by its value / gradient / Hessian evaluators.
        """
        raise NotImplementedError()


__all__ = ["ElementKind", "BasisEval", "BaseElement"]
