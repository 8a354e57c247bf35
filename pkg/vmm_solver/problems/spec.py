"""
    Problem description types: domains, exact solution bundles and problem specs.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from vmm_solver.exceptions import ConfigurationError, FieldEvaluationError
from vmm_solver.mesh import Mesh, build_disk_mesh, build_interval_mesh, build_rectangle_mesh

# Vectorised evaluators over points of shape (n, dimension).
ScalarField = Callable[[np.ndarray], np.ndarray]  # -> (n,)
VectorField = Callable[[np.ndarray], np.ndarray]  # -> (n, d)
MatrixField = Callable[[np.ndarray], np.ndarray]  # -> (n, d, d)

DOMAIN_KINDS = ("interval", "rectangle", "disk")


@dataclass(frozen=True)
class Domain:
    """
    Interval, rectangle or disk (centered at the origin).
    """

    kind: str
    x_bounds: Tuple[float, float] = (0.0, 1.0)
    y_bounds: Tuple[float, float] = (0.0, 1.0)
    radius: float = 1.0

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ConfigurationError(
                f"Unknown domain kind {self.kind!r}, expected one of {DOMAIN_KINDS}!"
            )

    @property
    def dimension(self) -> int:
        return 1 if self.kind == "interval" else 2

    def build_mesh(self, n: int, *, n_boundary: int = 8, refine_levels: int = None) -> Mesh:
        """
        Builds the mesh of this domain.
        For disks `refine_levels` defaults to `n` (number of uniform refinements).
        """
        if self.kind == "interval":
            return build_interval_mesh(self.x_bounds[0], self.x_bounds[1], n)
        if self.kind == "rectangle":
            return build_rectangle_mesh(self.x_bounds, self.y_bounds, n)
        levels = n if refine_levels is None else refine_levels
        return build_disk_mesh(self.radius, n_boundary, levels)

    def map_unit_samples(self, samples: np.ndarray) -> np.ndarray:
        """
        Maps samples of the unit cube onto the domain (area preserving polar map for disks).
        """
        samples = np.asarray(samples, dtype=float)
        if self.kind == "disk":
            r = self.radius * np.sqrt(samples[:, 0])
            theta = 2.0 * np.pi * samples[:, 1]
            return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
        x = self.x_bounds[0] + (self.x_bounds[1] - self.x_bounds[0]) * samples[:, 0]
        if self.kind == "interval":
            return x.reshape(-1, 1)
        y = self.y_bounds[0] + (self.y_bounds[1] - self.y_bounds[0]) * samples[:, 1]
        return np.stack([x, y], axis=1)

    def bounding_box(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        if self.kind == "disk":
            return (-self.radius, self.radius), (-self.radius, self.radius)
        return tuple(self.x_bounds), tuple(self.y_bounds)


def _trace(hessian: MatrixField) -> ScalarField:
    return lambda points: np.trace(hessian(points), axis1=1, axis2=2)


@dataclass(frozen=True)
class ExactBundle:
    """
    Closed form exact solution with derivatives.
    `bilaplacian` is only needed by problems whose source includes the moment term.
    """

    value: ScalarField
    gradient: VectorField
    hessian: MatrixField
    smoothness: str = "C-infinity"
    laplacian: Optional[ScalarField] = None
    bilaplacian: Optional[ScalarField] = None

    def __post_init__(self):
        if self.laplacian is None:
            object.__setattr__(self, "laplacian", _trace(self.hessian))


def _finite_or_raise(name: str, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)
    if np.any(bad):
        raise FieldEvaluationError(
            f"Field {name} is not finite at {int(bad.sum())} point(s)!",
            failed_points=np.flatnonzero(bad),
        )
    return values


@dataclass(frozen=True)
class ProblemSpec:
    """
    Linear non-divergence problem -A:D2u + b.grad u + c u = f with u = g on the boundary.

    When `moment_consistent` is set the exact solution also solves the regularized problem:
    the load adds eps * bilaplacian(u) and the auxiliary condition is lap(u) = lap(g).
    """

    name: str
    domain: Domain
    A: MatrixField
    f: ScalarField
    b: Optional[VectorField] = None
    c: Optional[ScalarField] = None
    exact: Optional[ExactBundle] = None
    lambda_lower: Optional[float] = None
    moment_consistent: bool = False
    # Allows solving without an exact bundle, boundary data is then g = 0.
    homogeneous_boundary: bool = False
    description: str = field(default="", compare=False)

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    @property
    def has_lower_order_terms(self) -> bool:
        return self.b is not None or self.c is not None

    def source(self, points: np.ndarray, eps: float) -> np.ndarray:
        """
        Right hand side at points for regularization parameter `eps`.
        """
        values = _finite_or_raise("f", self.f(points))
        if self.moment_consistent and eps != 0.0:
            values = values + eps * _finite_or_raise(
                "bilaplacian", self.exact.bilaplacian(points)
            )
        return values

    def boundary_laplacian(self, points: np.ndarray) -> Optional[np.ndarray]:
        """
        Laplacian of the boundary data for the natural auxiliary condition, None when it is zero.
        """
        if not self.moment_consistent or self.exact is None:
            return None
        return _finite_or_raise("laplacian", self.exact.laplacian(points))


def manufactured_source(
    A: MatrixField,
    exact: ExactBundle,
    b: Optional[VectorField] = None,
    c: Optional[ScalarField] = None,
) -> ScalarField:
    """
    Builds f = -A:D2u + b.grad u + c u from an exact bundle.
    """

    def source(points: np.ndarray) -> np.ndarray:
        values = -np.einsum("nij,nij->n", A(points), exact.hessian(points))
        if b is not None:
            values = values + np.einsum("ni,ni->n", b(points), exact.gradient(points))
        if c is not None:
            values = values + c(points) * exact.value(points)
        return values

    return source


__all__ = ["Domain", "ExactBundle", "ProblemSpec", "manufactured_source"]
