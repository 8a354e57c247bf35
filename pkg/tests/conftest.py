"""
    Shared fixtures: meshes, problems and polynomial fields with closed form derivatives.
"""

import numpy as np
import pytest

from vmm_solver.mesh import build_interval_mesh, build_rectangle_mesh
from vmm_solver.problems import Domain, ExactBundle, ProblemSpec


def _polynomial_bundle(coefficients: np.ndarray, dimension: int) -> ExactBundle:
    """
    Exact bundle of p = sum c[i, j] x^i y^j (c is 1-D in one dimension).
    """
    c = np.asarray(coefficients, dtype=float)
    if dimension == 1:
        poly = np.polynomial.Polynomial(c)
        first, second = poly.deriv(1), poly.deriv(2)
        return ExactBundle(
            value=lambda p: poly(np.asarray(p)[:, 0]),
            gradient=lambda p: first(np.asarray(p)[:, 0])[:, None],
            hessian=lambda p: second(np.asarray(p)[:, 0])[:, None, None],
        )

    def derivative(order_x: int, order_y: int):
        d = np.polynomial.polynomial.polyder(c, order_x, axis=0) if order_x else c
        d = np.polynomial.polynomial.polyder(d, order_y, axis=1) if order_y else d
        return lambda p: np.polynomial.polynomial.polyval2d(
            np.asarray(p)[:, 0], np.asarray(p)[:, 1], d
        )

    u, ux, uy = derivative(0, 0), derivative(1, 0), derivative(0, 1)
    uxx, uxy, uyy = derivative(2, 0), derivative(1, 1), derivative(0, 2)

    def hessian(p):
        xx, xy, yy = uxx(p), uxy(p), uyy(p)
        return np.stack([np.stack([xx, xy], -1), np.stack([xy, yy], -1)], -2)

    return ExactBundle(
        value=u,
        gradient=lambda p: np.stack([ux(p), uy(p)], axis=1),
        hessian=hessian,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def polynomial_bundle(rng):
    """
    Factory of random polynomial fields of total degree <= `degree`.
    """

    def make(degree: int, dimension: int) -> ExactBundle:
        if dimension == 1:
            return _polynomial_bundle(rng.uniform(-1.0, 1.0, degree + 1), 1)
        coefficients = rng.uniform(-1.0, 1.0, (degree + 1, degree + 1))
        i, j = np.indices(coefficients.shape)
        coefficients[i + j > degree] = 0.0
        return _polynomial_bundle(coefficients, 2)

    return make


@pytest.fixture
def constant_problem():
    """
    Factory of problems with a constant coefficient matrix and a given source.
    """

    def make(A, domain: Domain, f=None, exact=None, **kwargs) -> ProblemSpec:
        matrix = np.atleast_2d(np.asarray(A, dtype=float))

        def coefficient(points):
            return np.broadcast_to(matrix, (np.asarray(points).shape[0],) + matrix.shape).copy()

        source = f if f is not None else (lambda points: np.zeros(np.asarray(points).shape[0]))
        return ProblemSpec(
            name=kwargs.pop("name", "constant"),
            domain=domain,
            A=coefficient,
            f=source,
            exact=exact,
            homogeneous_boundary=exact is None,
            **kwargs,
        )

    return make


@pytest.fixture
def unit_interval():
    return Domain("interval", x_bounds=(0.0, 1.0))


@pytest.fixture
def unit_square():
    return Domain("rectangle", x_bounds=(0.0, 1.0), y_bounds=(0.0, 1.0))


@pytest.fixture
def interval_mesh():
    return build_interval_mesh(0.0, 1.0, 4)


@pytest.fixture
def square_mesh():
    return build_rectangle_mesh((0.0, 1.0), (0.0, 1.0), 2)
