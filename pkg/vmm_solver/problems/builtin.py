"""
    Built-in problems: the four non-divergence tests with rough coefficients and smooth verification problems.
"""

from typing import Callable, Dict

import numpy as np

from vmm_solver.exceptions import UnknownProblemError
from vmm_solver.problems.spec import Domain, ExactBundle, ProblemSpec, manufactured_source
from vmm_solver.utils import sgnpow

SQUARE_2 = Domain("rectangle", x_bounds=(-2.0, 2.0), y_bounds=(-2.0, 2.0))
UNIT_SQUARE = Domain("rectangle", x_bounds=(0.0, 1.0), y_bounds=(0.0, 1.0))
UNIT_INTERVAL = Domain("interval", x_bounds=(0.0, 1.0))
DISK_2 = Domain("disk", radius=2.0)

# Constant coefficient of the smooth 2-D verification problems.
CONSTANT_A = np.array([[2.0, 0.5], [0.5, 1.0]])


def _xy(points: np.ndarray):
    points = np.asarray(points, dtype=float)
    return points[:, 0], points[:, 1]


def _symmetric(a11, a12, a22) -> np.ndarray:
    return np.stack([np.stack([a11, a12], axis=-1), np.stack([a12, a22], axis=-1)], axis=-2)


def _hessian(u_xx, u_xy, u_yy) -> np.ndarray:
    return _symmetric(u_xx, u_xy, u_yy)


def rough_coefficient(points: np.ndarray) -> np.ndarray:
    """
    Continuous, positive definite coefficient shared by tests 1 to 3.
    Fractional powers of negative numbers are real (sign preserving).
    """
    x, y = _xy(points)
    off_diagonal = 0.5 * np.sin(10.0 * x * y) - 0.5 * np.sqrt(x + 2.0)
    return _symmetric(
        sgnpow(2.0 * x - y, 1.0 / 3.0) + 4.0 * np.exp(2.0 - x),
        off_diagonal,
        np.abs(y - 2.0 * x) ** 0.25 + 3.0,
    )


def degenerate_coefficient(points: np.ndarray) -> np.ndarray:
    """
    Rank one coefficient (16/9) v v^T with v = (x^(1/3), -y^(1/3)).
    """
    x, y = _xy(points)
    cx, cy = sgnpow(x, 1.0 / 3.0), sgnpow(y, 1.0 / 3.0)
    return (16.0 / 9.0) * _symmetric(cx * cx, -cx * cy, cy * cy)


def _constant_field(matrix: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    matrix = np.asarray(matrix, dtype=float)

    def field(points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(matrix, (np.asarray(points).shape[0],) + matrix.shape).copy()

    return field


# Test 1: u = |x|^3 cos(y) / 6, C2 with a jump of u_xxx across x = 0.
def _test1_exact() -> ExactBundle:
    def value(points):
        x, y = _xy(points)
        return np.abs(x) ** 3 * np.cos(y) / 6.0

    def gradient(points):
        x, y = _xy(points)
        return np.stack(
            [0.5 * x * np.abs(x) * np.cos(y), -np.abs(x) ** 3 * np.sin(y) / 6.0], axis=1
        )

    def hessian(points):
        x, y = _xy(points)
        return _hessian(
            np.abs(x) * np.cos(y),
            -0.5 * x * np.abs(x) * np.sin(y),
            -np.abs(x) ** 3 * np.cos(y) / 6.0,
        )

    return ExactBundle(value, gradient, hessian, smoothness="H3")


# Test 2: u = x |x| cos(y) / 2, u_xx jumps across x = 0.
def _test2_exact() -> ExactBundle:
    def value(points):
        x, y = _xy(points)
        return 0.5 * x * np.abs(x) * np.cos(y)

    def gradient(points):
        x, y = _xy(points)
        return np.stack(
            [np.abs(x) * np.cos(y), -0.5 * x * np.abs(x) * np.sin(y)], axis=1
        )

    def hessian(points):
        x, y = _xy(points)
        return _hessian(
            np.sign(x) * np.cos(y),
            -np.abs(x) * np.sin(y),
            -0.5 * x * np.abs(x) * np.cos(y),
        )

    return ExactBundle(value, gradient, hessian, smoothness="H2")


# Test 3: u = (x - y)^(8/3) (real root), Hessian has a cusp along x = y.
def _test3_exact() -> ExactBundle:
    def value(points):
        x, y = _xy(points)
        return np.abs(x - y) ** (8.0 / 3.0)

    def gradient(points):
        x, y = _xy(points)
        u_x = (8.0 / 3.0) * sgnpow(x - y, 5.0 / 3.0)
        return np.stack([u_x, -u_x], axis=1)

    def hessian(points):
        x, y = _xy(points)
        u_xx = (40.0 / 9.0) * np.abs(x - y) ** (2.0 / 3.0)
        return _hessian(u_xx, -u_xx, u_xx)

    return ExactBundle(value, gradient, hessian, smoothness="H2")


# Test 4: u = x^(4/3) - y^(4/3) (real roots), only H1; second derivatives blow up on the axes.
def _test4_exact() -> ExactBundle:
    def value(points):
        x, y = _xy(points)
        return np.abs(x) ** (4.0 / 3.0) - np.abs(y) ** (4.0 / 3.0)

    def gradient(points):
        x, y = _xy(points)
        return (4.0 / 3.0) * np.stack(
            [sgnpow(x, 1.0 / 3.0), -sgnpow(y, 1.0 / 3.0)], axis=1
        )

    def hessian(points):
        x, y = _xy(points)
        # Singular on x = 0 (resp. y = 0); those entries are reported as 0.
        with np.errstate(divide="ignore"):
            u_xx = np.where(x != 0.0, (4.0 / 9.0) * np.abs(x) ** (-2.0 / 3.0), 0.0)
            u_yy = np.where(y != 0.0, -(4.0 / 9.0) * np.abs(y) ** (-2.0 / 3.0), 0.0)
        return _hessian(u_xx, np.zeros_like(x), u_yy)

    return ExactBundle(value, gradient, hessian, smoothness="H1")


def _sine_1d_exact() -> ExactBundle:
    def value(points):
        return np.sin(np.pi * np.asarray(points)[:, 0])

    def gradient(points):
        return (np.pi * np.cos(np.pi * np.asarray(points)[:, 0]))[:, None]

    def hessian(points):
        return (-np.pi**2 * np.sin(np.pi * np.asarray(points)[:, 0]))[:, None, None]

    def bilaplacian(points):
        return np.pi**4 * np.sin(np.pi * np.asarray(points)[:, 0])

    return ExactBundle(value, gradient, hessian, bilaplacian=bilaplacian)


# Quintic u = x^5 + x^2 y^3 - 2 x y^4 + 3 x^3 - y^2 + x y + 1, reproduced exactly by Argyris.
def _quintic_exact() -> ExactBundle:
    def value(points):
        x, y = _xy(points)
        return x**5 + x**2 * y**3 - 2.0 * x * y**4 + 3.0 * x**3 - y**2 + x * y + 1.0

    def gradient(points):
        x, y = _xy(points)
        return np.stack(
            [
                5.0 * x**4 + 2.0 * x * y**3 - 2.0 * y**4 + 9.0 * x**2 + y,
                3.0 * x**2 * y**2 - 8.0 * x * y**3 - 2.0 * y + x,
            ],
            axis=1,
        )

    def hessian(points):
        x, y = _xy(points)
        return _hessian(
            20.0 * x**3 + 2.0 * y**3 + 18.0 * x,
            6.0 * x * y**2 - 8.0 * y**3 + 1.0,
            6.0 * x**2 * y - 24.0 * x * y**2 - 2.0,
        )

    def bilaplacian(points):
        x, y = _xy(points)
        return 72.0 * x + 24.0 * y

    return ExactBundle(value, gradient, hessian, bilaplacian=bilaplacian)


def _sine_2d_exact() -> ExactBundle:
    def value(points):
        x, y = _xy(points)
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def gradient(points):
        x, y = _xy(points)
        return np.pi * np.stack(
            [np.cos(np.pi * x) * np.sin(np.pi * y), np.sin(np.pi * x) * np.cos(np.pi * y)],
            axis=1,
        )

    def hessian(points):
        x, y = _xy(points)
        ss = np.sin(np.pi * x) * np.sin(np.pi * y)
        cc = np.cos(np.pi * x) * np.cos(np.pi * y)
        return np.pi**2 * _hessian(-ss, cc, -ss)

    def bilaplacian(points):
        return 4.0 * np.pi**4 * value(points)

    return ExactBundle(value, gradient, hessian, bilaplacian=bilaplacian)


def _with_manufactured_source(name, domain, A, exact, **kwargs) -> ProblemSpec:
    return ProblemSpec(
        name=name,
        domain=domain,
        A=A,
        f=manufactured_source(A, exact),
        exact=exact,
        **kwargs,
    )


def _test1() -> ProblemSpec:
    return _with_manufactured_source(
        "test1",
        SQUARE_2,
        rough_coefficient,
        _test1_exact(),
        description="u = |x|^3 cos(y) / 6 on (-2, 2)^2, rough continuous A",
    )


def _test2() -> ProblemSpec:
    return _with_manufactured_source(
        "test2",
        SQUARE_2,
        rough_coefficient,
        _test2_exact(),
        description="u = x |x| cos(y) / 2 on (-2, 2)^2, rough continuous A",
    )


def _test3() -> ProblemSpec:
    return _with_manufactured_source(
        "test3",
        DISK_2,
        rough_coefficient,
        _test3_exact(),
        description="u = (x - y)^(8/3) on the disk of radius 2, rough continuous A",
    )


def _test4() -> ProblemSpec:
    return ProblemSpec(
        name="test4",
        domain=SQUARE_2,
        A=degenerate_coefficient,
        f=lambda points: np.zeros(np.asarray(points).shape[0]),
        exact=_test4_exact(),
        lambda_lower=None,
        description="u = x^(4/3) - y^(4/3) on (-2, 2)^2, degenerate rank one A, f = 0",
    )


def _sine1d() -> ProblemSpec:
    return _with_manufactured_source(
        "sine1d",
        UNIT_INTERVAL,
        _constant_field(np.ones((1, 1))),
        _sine_1d_exact(),
        lambda_lower=1.0,
        moment_consistent=True,
        description="u = sin(pi x) on (0, 1), A = 1, solves the regularized problem exactly",
    )


def _varcoef1d() -> ProblemSpec:
    def coefficient(points):
        x = np.asarray(points, dtype=float)[:, 0]
        return (2.0 + np.sin(2.0 * np.pi * x))[:, None, None]

    return _with_manufactured_source(
        "varcoef1d",
        UNIT_INTERVAL,
        coefficient,
        _sine_1d_exact(),
        lambda_lower=1.0,
        moment_consistent=True,
        description="u = sin(pi x) on (0, 1), A = 2 + sin(2 pi x)",
    )


def _quintic2d() -> ProblemSpec:
    return _with_manufactured_source(
        "quintic2d",
        UNIT_SQUARE,
        _constant_field(CONSTANT_A),
        _quintic_exact(),
        lambda_lower=float(np.linalg.eigvalsh(CONSTANT_A)[0]),
        moment_consistent=True,
        description="quintic u on (0, 1)^2 with constant A (patch test)",
    )


def _const_coeff_2d() -> ProblemSpec:
    return _with_manufactured_source(
        "const_coeff_2d",
        UNIT_SQUARE,
        _constant_field(CONSTANT_A),
        _sine_2d_exact(),
        lambda_lower=float(np.linalg.eigvalsh(CONSTANT_A)[0]),
        moment_consistent=True,
        description="u = sin(pi x) sin(pi y) on (0, 1)^2 with constant A",
    )


BUILTIN_PROBLEMS: Dict[str, Callable[[], ProblemSpec]] = {
    "test1": _test1,
    "test2": _test2,
    "test3": _test3,
    "test4": _test4,
    "sine1d": _sine1d,
    "varcoef1d": _varcoef1d,
    "quintic2d": _quintic2d,
    "const_coeff_2d": _const_coeff_2d,
}

# Exact bundles reusable from problem configuration files.
BUILTIN_EXACT_SOLUTIONS: Dict[str, Callable[[], ExactBundle]] = {
    "test1": _test1_exact,
    "test2": _test2_exact,
    "test3": _test3_exact,
    "test4": _test4_exact,
    "sine1d": _sine_1d_exact,
    "quintic2d": _quintic_exact,
    "sine2d": _sine_2d_exact,
}


def builtin_problem(name: str) -> ProblemSpec:
    """
    Returns a built-in problem by name.

    :param name: One of `BUILTIN_PROBLEMS`.
    """
    try:
        factory = BUILTIN_PROBLEMS[name]
    except KeyError:
        raise UnknownProblemError(
            f"Unknown problem {name!r}, expected one of {sorted(BUILTIN_PROBLEMS)}!"
        ) from None
    return factory()


__all__ = [
    "builtin_problem",
    "BUILTIN_PROBLEMS",
    "BUILTIN_EXACT_SOLUTIONS",
    "rough_coefficient",
    "degenerate_coefficient",
    "CONSTANT_A",
]
