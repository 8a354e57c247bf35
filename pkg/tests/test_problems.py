"""
    Tests for built-in problems, exact bundles, the ellipticity probe and problem configuration files.
"""

import json

import numpy as np
import pytest

from vmm_solver.exceptions import ConfigurationError, FieldEvaluationError, UnknownProblemError
from vmm_solver.problems import (
    BUILTIN_PROBLEMS,
    Domain,
    builtin_problem,
    ellipticity_probe,
    load_problem_config,
    problem_from_dict,
)
from vmm_solver.utils import sgnpow

WITH_EXACT = sorted(name for name in BUILTIN_PROBLEMS if builtin_problem(name).exact is not None)


def _sample(problem, rng, size):
    domain = problem.domain
    points = domain.map_unit_samples(rng.uniform(0.05, 0.95, (size, 2)))
    if problem.dimension == 2:
        # Keep away from the lines where tests 2 to 4 lose smoothness.
        keep = (np.abs(points[:, 0]) > 0.05) & (np.abs(points[:, 1]) > 0.05)
        keep &= np.abs(points[:, 0] - points[:, 1]) > 0.05
        points = points[keep]
    return points


def test_test1_description():
    problem = builtin_problem("test1")
    assert problem.domain.x_bounds == (-2.0, 2.0) and problem.domain.y_bounds == (-2.0, 2.0)
    assert problem.exact.smoothness == "H3"
    point = np.array([[1.5, -0.5]])
    assert problem.exact.value(point)[0] == pytest.approx(1.5**3 * np.cos(-0.5) / 6.0)


def test_test1_coefficient_at_origin():
    A = builtin_problem("test1").A(np.zeros((1, 2)))[0]
    np.testing.assert_allclose(
        A, [[4.0 * np.e**2, -np.sqrt(2.0) / 2.0], [-np.sqrt(2.0) / 2.0, 3.0]], rtol=1e-14
    )


def test_test4_coefficient_is_rank_one():
    A = builtin_problem("test4").A(np.array([[1.0, 1.0], [-0.3, 1.7]]))
    np.testing.assert_allclose(A[0], 16.0 / 9.0 * np.array([[1.0, -1.0], [-1.0, 1.0]]), rtol=1e-14)
    np.testing.assert_allclose(np.linalg.det(A), 0.0, atol=1e-12)


def test_unknown_problem():
    with pytest.raises(UnknownProblemError):
        builtin_problem("test5")


@pytest.mark.parametrize("name", WITH_EXACT)
def test_manufactured_source_consistency(name, rng):
    problem = builtin_problem(name)
    points = _sample(problem, rng, 1000)
    exact = problem.exact
    residual = problem.f(points) + np.einsum("nij,nij->n", problem.A(points), exact.hessian(points))
    scale = np.abs(problem.f(points)).max() + 1.0
    assert np.abs(residual).max() <= 1e-9 * scale


@pytest.mark.parametrize("name", WITH_EXACT)
def test_laplacian_is_hessian_trace(name, rng):
    exact = builtin_problem(name).exact
    points = _sample(builtin_problem(name), rng, 100)
    np.testing.assert_allclose(
        exact.laplacian(points), np.trace(exact.hessian(points), axis1=1, axis2=2), rtol=1e-10, atol=1e-12
    )


@pytest.mark.parametrize("name", WITH_EXACT)
def test_gradient_matches_central_differences(name, rng):
    problem = builtin_problem(name)
    exact = problem.exact
    points = _sample(problem, rng, 100)
    step = 1e-5
    for axis in range(problem.dimension):
        shift = np.zeros(problem.dimension)
        shift[axis] = step
        difference = (exact.value(points + shift) - exact.value(points - shift)) / (2.0 * step)
        np.testing.assert_allclose(difference, exact.gradient(points)[:, axis], rtol=1e-6, atol=1e-6)


def test_quintic_bilaplacian(rng):
    exact = builtin_problem("quintic2d").exact
    points = rng.uniform(0.0, 1.0, (5, 2))
    np.testing.assert_allclose(exact.bilaplacian(points), 72.0 * points[:, 0] + 24.0 * points[:, 1])


def test_moment_consistent_source_adds_bilaplacian():
    problem = builtin_problem("sine1d")
    points = np.array([[0.25], [0.5]])
    expected = (np.pi**2 + 1e-2 * np.pi**4) * np.sin(np.pi * points[:, 0])
    np.testing.assert_allclose(problem.source(points, 1e-2), expected, rtol=1e-13)


def test_ellipticity_of_identity():
    domain = Domain("rectangle", x_bounds=(0.0, 1.0), y_bounds=(0.0, 1.0))
    report = ellipticity_probe(lambda p: np.broadcast_to(np.eye(2), (len(p), 2, 2)), domain, 50)
    low, high, _ = report
    assert (low, high) == (pytest.approx(1.0), pytest.approx(1.0))
    assert report.n_skipped == 0


def test_ellipticity_of_degenerate_coefficient():
    problem = builtin_problem("test4")
    report = ellipticity_probe(problem.A, problem.domain, 500)
    assert abs(report.min_eigenvalue) <= 1e-10
    assert report.max_eigenvalue > 0.0


def test_ellipticity_of_rough_coefficient_is_positive():
    problem = builtin_problem("test1")
    report = ellipticity_probe(problem.A, problem.domain, 10_000)
    assert report.min_eigenvalue > 0.0
    assert np.all(np.abs(report.argmin_point) <= 2.0)


def test_ellipticity_sampling_is_deterministic():
    problem = builtin_problem("test3")
    first = ellipticity_probe(problem.A, problem.domain, 200, seed=7)
    second = ellipticity_probe(problem.A, problem.domain, 200, seed=7)
    assert first.min_eigenvalue == second.min_eigenvalue
    np.testing.assert_array_equal(first.argmin_point, second.argmin_point)


def test_ellipticity_skips_failing_points():
    domain = Domain("interval", x_bounds=(-1.0, 1.0))
    report = ellipticity_probe(lambda p: np.sqrt(p[:, 0])[:, None, None], domain, 64, seed=None)
    assert 0 < report.n_skipped < 64
    assert report.min_eigenvalue >= 0.0


def test_ellipticity_rejects_zero_samples():
    with pytest.raises(ConfigurationError):
        ellipticity_probe(builtin_problem("test1").A, builtin_problem("test1").domain, 0)


def test_sgnpow_real_roots():
    np.testing.assert_allclose(sgnpow(np.array([-8.0, 8.0, 0.0]), 1.0 / 3.0), [-2.0, 2.0, 0.0])


def _write_config(tmp_path, raw, name="custom.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw), encoding="utf-8")
    return str(path)


def test_load_config(tmp_path):
    path = _write_config(
        tmp_path,
        {
            "dimension": 2,
            "domain": {"kind": "rectangle", "x_bounds": [-1, 1], "y_bounds": [-1, 1]},
            "A": [["2 + sin(10*x*y)/2", "0"], ["0", "abs(y - 2*x)^(1/4) + 3"]],
            "f": "1",
            "lambda_lower": 1.5,
        },
    )
    problem = load_problem_config(path)
    assert problem.name == "custom"
    assert problem.homogeneous_boundary and problem.exact is None
    A = problem.A(np.array([[0.0, 0.0], [2.0, 2.0]]))
    assert A[0, 0, 0] == pytest.approx(2.0)
    assert A[1, 1, 1] == pytest.approx(2.0**0.25 + 3.0)
    assert problem.lambda_lower == 1.5


def test_config_with_exact_solution():
    problem = problem_from_dict(
        {
            "name": "sine",
            "dimension": 1,
            "domain": {"kind": "interval", "bounds": [0, 1]},
            "A": "1",
            "exact": "sine1d",
            "moment_consistent": True,
        }
    )
    points = np.array([[0.3]])
    assert problem.f(points)[0] == pytest.approx(np.pi**2 * np.sin(0.3 * np.pi))
    assert problem.moment_consistent


@pytest.mark.parametrize(
    "raw",
    [
        {"dimension": 3, "domain": {"kind": "interval", "bounds": [0, 1]}, "A": "1", "f": "1"},
        {"dimension": 1, "domain": {"kind": "rectangle"}, "A": "1", "f": "1"},
        {"dimension": 1, "domain": {"kind": "interval", "bounds": [0, 1]}, "f": "1"},
        {"dimension": 1, "domain": {"kind": "interval", "bounds": [0, 1]}, "A": "1"},
        {"dimension": 1, "domain": {"kind": "interval", "bounds": [0, 1]}, "A": "1", "f": "1", "g": "0"},
        {"dimension": 2, "domain": {"kind": "disk", "radius": 1}, "A": [["1", "x"], ["y", "1"]], "f": "1"},
        {"dimension": 2, "domain": {"kind": "disk", "radius": 1}, "A": [["1", "0"]], "f": "1"},
        {"dimension": 1, "domain": {"kind": "interval", "bounds": [0, 1]}, "A": "1", "exact": "test1"},
        {"dimension": 1, "domain": {"kind": "interval", "bounds": [0, 1]}, "A": "1", "f": "1", "moment_consistent": True},
    ],
)
def test_invalid_configs(raw):
    with pytest.raises(ConfigurationError):
        problem_from_dict(raw)


def test_symmetry_is_checked_on_samples():
    raw = {"dimension": 2, "domain": {"kind": "rectangle", "x_bounds": [0, 1], "y_bounds": [0, 1]}, "f": "1"}
    problem = problem_from_dict(dict(raw, A=[["2", "x*y"], ["y*x", "2"]]))
    A = problem.A(np.array([[0.5, 0.25]]))
    assert A[0, 0, 1] == A[0, 1, 0] == 0.125
    with pytest.raises(ConfigurationError):
        problem_from_dict(dict(raw, A=[["2", "x*y"], ["x*y + 1e-6", "2"]]))


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_problem_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_problem_config(str(broken))


def test_config_field_domain_error():
    problem = problem_from_dict(
        {
            "dimension": 1,
            "domain": {"kind": "interval", "bounds": [-1, 1]},
            "A": "1",
            "f": "sqrt(x)",
        }
    )
    with pytest.raises(FieldEvaluationError) as error:
        problem.f(np.array([[0.5], [-0.5]]))
    assert error.value.failed_points == [1]
