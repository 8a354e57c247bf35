"""
    Tests for regularized solves, error norms and convergence studies.
"""

import math
from dataclasses import replace

import numpy as np
import pytest

from vmm_solver.exceptions import ConfigurationError
from vmm_solver.fem import ElementKind, build_dof_map, build_element_instance, interpolate
from vmm_solver.linalg import SolveReport
from vmm_solver.mesh import build_interval_mesh, build_rectangle_mesh
from vmm_solver.problems import ProblemSpec, builtin_problem, manufactured_source
from vmm_solver.study import (
    Schedule,
    SolutionField,
    compute_orders,
    convergence_study,
    discretize,
    error_norms,
    h2_norm,
    solve_vmm,
    stability_spread,
)


def _field(dofmap, coefficients, eps=0.0):
    report = SolveReport(residual=0.0, pivot_growth=1.0, singular=False, n_dofs=dofmap.n_dofs)
    return SolutionField(
        dofmap=dofmap,
        element=build_element_instance(dofmap.kind),
        coefficients=coefficients,
        eps=eps,
        report=report,
    )


def test_eigenfunction_is_reproduced():
    problem = builtin_problem("sine1d")
    solution = solve_vmm(problem, build_interval_mesh(0.0, 1.0, 64), 1e-4)
    assert not solution.report.singular
    assert solution.report.residual <= 1e-12
    assert error_norms(solution, problem.exact).l2 <= 1e-5


def test_lower_order_terms_are_solved():
    sine = builtin_problem("sine1d")
    exact = sine.exact
    b = lambda p: np.ones((len(p), 1))
    c = lambda p: 1.0 + p[:, 0]
    problem = ProblemSpec(
        name="advection_reaction",
        domain=sine.domain,
        A=sine.A,
        f=manufactured_source(sine.A, exact, b=b, c=c),
        b=b,
        c=c,
        exact=exact,
        moment_consistent=True,
    )
    solution = solve_vmm(problem, build_interval_mesh(0.0, 1.0, 64), 1e-4)
    assert not solution.report.singular
    errors = error_norms(solution, exact)
    assert errors.l2 <= 1e-5

    dropped = replace(problem, b=None, c=None)
    assert error_norms(solve_vmm(dropped, build_interval_mesh(0.0, 1.0, 64), 1e-4), exact).l2 > 1e-3


def test_clamped_condition_on_eigenfunction():
    problem = builtin_problem("sine1d")
    solution = solve_vmm(problem, build_interval_mesh(0.0, 1.0, 32), 1e-3, aux_bc="clamped")
    assert error_norms(solution, problem.exact).l2 <= 1e-4


def test_zero_data_gives_zero_solution(constant_problem, unit_interval, interval_mesh):
    solution = solve_vmm(constant_problem(1.0, unit_interval), interval_mesh, 1e-2)
    np.testing.assert_array_equal(solution.coefficients, 0.0)


def test_solver_is_linear_in_the_source(constant_problem, unit_square, square_mesh):
    A = np.array([[2.0, 0.3], [0.3, 1.0]])
    first = constant_problem(A, unit_square, f=lambda p: np.sin(3.0 * p[:, 0]))
    second = constant_problem(A, unit_square, f=lambda p: p[:, 0] * p[:, 1] ** 2)
    both = constant_problem(A, unit_square, f=lambda p: np.sin(3.0 * p[:, 0]) + p[:, 0] * p[:, 1] ** 2)
    solutions = [solve_vmm(problem, square_mesh, 0.05).coefficients for problem in (first, second, both)]
    np.testing.assert_allclose(solutions[2], solutions[0] + solutions[1], rtol=1e-9, atol=1e-12)


def test_negative_eps_rejected(interval_mesh):
    with pytest.raises(ConfigurationError):
        solve_vmm(builtin_problem("sine1d"), interval_mesh, -1e-3)


def test_patch_solve_reproduces_quintic():
    problem = builtin_problem("quintic2d")
    solution = solve_vmm(problem, build_rectangle_mesh((0.0, 1.0), (0.0, 1.0), 4), 1e-2)
    errors = error_norms(solution, problem.exact)
    assert errors.l2 <= 1e-8
    assert errors.lap <= 1e-6


def test_interpolant_errors_vanish():
    problem = builtin_problem("quintic2d")
    dofmap = build_dof_map(build_rectangle_mesh((0.0, 1.0), (0.0, 1.0), 2), ElementKind.ARGYRIS5_2D)
    exact = problem.exact
    field = _field(dofmap, interpolate(dofmap, exact.value, exact.gradient, exact.hessian))
    l2, h1, lap = error_norms(field, exact)
    assert max(l2, h1, lap) <= 1e-8


def test_zero_field_against_sine(interval_mesh):
    problem = builtin_problem("sine1d")
    dofmap = build_dof_map(interval_mesh, ElementKind.HERMITE3_1D)
    errors = error_norms(_field(dofmap, np.zeros(dofmap.n_dofs), eps=0.5), problem.exact)
    assert errors.l2 == pytest.approx(math.sqrt(0.5), rel=1e-9)
    assert errors.h1 == pytest.approx(math.pi * math.sqrt(0.5), rel=1e-9)
    assert errors.energy == pytest.approx(math.sqrt(0.5 * errors.lap**2 + errors.h1**2))


def test_h2_norm_of_linear_function(interval_mesh):
    dofmap = build_dof_map(interval_mesh, ElementKind.HERMITE3_1D)
    coefficients = interpolate(
        dofmap, lambda p: p[:, 0], lambda p: np.ones((len(p), 1)), lambda p: np.zeros((len(p), 1, 1))
    )
    assert h2_norm(_field(dofmap, coefficients)) == pytest.approx(math.sqrt(1.0 / 3.0 + 1.0))


def test_orders_from_table_values():
    orders = compute_orders([9.44e-3, 4.89e-3], [4e-2, 2e-2])
    assert orders[0] is None
    assert orders[1] == pytest.approx(math.log2(9.44 / 4.89))
    assert round(orders[1], 2) == 0.95


def test_orders_edge_cases():
    assert compute_orders([1.0, 1.0], [0.2, 0.1])[1] == 0.0
    assert math.isnan(compute_orders([1.0, float("nan")], [0.2, 0.1])[1])
    assert math.isnan(compute_orders([1.0, 0.5], [0.1, 0.1])[1])
    assert compute_orders([], []) == []
    with pytest.raises(ConfigurationError):
        compute_orders([1.0], [0.1, 0.2])


def test_eps_halving_schedule():
    schedule = Schedule.eps_halving(4e-2, 3)
    assert schedule.eps_values == (4e-2, 2e-2, 1e-2, 5e-3)
    assert schedule.order_parameter == "eps"
    assert Schedule.coupled(2.0, [4, 8]).order_parameter == "h"
    with pytest.raises(ConfigurationError):
        Schedule(kind="adaptive")


def test_eps_study_rows_and_orders():
    problem = builtin_problem("varcoef1d")
    mesh = build_interval_mesh(0.0, 1.0, 16)
    table = convergence_study(problem, Schedule.eps_list([1e-2, 5e-3, 2.5e-3], extra_eps=[1e-6]), mesh)
    assert [row.eps for row in table.rows] == [1e-2, 5e-3, 2.5e-3, 1e-6]
    assert table.rows[0].l2_order is None
    assert table.rows[1].l2_order is not None
    assert table.rows[-1].extra and table.rows[-1].l2_order is None
    assert all(not row.singular for row in table.rows)
    assert table.problem_name == "varcoef1d"


def test_study_is_thread_count_independent():
    problem = builtin_problem("sine1d")
    schedule = Schedule.coupled(2.0, [4, 8, 16])
    sequential = convergence_study(problem, schedule, threads=1)
    parallel = convergence_study(problem, schedule, threads=3)
    np.testing.assert_array_equal(sequential.column("l2_err"), parallel.column("l2_err"))
    np.testing.assert_array_equal(sequential.column("h"), [0.25, 0.125, 0.0625])


def test_study_preconditions(interval_mesh, constant_problem, unit_interval):
    problem = builtin_problem("sine1d")
    with pytest.raises(ConfigurationError):
        convergence_study(problem, Schedule.eps_list([1e-2]), interval_mesh)
    with pytest.raises(ConfigurationError):
        convergence_study(problem, Schedule.eps_list([1e-2, 1e-3]), [interval_mesh])
    with pytest.raises(ConfigurationError):
        convergence_study(problem, Schedule.coupled(2.0, [4, 8]), interval_mesh)
    with pytest.raises(ConfigurationError):
        convergence_study(constant_problem(1.0, unit_interval), Schedule.eps_list([1e-2, 1e-3]), interval_mesh)


def test_failed_rows_are_recorded(constant_problem, unit_interval):
    # Boundary data that is not finite at x = 1 cannot be imposed.
    exact = builtin_problem("sine1d").exact
    broken = replace(exact, value=lambda p: np.where(p[:, 0] < 1.0, np.sin(np.pi * p[:, 0]), np.nan))
    problem = constant_problem(1.0, unit_interval, f=lambda p: np.pi**2 * np.sin(np.pi * p[:, 0]), exact=broken)
    table = convergence_study(problem, Schedule.eps_list([1e-2, 5e-3]), build_interval_mesh(0.0, 1.0, 4))
    assert len(table.rows) == 2
    assert all(row.singular and row.failure for row in table.rows)
    assert math.isnan(table.rows[0].l2_err)
    assert math.isnan(table.rows[1].l2_order)


def test_discretization_is_reused_across_eps():
    problem = builtin_problem("sine1d")
    mesh = build_interval_mesh(0.0, 1.0, 8)
    discretization = discretize(problem, mesh)
    direct = solve_vmm(problem, mesh, 1e-3)
    reused = solve_vmm(problem, mesh, 1e-3, discretization=discretization)
    np.testing.assert_array_equal(direct.coefficients, reused.coefficients)


def test_coupled_schedule_is_h2_stable():
    table = convergence_study(builtin_problem("varcoef1d"), Schedule.coupled(2.0, [8, 16, 32]))
    assert stability_spread(table) < 5.0


@pytest.mark.slow
def test_cea_rate_in_one_dimension():
    table = convergence_study(builtin_problem("sine1d"), Schedule.h_refinement([8, 16, 32], 1e-2))
    assert table.rows[-1].lap_order >= 1.7


@pytest.mark.slow
def test_cea_rate_in_two_dimensions():
    table = convergence_study(builtin_problem("const_coeff_2d"), Schedule.h_refinement([2, 4, 8], 1e-2))
    assert table.rows[-1].lap_order >= 2.5


def _orders(table, name):
    return np.array([getattr(row, f"{name}_order") for row in table.rows[1:]], dtype=float)


@pytest.mark.slow
def test_rough_coefficient_eps_orders():
    problem = builtin_problem("test1")
    mesh = problem.domain.build_mesh(32)
    table = convergence_study(problem, Schedule.eps_halving(4e-2, 3), mesh)
    l2 = table.column("l2_err")
    assert np.all(np.diff(l2) < 0)
    assert np.all((_orders(table, "l2") >= 0.75) & (_orders(table, "l2") <= 1.15))
    assert np.all((_orders(table, "h1") >= 0.55) & (_orders(table, "h1") <= 0.95))
    assert np.all((_orders(table, "lap") >= 0.10) & (_orders(table, "lap") <= 0.40))


@pytest.mark.slow
def test_discontinuous_second_derivative_eps_orders():
    problem = builtin_problem("test2")
    mesh = problem.domain.build_mesh(32)
    table = convergence_study(problem, Schedule.eps_halving(4e-2, 3), mesh)
    assert np.all(np.abs(_orders(table, "l2") - 0.905) <= 0.2)
    assert np.all(np.abs(_orders(table, "h1") - 0.68) <= 0.2)
    assert np.all(np.abs(_orders(table, "lap") - 0.24) <= 0.2)


@pytest.mark.slow
def test_disk_problem_needs_regularization():
    problem = builtin_problem("test3")
    mesh = problem.domain.build_mesh(3)
    unregularized = solve_vmm(problem, mesh, 0.0)
    assert unregularized.report.singular or error_norms(unregularized, problem.exact).l2 > 10.0

    table = convergence_study(problem, Schedule.eps_list([5e-3, 2.5e-3, 1.25e-3]), problem.domain.build_mesh(4))
    assert np.all((_orders(table, "l2") >= 0.78) & (_orders(table, "l2") <= 1.18))


@pytest.mark.slow
def test_degenerate_coefficient_run():
    problem = builtin_problem("test4")
    mesh = problem.domain.build_mesh(32)
    table = convergence_study(problem, Schedule.eps_list([2e-4, 1e-4, 5e-5]), mesh)
    l2 = table.column("l2_err")
    assert np.all(np.isfinite(l2))
    assert np.all(np.diff(l2) < 0)
    assert np.all((_orders(table, "l2") >= 0.05) & (_orders(table, "l2") <= 0.35))
