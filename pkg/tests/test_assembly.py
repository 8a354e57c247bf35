"""
    Tests for operator, load and Gram assembly and for essential boundary conditions.
"""

import numpy as np
import pytest
from scipy import sparse

from vmm_solver.assembly import (
    GramKind,
    SparseSystem,
    apply_boundary_conditions,
    assemble_blocks,
    assemble_gram,
    assemble_load,
    assemble_operator,
    constrained_dofs,
)
from vmm_solver.exceptions import (
    CoefficientEvaluationError,
    ConfigurationError,
    DimensionMismatchError,
    MissingBoundaryDataError,
)
from vmm_solver.fem import ElementKind, build_dof_map, interpolate
from vmm_solver.mesh import build_interval_mesh, build_rectangle_mesh
from vmm_solver.problems import ExactBundle, builtin_problem


def _hermite(mesh):
    return build_dof_map(mesh, ElementKind.HERMITE3_1D)


def _argyris(mesh):
    return build_dof_map(mesh, ElementKind.ARGYRIS5_2D)


def _cubic_bundle():
    # u = x^2 (1 - x), a member of the cubic Hermite space.
    return ExactBundle(
        value=lambda p: p[:, 0] ** 2 * (1.0 - p[:, 0]),
        gradient=lambda p: (2.0 * p[:, 0] - 3.0 * p[:, 0] ** 2)[:, None],
        hessian=lambda p: (2.0 - 6.0 * p[:, 0])[:, None, None],
    )


def test_regularized_form_matches_symbolic_integration(constant_problem, unit_interval):
    sympy = pytest.importorskip("sympy")
    x, eps = sympy.symbols("x eps")
    u = x**2 * (1 - x)
    expected = sympy.integrate(eps * sympy.diff(u, x, 2) ** 2 - sympy.diff(u, x, 2) * u, (x, 0, 1))

    mesh = build_interval_mesh(0.0, 1.0, 3)
    dofmap = _hermite(mesh)
    problem = constant_problem(1.0, unit_interval)
    exact = _cubic_bundle()
    c = interpolate(dofmap, exact.value, exact.gradient, exact.hessian)
    for value in (0.0, 0.5, 3.0):
        matrix = assemble_operator(mesh, dofmap, problem, value).matrix
        assert c @ matrix @ c == pytest.approx(float(expected.subs(eps, value)), rel=1e-12)


def test_regularized_form_of_quartic_bump(constant_problem, unit_interval):
    # x^2 (1 - x)^2 is not in the space; its interpolant on a fine mesh approaches 0.8 eps + 2 / 105.
    mesh = build_interval_mesh(0.0, 1.0, 64)
    dofmap = _hermite(mesh)
    blocks = assemble_blocks(mesh, dofmap, constant_problem(1.0, unit_interval))
    c = interpolate(
        dofmap,
        lambda p: p[:, 0] ** 2 * (1.0 - p[:, 0]) ** 2,
        lambda p: (2.0 * p[:, 0] - 6.0 * p[:, 0] ** 2 + 4.0 * p[:, 0] ** 3)[:, None],
        lambda p: (2.0 - 12.0 * p[:, 0] + 12.0 * p[:, 0] ** 2)[:, None, None],
    )
    assert c @ blocks.biharmonic @ c == pytest.approx(0.8, rel=1e-3)
    assert c @ blocks.second_order @ c == pytest.approx(2.0 / 105.0, rel=1e-3)


def test_advection_form_of_space_member_vanishes(constant_problem, unit_interval):
    # (u', u) = u(1)^2 / 2 - u(0)^2 / 2 = 0 for u = x^2 (1 - x).
    mesh = build_interval_mesh(0.0, 1.0, 3)
    dofmap = _hermite(mesh)
    problem = constant_problem(0.0, unit_interval, b=lambda p: np.ones((len(p), 1)))
    exact = _cubic_bundle()
    c = interpolate(dofmap, exact.value, exact.gradient, exact.hessian)
    matrix = assemble_blocks(mesh, dofmap, problem).second_order
    assert c @ matrix @ c == pytest.approx(0.0, abs=1e-14)
    assert abs(matrix - matrix.T).max() > 0.0


def test_reaction_form_is_mass(constant_problem, unit_interval):
    mesh = build_interval_mesh(0.0, 1.0, 3)
    dofmap = _hermite(mesh)
    problem = constant_problem(0.0, unit_interval, c=lambda p: np.ones(len(p)))
    exact = _cubic_bundle()
    c = interpolate(dofmap, exact.value, exact.gradient, exact.hessian)
    for value in (0.0, 2.0):
        matrix = assemble_operator(mesh, dofmap, problem, value).matrix
        expected = 1.0 / 105.0 + value * 4.0
        assert c @ matrix @ c == pytest.approx(expected, rel=1e-12)


def test_operator_is_linear_in_eps(square_mesh):
    problem = builtin_problem("const_coeff_2d")
    dofmap = _argyris(square_mesh)
    blocks = assemble_blocks(square_mesh, dofmap, problem)
    difference = blocks.operator(0.7) - blocks.operator(0.2) - 0.5 * blocks.biharmonic
    scale = abs(blocks.biharmonic).max()
    assert abs(difference).max() <= 1e-13 * scale


def test_zero_eps_operator_is_second_order_block(square_mesh, constant_problem, unit_square):
    problem = constant_problem(np.eye(2), unit_square)
    dofmap = _argyris(square_mesh)
    blocks = assemble_blocks(square_mesh, dofmap, problem)
    matrix = assemble_operator(square_mesh, dofmap, problem, 0.0).matrix
    assert abs(matrix - blocks.second_order).max() == 0.0


def test_biharmonic_block_is_symmetric(square_mesh):
    blocks = assemble_blocks(square_mesh, _argyris(square_mesh), builtin_problem("quintic2d"))
    B = blocks.biharmonic
    assert abs(B - B.T).max() <= 1e-12 * abs(B).max()


def test_reassembly_is_bitwise_identical(square_mesh):
    problem = builtin_problem("const_coeff_2d")
    dofmap = _argyris(square_mesh)
    first = assemble_blocks(square_mesh, dofmap, problem)
    second = assemble_blocks(square_mesh, dofmap, problem)
    assert np.array_equal(first.second_order.data, second.second_order.data)
    assert np.array_equal(first.second_order.indices, second.second_order.indices)
    assert np.array_equal(first.load, second.load)


def test_negative_eps_rejected(interval_mesh, constant_problem, unit_interval):
    with pytest.raises(ConfigurationError):
        assemble_operator(interval_mesh, _hermite(interval_mesh), constant_problem(1.0, unit_interval), -1.0)


def test_dimension_mismatch(square_mesh, constant_problem, unit_interval):
    with pytest.raises(DimensionMismatchError):
        assemble_operator(square_mesh, _argyris(square_mesh), constant_problem(1.0, unit_interval), 0.0)


def test_zero_source_gives_zero_load(interval_mesh, constant_problem, unit_interval):
    load = assemble_load(interval_mesh, _hermite(interval_mesh), constant_problem(1.0, unit_interval))
    assert not np.any(load)


def test_unit_source_integrates_to_one(constant_problem, unit_interval):
    mesh = build_interval_mesh(0.0, 1.0, 5)
    problem = constant_problem(1.0, unit_interval, f=lambda p: np.ones(len(p)))
    load = assemble_load(mesh, _hermite(mesh), problem)
    assert load[0::2].sum() == pytest.approx(1.0, rel=1e-14)


def test_test1_source_matches_closed_form(rng):
    problem = builtin_problem("test1")
    points = rng.uniform(-2.0, 2.0, (16, 2))
    x, y = points[:, 0], points[:, 1]
    u_xx = np.abs(x) * np.cos(y)
    u_xy = -0.5 * x * np.abs(x) * np.sin(y)
    u_yy = -np.abs(x) ** 3 * np.cos(y) / 6.0
    hessians = np.stack([np.stack([u_xx, u_xy], -1), np.stack([u_xy, u_yy], -1)], -2)
    expected = -np.einsum("nij,nij->n", problem.A(points), hessians)
    np.testing.assert_allclose(problem.f(points), expected, rtol=1e-12, atol=1e-12)


def test_failing_coefficient_reports_cell(interval_mesh, unit_interval):
    from vmm_solver.problems import ProblemSpec

    def coefficient(points):
        x = points[:, 0]
        return np.sqrt(0.6 - x)[:, None, None]

    problem = ProblemSpec(
        name="broken",
        domain=unit_interval,
        A=coefficient,
        f=lambda p: np.zeros(len(p)),
        homogeneous_boundary=True,
    )
    with pytest.raises(CoefficientEvaluationError) as error:
        assemble_blocks(interval_mesh, _hermite(interval_mesh), problem)
    assert error.value.cell_index == 2
    assert error.value.point[0] > 0.6


def test_mass_gram_of_constant_is_measure(constant_problem):
    mesh = build_interval_mesh(0.0, 1.0, 1)
    dofmap = _hermite(mesh)
    mass = assemble_gram(mesh, dofmap, GramKind.L2)
    c = np.array([1.0, 0.0, 1.0, 0.0])
    assert c @ mass @ c == pytest.approx(1.0, rel=1e-14)


def test_h2_gram_is_positive_definite(interval_mesh):
    gram = assemble_gram(interval_mesh, _hermite(interval_mesh), GramKind.H2).toarray()
    assert np.allclose(gram, gram.T, atol=1e-12)
    assert np.linalg.eigvalsh(gram)[0] > 0.0


def test_energy_gram_without_eps_is_seminorm(square_mesh):
    dofmap = _argyris(square_mesh)
    energy = assemble_gram(square_mesh, dofmap, GramKind.ENERGY, 0.0)
    seminorm = assemble_gram(square_mesh, dofmap, GramKind.H1_SEMINORM)
    assert abs(energy - seminorm).max() == 0.0


def test_homogeneous_constraints(interval_mesh, constant_problem, unit_interval):
    problem = constant_problem(1.0, unit_interval, f=lambda p: np.ones(len(p)))
    dofmap = _hermite(interval_mesh)
    blocks = assemble_blocks(interval_mesh, dofmap, problem)
    system = apply_boundary_conditions(blocks.system(1e-2), dofmap, problem)

    assert system.constrained.tolist() == [0, 8]
    assert not np.any(system.prescribed)
    free = dofmap.free_dofs(system.constrained)
    np.testing.assert_array_equal(system.load[free], blocks.load[free])
    matrix = system.matrix.toarray()
    np.testing.assert_array_equal(matrix[0], np.eye(10)[0])
    np.testing.assert_array_equal(matrix[free][:, [0, 8]], 0.0)


def test_sine_endpoint_derivatives_remain_free():
    problem = builtin_problem("sine1d")
    mesh = build_interval_mesh(0.0, 1.0, 4)
    dofmap = _hermite(mesh)
    system = apply_boundary_conditions(assemble_blocks(mesh, dofmap, problem).system(0.1), dofmap, problem)
    np.testing.assert_allclose(system.prescribed, 0.0, atol=1e-15)
    assert 1 not in system.constrained and 9 not in system.constrained


def test_clamped_constrains_normal_derivatives(interval_mesh):
    dofmap = _hermite(interval_mesh)
    assert constrained_dofs(dofmap, "clamped").tolist() == [0, 1, 8, 9]
    with pytest.raises(ConfigurationError):
        constrained_dofs(dofmap, "free")


def test_test1_boundary_vertex_data():
    problem = builtin_problem("test1")
    mesh = build_rectangle_mesh((-2.0, 2.0), (-2.0, 2.0), 4)
    dofmap = _argyris(mesh)
    vertex = int(np.flatnonzero(np.all(np.isclose(mesh.vertices, [2.0, 0.0]), axis=1))[0])
    system = SparseSystem(matrix=sparse.identity(dofmap.n_dofs, format="csr"), load=np.zeros(dofmap.n_dofs))
    constrained = apply_boundary_conditions(system, dofmap, problem)
    np.testing.assert_allclose(
        constrained.load[6 * vertex : 6 * vertex + 6],
        [4.0 / 3.0, 2.0, 0.0, 2.0, 0.0, -4.0 / 3.0],
        atol=1e-14,
    )


def test_missing_boundary_data(interval_mesh, constant_problem, unit_interval):
    from dataclasses import replace

    problem = replace(constant_problem(1.0, unit_interval), homogeneous_boundary=False)
    dofmap = _hermite(interval_mesh)
    with pytest.raises(MissingBoundaryDataError):
        apply_boundary_conditions(assemble_blocks(interval_mesh, dofmap, problem).system(0.0), dofmap, problem)


def test_patch_residual_vanishes_on_free_rows():
    problem = builtin_problem("quintic2d")
    mesh = build_rectangle_mesh((0.0, 1.0), (0.0, 1.0), 3)
    dofmap = _argyris(mesh)
    blocks = assemble_blocks(mesh, dofmap, problem)
    exact = problem.exact
    c = interpolate(dofmap, exact.value, exact.gradient, exact.hessian)

    eps = 0.3
    residual = blocks.operator(eps) @ c - blocks.load_vector(eps)
    free = dofmap.free_dofs(dofmap.boundary_trace_dofs)
    assert np.abs(residual[free]).max() <= 1e-9 * np.linalg.norm(blocks.load_vector(eps))
