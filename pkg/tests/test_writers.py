"""
    Tests for writers and the CSV record sets.
"""

import hashlib
import math

import numpy as np
import pytest

from vmm_solver.consts import CZ_CSV_HEADER, FIELD_CSV_HEADER, TABLE_CSV_HEADER
from vmm_solver.exceptions import ConfigurationError, OutputError
from vmm_solver.fem import ElementKind, build_dof_map, build_element_instance
from vmm_solver.linalg import SolveReport
from vmm_solver.mesh import build_interval_mesh
from vmm_solver.problems import builtin_problem
from vmm_solver.study import ConvergenceTable, Schedule, SolutionField, TableRow, convergence_study, solve_vmm
from vmm_solver.writers import (
    CsvFileWriter,
    FuncWriter,
    PrintWriter,
    VoidWriter,
    build_writer_instance,
    field_records,
    format_value,
    max_error_location,
    read_table,
    sample_grid,
    table_records,
    write_cz_reports,
    write_field,
    write_table,
)


def _row(eps, l2, order=None):
    return TableRow(
        eps=eps, h=0.125, l2_err=l2, l2_order=order, h1_err=2.0 * l2, h1_order=order, lap_err=4.0 * l2, lap_order=order
    )


@pytest.fixture
def small_table():
    return ConvergenceTable(rows=[_row(4e-2, 9.44e-3), _row(2e-2, 4.89e-3, 0.9489)], problem_name="test1")


def test_format_value():
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(3) == "3"
    assert format_value(0.1) == "0.1"
    assert format_value(float("nan")) == "nan"
    assert format_value(np.float64(2.5)) == "2.5"


def test_single_row_table_has_blank_orders(tmp_path):
    path = tmp_path / "table.csv"
    write_table(ConvergenceTable(rows=[_row(1e-2, 1e-3)]), path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(TABLE_CSV_HEADER)
    assert lines[1] == "0.01,0.125,0.001,,0.002,,0.004,"


def test_table_read_back_is_exact(tmp_path, small_table):
    path = tmp_path / "test1.csv"
    write_table(small_table, path)
    table = read_table(path)
    assert table.problem_name == "test1"
    assert table_records(table) == table_records(small_table)


def test_table_output_is_deterministic(tmp_path):
    table = convergence_study(builtin_problem("varcoef1d"), Schedule.eps_halving(1e-2, 2), build_interval_mesh(0.0, 1.0, 8))
    digests = []
    for name in ("first.csv", "second.csv"):
        write_table(table, tmp_path / name)
        digests.append(hashlib.sha256((tmp_path / name).read_bytes()).hexdigest())
    assert digests[0] == digests[1]
    assert not list(tmp_path.glob(".vmm-*"))


def test_empty_table_rejected(tmp_path):
    with pytest.raises(ConfigurationError):
        write_table(ConvergenceTable(rows=[]), tmp_path / "empty.csv")


def test_read_table_rejects_other_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(OutputError):
        read_table(path)
    with pytest.raises(OutputError):
        read_table(tmp_path / "missing.csv")


def test_zero_field_dump(tmp_path):
    dofmap = build_dof_map(build_interval_mesh(0.0, 1.0, 4), ElementKind.HERMITE3_1D)
    solution = SolutionField(
        dofmap=dofmap,
        element=build_element_instance(dofmap.kind),
        coefficients=np.zeros(dofmap.n_dofs),
        eps=0.0,
        report=SolveReport(residual=0.0, pivot_growth=1.0, singular=False),
    )
    header, rows = field_records(solution, 5)
    assert header == FIELD_CSV_HEADER
    assert [row[0] for row in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert all(row[1] == 0.0 and row[2] == 0.0 and row[3] is None for row in rows)

    path = tmp_path / "field.csv"
    write_field(solution, 5, path)
    assert path.read_text().splitlines()[1] == "0.0,0.0,0.0,,,"


def test_singular_field_keeps_grid_rows(tmp_path):
    problem = builtin_problem("sine1d")
    dofmap = build_dof_map(build_interval_mesh(0.0, 1.0, 4), ElementKind.HERMITE3_1D)
    solution = SolutionField(
        dofmap=dofmap,
        element=build_element_instance(dofmap.kind),
        coefficients=np.full(dofmap.n_dofs, np.nan),
        eps=0.0,
        report=SolveReport(residual=math.inf, pivot_growth=math.inf, singular=True),
    )
    _, rows = field_records(solution, 11, problem)
    assert len(rows) == 11
    assert all(math.isnan(row[2]) and math.isnan(row[4]) for row in rows)
    assert rows[5][3] == pytest.approx(1.0)

    path = tmp_path / "singular.csv"
    write_field(solution, 11, path, problem)
    assert path.read_text().splitlines()[1].split(",")[2] == "nan"


def test_sine_field_matches_exact():
    problem = builtin_problem("sine1d")
    solution = solve_vmm(problem, build_interval_mesh(0.0, 1.0, 64), 1e-4)
    _, rows = field_records(solution, 11, problem)
    middle = rows[5]
    assert middle[0] == 0.5
    assert abs(middle[2] - 1.0) <= 1e-5
    assert middle[3] == pytest.approx(1.0)
    assert max(row[4] for row in rows) <= 1e-5


def test_sample_grid_in_two_dimensions(square_mesh):
    dofmap = build_dof_map(square_mesh, ElementKind.ARGYRIS5_2D)
    solution = SolutionField(
        dofmap=dofmap,
        element=build_element_instance(dofmap.kind),
        coefficients=np.zeros(dofmap.n_dofs),
        eps=0.0,
        report=SolveReport(residual=0.0, pivot_growth=1.0, singular=False),
    )
    grid = sample_grid(solution, 3)
    assert grid.shape == (9, 2)
    np.testing.assert_array_equal(grid[1], [0.5, 0.0])
    with pytest.raises(ConfigurationError):
        sample_grid(solution, 1)


def test_max_error_location():
    rows = [(0.0, 0.0, 0.0, 0.0, 1e-3, 0.0), (0.5, 0.2, 0.0, 0.0, math.nan, 0.0), (0.0, 0.7, 0.0, 0.0, 4e-2, 0.0)]
    assert max_error_location(rows) == (0.0, 0.7)
    with pytest.raises(ConfigurationError):
        max_error_location([])


def test_cz_reports_record_set():
    captured = []

    class Report:
        eps, h, n_dofs, c_h, adjoint = 1e-2, 0.25, np.int64(10), 0.5, False

    write_cz_reports([Report()], FuncWriter(lambda header, rows: captured.append((header, rows))))
    assert captured == [(CZ_CSV_HEADER, [(1e-2, 0.25, 10, 0.5, False)])]


def test_unwritable_destination(tmp_path):
    writer = CsvFileWriter(tmp_path / "missing" / "table.csv")
    with pytest.raises(OutputError):
        writer.write_records(("a",), [(1,)])
    assert writer.write_records(("a",), [(1,)], fail_fast=False) is False
    assert not (tmp_path / "missing").exists()


def test_print_writer_aligns_columns():
    lines = []
    PrintWriter(print_function=lines.append).write_records(("eps", "c_h"), [(0.01, None), (1e-05, 2.5)])
    assert lines == ["  eps  c_h", " 0.01     ", "1e-05  2.5"]


def test_func_writer_wraps_failures():
    def failing(header, rows):
        raise ValueError("sink is closed")

    assert FuncWriter(failing, skip_to_internal_exception=True).write_records(("a",), [], fail_fast=False) is False
    with pytest.raises(OutputError):
        FuncWriter(failing, skip_to_internal_exception=True).write_records(("a",), [])
    with pytest.raises(ValueError):
        FuncWriter(failing).write_records(("a",), [])


def test_build_writer_instance(tmp_path):
    assert isinstance(build_writer_instance(), PrintWriter)
    assert isinstance(build_writer_instance(str(tmp_path / "out.csv")), CsvFileWriter)
    assert isinstance(build_writer_instance(tmp_path / "out.csv"), CsvFileWriter)
    assert isinstance(build_writer_instance(VoidWriter), VoidWriter)
    assert isinstance(build_writer_instance(lambda header, rows: None), FuncWriter)
    void = VoidWriter()
    assert build_writer_instance(void) is void
    assert void.write_records(("a",), []) is True
    assert void.record_sets == 1
    with pytest.raises(ConfigurationError):
        build_writer_instance(CsvFileWriter)
    with pytest.raises(ConfigurationError):
        build_writer_instance(42)
