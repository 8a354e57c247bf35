"""
    Record sets for convergence tables, sampled fields and CZ reports.
"""

import csv
import logging
import math
import os
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from vmm_solver.consts import CZ_CSV_HEADER, FIELD_CSV_HEADER, TABLE_CSV_HEADER
from vmm_solver.exceptions import ConfigurationError, OutputError
from vmm_solver.fem import evaluate_coefficients
from vmm_solver.problems.spec import ProblemSpec
from vmm_solver.study import ConvergenceTable, SolutionField, TableRow
from vmm_solver.writers.base import BaseWriter
from vmm_solver.writers.csv import CsvFileWriter

logger = logging.getLogger(__name__)

Destination = Union[str, os.PathLike, BaseWriter]


def _writer_for(destination: Destination) -> BaseWriter:
    if isinstance(destination, BaseWriter):
        return destination
    return CsvFileWriter(destination)


def table_records(table: ConvergenceTable) -> Tuple[Tuple[str, ...], List[Tuple[Any, ...]]]:
    rows = [
        (
            row.eps,
            row.h,
            row.l2_err,
            row.l2_order,
            row.h1_err,
            row.h1_order,
            row.lap_err,
            row.lap_order,
        )
        for row in table.rows
    ]
    return TABLE_CSV_HEADER, rows


def write_table(table: ConvergenceTable, destination: Destination) -> None:
    """
    Writes a convergence table (header `eps,h,l2_err,l2_order,h1_err,h1_order,lap_err,lap_order`).
    Orders without a value (first row, reference rows) are blank.

    :param table: Nonempty table.
    :param destination: Output path or writer instance.
    """
    if not table.rows:
        raise ConfigurationError("Refusing to write an empty convergence table!")
    header, rows = table_records(table)
    _writer_for(destination).write_records(header, rows)
    logger.info("Wrote %d table rows of %s.", len(rows), table.problem_name or "table")


def _parse_optional(text: str) -> Optional[float]:
    return None if text == "" else float(text)


def read_table(path: Union[str, os.PathLike]) -> ConvergenceTable:
    """
    Reads a table written by `write_table` back (bit exact for all written columns).
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as stream:
            lines = list(csv.reader(stream))
    except OSError as read_error:
        raise OutputError(f"Unable to read table {path}: {read_error}") from read_error
    if not lines or tuple(lines[0]) != TABLE_CSV_HEADER:
        raise OutputError(f"{path} is not a convergence table (unexpected header)!")

    rows = []
    for line in lines[1:]:
        if len(line) != len(TABLE_CSV_HEADER):
            raise OutputError(f"{path}: malformed table line {line!r}!")
        values = dict(zip(TABLE_CSV_HEADER, line))
        rows.append(
            TableRow(
                eps=float(values["eps"]),
                h=float(values["h"]),
                l2_err=float(values["l2_err"]),
                l2_order=_parse_optional(values["l2_order"]),
                h1_err=float(values["h1_err"]),
                h1_order=_parse_optional(values["h1_order"]),
                lap_err=float(values["lap_err"]),
                lap_order=_parse_optional(values["lap_order"]),
            )
        )
    return ConvergenceTable(rows=rows, problem_name=os.path.splitext(os.path.basename(path))[0])


def sample_grid(solution: SolutionField, resolution: int) -> np.ndarray:
    """
    Uniform grid over the bounding box of the mesh, `resolution` points per axis.
    """
    if resolution < 2:
        raise ConfigurationError(f"Field grid needs at least 2 points per axis, got {resolution}!")
    vertices = solution.mesh.vertices
    lower, upper = vertices.min(axis=0), vertices.max(axis=0)
    axes = [np.linspace(lower[d], upper[d], resolution) for d in range(solution.mesh.dimension)]
    if len(axes) == 1:
        return axes[0][:, None]
    x, y = np.meshgrid(axes[0], axes[1], indexing="xy")
    return np.column_stack([x.ravel(), y.ravel()])


def field_records(
    solution: SolutionField, resolution: int, problem: Optional[ProblemSpec] = None
) -> Tuple[Tuple[str, ...], List[Tuple[Any, ...]]]:
    """
    Samples u_h (and the exact solution when known) on a uniform grid.
    Grid points outside the mesh are dropped; 1-D fields carry y = 0.
    Non-finite values inside the mesh (singular solves) are kept and written as nan.
    """
    points = sample_grid(solution, resolution)
    values, _, hessians, owners = evaluate_coefficients(
        solution.dofmap, solution.element, solution.coefficients, points
    )
    inside = owners >= 0
    points, values, hessians = points[inside], values[inside], hessians[inside]
    laplacians = np.trace(hessians, axis1=1, axis2=2)
    if not np.all(np.isfinite(values)):
        logger.warning(
            "%d of %d field samples are not finite.",
            int(np.count_nonzero(~np.isfinite(values))),
            values.size,
        )

    exact = problem.exact if problem is not None else None
    if exact is not None and len(points):
        exact_values = np.asarray(exact.value(points), dtype=float)
        exact_laplacians = np.asarray(exact.laplacian(points), dtype=float)
    else:
        exact_values = exact_laplacians = None

    rows = []
    for index, point in enumerate(points):
        y = float(point[1]) if point.size > 1 else 0.0
        u_h = float(values[index])
        if exact_values is None:
            rows.append((float(point[0]), y, u_h, None, None, None))
            continue
        rows.append(
            (
                float(point[0]),
                y,
                u_h,
                float(exact_values[index]),
                abs(u_h - float(exact_values[index])),
                abs(float(laplacians[index]) - float(exact_laplacians[index])),
            )
        )
    return FIELD_CSV_HEADER, rows


def write_field(
    solution: SolutionField,
    resolution: int,
    destination: Destination,
    problem: Optional[ProblemSpec] = None,
) -> None:
    """
    Writes a field dump with header `x,y,u_h,u_exact,err,lap_err`.
    Columns depending on the exact solution are blank when it is unknown.

    :param solution: Finite element solution.
    :param resolution: Grid points per axis (at least 2).
    :param destination: Output path or writer instance.
    :param problem: Problem providing the exact solution.
    """
    header, rows = field_records(solution, resolution, problem)
    _writer_for(destination).write_records(header, rows)
    logger.info("Wrote %d field samples.", len(rows))


def write_cz_reports(reports: Sequence, destination: Destination) -> None:
    """
    Writes CZ constants with header `eps,h,n_dofs,c_h,adjoint`.
    """
    rows = [
        (report.eps, report.h, int(report.n_dofs), report.c_h, bool(report.adjoint))
        for report in reports
    ]
    _writer_for(destination).write_records(CZ_CSV_HEADER, rows)


def max_error_location(rows: Sequence[Tuple[Any, ...]]) -> Tuple[float, float]:
    """
    (x, y) of the largest `err` entry of a field record set.
    """
    errors = [row[4] if row[4] is not None and not math.isnan(row[4]) else -1.0 for row in rows]
    if not errors:
        raise ConfigurationError("Field record set is empty!")
    best = int(np.argmax(errors))
    return rows[best][0], rows[best][1]
