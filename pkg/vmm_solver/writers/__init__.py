"""
    Writers (output sinks) for tables, fields and diagnostics.
"""

import os
from typing import Any

from vmm_solver.exceptions import ConfigurationError
from vmm_solver.writers.base import BaseWriter, format_value
from vmm_solver.writers.csv import CsvFileWriter
from vmm_solver.writers.func import FuncWriter
from vmm_solver.writers.print import PrintWriter
from vmm_solver.writers.void import VoidWriter
from vmm_solver.writers.tables import (
    field_records,
    max_error_location,
    read_table,
    sample_grid,
    table_records,
    write_cz_reports,
    write_field,
    write_table,
)


def build_writer_instance(writer_argument: Any = None) -> BaseWriter:
    """
    Builds writer instance by writer argument.
    """
    if writer_argument is None:
        # Nothing passed, print to stdout.
        return PrintWriter()

    if isinstance(writer_argument, (str, os.PathLike)):
        return CsvFileWriter(writer_argument)

    if isinstance(writer_argument, type) and issubclass(writer_argument, BaseWriter):
        if writer_argument in (VoidWriter, PrintWriter):
            return writer_argument()
        raise ConfigurationError(
            "Failed to build writer instance. Please instantiate writers that need arguments (for example a path) before passing them!"
        )

    if isinstance(writer_argument, BaseWriter):
        return writer_argument

    if callable(writer_argument):
        # Raw function, called with (header, rows).
        return FuncWriter(func=writer_argument)

    raise ConfigurationError(
        "Failed to build writer instance. Please pass valid writer argument!"
    )


__all__ = [
    # Typing.
    "BaseWriter",
    # Default.
    "CsvFileWriter",
    # Debug.
    "FuncWriter",
    "PrintWriter",
    "VoidWriter",
    "build_writer_instance",
    "format_value",
    "table_records",
    "field_records",
    "sample_grid",
    "max_error_location",
    "write_table",
    "read_table",
    "write_field",
    "write_cz_reports",
]
