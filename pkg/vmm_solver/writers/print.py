"""
    Print writer. Prints records as an aligned text table (CLI summaries, debugging).
"""

from typing import Any, Callable, Optional

from vmm_solver.writers.base import BaseWriter, Header, Rows, format_value


class PrintWriter(BaseWriter):
    """
    Print writer. Prints records as an aligned text table.
    """

    def __init__(
        self,
        separator: str = "  ",
        print_function: Optional[Callable[[str], Any]] = None,
    ):
        """
        :param separator: Text placed between columns.
        :param print_function: Function to pass every formatted line to.
        """
        BaseWriter.__init__(self)
        self._separator = separator
        self._print_function = print_function if print_function else print

    @BaseWriter.writer_base_sender_wrapper
    def write_records(self, header: Header, rows: Rows) -> None:
        lines = [list(header)] + [[format_value(value) for value in row] for row in rows]
        widths = [max(len(line[column]) for line in lines) for column in range(len(header))]
        for line in lines:
            self._print_function(
                self._separator.join(cell.rjust(width) for cell, width in zip(line, widths))
            )
