# pylint: disable=arguments-differ
"""
    Function writer. Calls your function with every record set.
"""

from typing import Any, Callable

from vmm_solver.exceptions import OutputError
from vmm_solver.writers.base import BaseWriter, Header, Rows


class FuncWriter(BaseWriter):
    """
    Function writer. Calls your function with every record set.
    """

    skip_to_internal_exception: bool = False
    _function: Callable[..., Any]

    def __init__(self, func: Callable, *, skip_to_internal_exception: bool = False):
        """
        :param func: Function called as func(header, rows).
        :param skip_to_internal_exception: Re-raise any function failure as `OutputError`.
        """
        BaseWriter.__init__(self)
        self.skip_to_internal_exception = skip_to_internal_exception
        self._function = func

    @BaseWriter.writer_base_sender_wrapper
    def write_records(self, header: Header, rows: Rows) -> None:
        if self.skip_to_internal_exception:
            try:
                self._function(tuple(header), [tuple(row) for row in rows])
            except Exception as function_error:
                raise OutputError(
                    "Unable to handle records with Function writer (FuncWriter)."
                ) from function_error
            return
        self._function(tuple(header), [tuple(row) for row in rows])
