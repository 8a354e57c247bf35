"""
    Base abstract class for all writers.
"""

import math
from typing import Any, Callable, Sequence

from vmm_solver.exceptions import OutputError

Header = Sequence[str]
Rows = Sequence[Sequence[Any]]


def format_value(value: Any) -> str:
    """
    Text form of one record field: blank for None, shortest round-trip decimal for floats.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    if hasattr(value, "dtype"):
        return format_value(value.item())
    return str(value)


# Above public field because of requirements below.
def _writer_base_sender_wrapper(
    func: Callable[..., Any]
) -> Callable[..., bool]:
    """
    Wrapper for writer write methods that converts I/O failures to `OutputError`
    and the result to a success state (boolean).
    """

    def wrapper(*args, **kwargs) -> bool:
        fail_fast = kwargs.pop("fail_fast", True)
        try:
            func(*args, **kwargs)
        except OutputError:
            if fail_fast:
                raise
            return False
        except OSError as io_error:
            if fail_fast:
                raise OutputError(f"Writer failed: {io_error}") from io_error
            return False
        return True

    return wrapper


class BaseWriter:
    """
    Base writer class. Cannot be used as writer.
    Abstract class for implementing writers of tabular records.
    """

    # For inherited.
    @_writer_base_sender_wrapper
    def write_records(self, header: Header, rows: Rows) -> None:
        """
        Handles one record set (header and rows of raw values).
        Should be inherited from BaseWriter and implemented in writers.
        """
        raise NotImplementedError()

    @staticmethod
    def writer_base_sender_wrapper(
        func: Callable[..., Any]
    ) -> Callable[..., bool]:
        """
        Wrapper for writers write methods that converts result to success state.
        """
        return _writer_base_sender_wrapper(func)


__all__ = ["BaseWriter", "format_value"]
