"""
    Atomic file output (temporary file in the target directory, then rename).
"""

import os
import tempfile
from typing import Callable, TextIO

from vmm_solver.exceptions import OutputError


def atomic_write_text(path: str, write: Callable[[TextIO], None]) -> None:
    """
    Calls `write` with a text stream and atomically moves the result to `path`.
    Readers never observe a partially written file.

    :param path: Destination path.
    :param write: Callback receiving the open stream.
    """
    directory = os.path.dirname(os.path.abspath(path))
    try:
        file_descriptor, temporary_path = tempfile.mkstemp(
            prefix=".vmm-", suffix=".tmp", dir=directory
        )
    except OSError as create_error:
        raise OutputError(
            f"Unable to create temporary file next to {path}: {create_error}"
        ) from create_error

    try:
        with os.fdopen(file_descriptor, "w", encoding="utf-8", newline="") as stream:
            write(stream)
        os.replace(temporary_path, path)
    except OSError as write_error:
        _remove_quietly(temporary_path)
        raise OutputError(f"Unable to write {path}: {write_error}") from write_error
    except BaseException:
        _remove_quietly(temporary_path)
        raise


def _remove_quietly(path: str) -> None:
    try:
        os.remove(path)
    except OSError:
        pass
