"""
    CSV file writer. Files are replaced atomically.
"""

import csv
import os
from typing import Union

from vmm_solver.internal.files import atomic_write_text
from vmm_solver.writers.base import BaseWriter, Header, Rows, format_value


class CsvFileWriter(BaseWriter):
    """
    Writes records as a comma separated file with a header line.
    """

    def __init__(self, path: Union[str, os.PathLike]):
        """
        :param path: Destination file (replaced on every write).
        """
        BaseWriter.__init__(self)
        self.path = os.fspath(path)

    @BaseWriter.writer_base_sender_wrapper
    def write_records(self, header: Header, rows: Rows) -> None:
        def write(stream) -> None:
            writer = csv.writer(stream, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])

        atomic_write_text(self.path, write)
