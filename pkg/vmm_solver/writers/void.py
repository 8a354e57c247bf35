"""
    Void writer. Discards records (dry runs, tests).
"""

from vmm_solver.writers.base import BaseWriter, Header, Rows


class VoidWriter(BaseWriter):
    """
    Discards every record set, only counting them.
    """

    def __init__(self):
        BaseWriter.__init__(self)
        self.record_sets = 0

    @BaseWriter.writer_base_sender_wrapper
    def write_records(self, header: Header, rows: Rows) -> None:
        self.record_sets += 1
