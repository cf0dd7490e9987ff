import logging
import time

log = logging.getLogger(__name__)


class StageTimer:
    """
    Logs how long a pipeline stage took.

    Usage::

        with StageTimer("windows"):
            ...
    """
    def __init__(self, stage, logger=None):
        """
        :param stage: The stage name printed in the log line.
        :param logger: The logger to use, defaults to this module's logger.
        """
        self.stage = stage
        self.logger = logger or log
        self.starttime = None
        self.elapsed = None

    def __enter__(self):
        self.starttime = time.perf_counter()
        self.logger.info(f"[{self.stage}] start")
        return self

    def __exit__(self, exc_type, exc_value, traceback):
        self.elapsed = time.perf_counter() - self.starttime
        if exc_type is None:
            self.logger.info(f"[{self.stage}] done in {self.elapsed:.2f} s")
        else:
            self.logger.info(f"[{self.stage}] failed after {self.elapsed:.2f} s")
        return False
