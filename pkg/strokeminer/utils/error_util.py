"""
Exception hierarchy shared by every stage of the pipeline.

Every error carries a status code which the command line uses as its exit code.
"""

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_HARD_ERROR = 2


class StrokeMinerException(Exception):
    """
    Base exception for pipeline errors.
    """
    code = EXIT_HARD_ERROR

    def __init__(self, message, code=None, subexception=None):
        """
        :param message: The error message.
        :param code: The status code, defaults to the class code.
        :param subexception: The exception that caused this one, if any.
        """
        super().__init__(message)
        if code is not None:
            self.code = code
        self.message = message
        self.subexception = subexception

    def __str__(self):
        return f"StrokeMinerError({self.code}, {self.message})"


class FormatError(StrokeMinerException):
    """Malformed CSV header, model text or sidecar."""


class SequenceError(StrokeMinerException):
    """Frame indices that are not exactly 0..T-1."""


class NonFiniteValueError(StrokeMinerException, ValueError):
    """A coordinate cell that is missing, non-numeric or not finite."""


class InvalidParameter(StrokeMinerException, ValueError):
    """A parameter outside its documented range."""


class InsufficientData(StrokeMinerException):
    """Too few frames or recordings for the requested operation."""


class DegenerateSeries(StrokeMinerException):
    """
    A series with zero variance, for which correlation is undefined.
    """

    def __init__(self, message, axes=(), subexception=None):
        """
        :param message: The error message.
        :param axes: The axes ("x", "y") whose series were degenerate.
        """
        super().__init__(message, subexception=subexception)
        self.axes = tuple(axes)


class EmptyDataset(StrokeMinerException):
    """A dataset without instances."""


class EmptyPartition(StrokeMinerException):
    """Class counts summing to zero."""


class DegenerateSplit(StrokeMinerException):
    """A threshold that leaves one side of the partition empty."""


class SchemaError(StrokeMinerException):
    """Feature vectors or datasets that do not match the expected schema."""


class FoldError(StrokeMinerException):
    """More folds requested than instances or groups available."""


class EmptyEvaluation(StrokeMinerException):
    """Nothing to score."""


class ManifestError(StrokeMinerException):
    """A manifest or store that references missing or duplicate recordings."""
