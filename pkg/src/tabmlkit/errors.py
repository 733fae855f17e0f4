"""Exception hierarchy shared by all modules.

DataError covers contract violations in inputs (bad files, shapes, labels);
NumericalError covers algorithmic failures (non-convergence). The CLI maps
DataError -> exit 2 and NumericalError -> exit 3.
"""


class ToolkitError(Exception):
    pass


class DataError(ToolkitError):
    pass


class NumericalError(ToolkitError):
    pass


class ConfigError(ToolkitError):
    """Invalid run configuration or flags (CLI exit code 1)."""


class FileUnreadable(DataError):
    pass


class RaggedRow(DataError):
    def __init__(self, row_index, message=None):
        self.row_index = row_index
        super().__init__(message or f"row {row_index} has a different field count than the header")


class ParseFailure(DataError):
    def __init__(self, column, row, message=None):
        self.column = column
        self.row = row
        super().__init__(message or f"could not parse column {column!r} at row {row} as numeric")


class EmptyInput(DataError):
    pass


class NoNumericColumns(DataError):
    pass


class ColumnNotFound(DataError):
    pass


class ColumnNotCategorical(DataError):
    pass


class UnseenLevel(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyMatrix(DataError):
    pass


class LabelNotBinary(DataError):
    pass


class RatioSumInvalid(DataError):
    pass


class CountMismatch(DataError):
    pass


class TooFewValues(DataError):
    pass


class TooFewRows(DataError):
    pass


class NotSymmetric(DataError):
    pass


class KTooLarge(DataError):
    pass


class SingleCluster(DataError):
    pass


class TooFewPoints(DataError):
    pass


class RowMismatch(DataError):
    pass


class SingleClass(DataError):
    pass


class ClassTooSmall(DataError):
    pass


class LengthMismatch(DataError):
    pass


class TooManyFeatures(DataError):
    pass


class EmptyBackground(DataError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)
