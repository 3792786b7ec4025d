"""Exception types shared across the package."""


class ArffError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(ArffError):
    """Array shapes do not line up."""


class ConstantColumnError(ArffError):
    """A data column has zero sample standard deviation and cannot be normalized."""

    def __init__(self, column: int, which: str = "x"):
        self.column = column
        self.which = which
        super().__init__(f"{which} column {column} is constant (std = 0)")


class SingularSystemError(ArffError):
    """The unregularized Gram matrix is rank deficient; retry with method='svd'."""


class NonFiniteAmplitudeError(ArffError):
    """An amplitude solve produced NaN or Inf entries."""


class DivergedLossError(ArffError):
    """SGD training loss grew past the divergence threshold."""


class NotOneDimensionalError(ArffError):
    """The FFT spectrum oracle only supports one-dimensional targets."""


class BadMagicError(ArffError):
    """An IDX file starts with an unexpected magic number."""


class TruncatedFileError(ArffError):
    """An IDX file is shorter than its header promises."""


class CountMismatchError(ArffError):
    """Image and label files disagree on the number of records."""


class ConfigParseError(ArffError):
    """A config file line could not be parsed."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ConfigValidationError(ArffError):
    """A config field has an invalid or inconsistent value."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
