"""Error types shared by every depthguard app.

The command layer maps `DepthGuardError` to exit status 2 (usage or
validation problem); anything else is an internal error.
"""


class DepthGuardError(Exception):
    """Base class for all anticipated failures."""


class FormatError(DepthGuardError, ValueError):
    """A file does not follow its binary or line-oriented layout."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class ValidationError(DepthGuardError, ValueError):
    """A value violates a domain invariant."""

    def __init__(self, message, record_id=None):
        self.record_id = record_id
        if record_id is not None:
            message = f"record {record_id!r}: {message}"
        super().__init__(message)


class DimensionMismatchError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class InsufficientSamplesError(ValidationError):
    pass


class UnknownClassError(ValidationError):
    pass


class SplitSizeError(ValidationError):
    pass


class SizeMismatchError(ValidationError):
    pass


class FactorizationError(DepthGuardError, ArithmeticError):
    """A class covariance could not be factorized."""

    def __init__(self, label, ridge):
        self.label = label
        self.ridge = ridge
        super().__init__(
            f"covariance of class {label} is not positive definite at ridge={ridge!r}; "
            "raise --ridge (e.g. 1e-3) to regularize it"
        )
