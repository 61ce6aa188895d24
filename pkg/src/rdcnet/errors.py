"""Exception hierarchy; the CLI maps these onto exit codes."""


class RdcError(Exception):
    """Base class for all package errors."""


class InputError(RdcError):
    """Malformed or unusable input data (CLI exit code 1)."""


class ComputationError(RdcError):
    """A numerical step could not be carried out (CLI exit code 2)."""


class PriceFormatError(InputError):
    """A price or index CSV row violates the file format."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
