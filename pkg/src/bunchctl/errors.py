"""Exception hierarchy shared by the library and the command line front end."""


class BunchError(Exception):
    """Base class for all errors raised by bunchctl."""


class ParseError(BunchError):
    """Malformed input document."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(BunchError):
    """Input is well formed but violates a mathematical precondition."""

    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class InadmissibleError(ValidationError):
    """A modification step fails the admissibility criterion."""


class UnsupportedError(BunchError):
    """Input lies outside the supported ring class (e.g. several relations)."""


class SizeLimitError(UnsupportedError):
    """Exponential enumeration refused because the input is too large."""
