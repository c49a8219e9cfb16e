"""Exception types shared across the toolkit."""


class HornForgeError(Exception):
    """Base class for all toolkit errors."""


class InputError(HornForgeError):
    """Malformed or ill-sorted user input (programs, models, SMT-LIB text)."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ResourceError(HornForgeError):
    """A configured resource cap was exceeded; the answer is unknown, never wrong."""


class UnsupportedFragment(HornForgeError):
    """The Horn system uses a construct the requested operation cannot handle."""


class BudgetExceeded(ResourceError):
    """Wall-clock or iteration budget ran out."""
