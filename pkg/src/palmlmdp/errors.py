"""Exception types shared across the package."""


class LmdpError(Exception):
    """Base class for all errors raised by palmlmdp."""


class ParameterError(LmdpError, ValueError):
    """Invalid configuration value (filter parameters, block size, k...)."""


class InputError(LmdpError, ValueError):
    """Input data that violates an operation's preconditions."""


class FormatError(LmdpError, ValueError):
    """Malformed file contents.

    ``offset`` is the byte position where parsing failed, when known.
    """

    def __init__(self, message, offset=None, path=None):
        self.offset = offset
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"byte {offset}")
        if where:
            message = f"{': '.join(where)}: {message}"
        super().__init__(message)
