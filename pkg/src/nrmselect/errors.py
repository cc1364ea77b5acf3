"""Exception hierarchy."""


class NrmError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(NrmError, ValueError):
    pass


class DegenerateProblemError(NrmError):
    """Raised when ``lambda_max == 0``, i.e. the zero matrix solves every instance."""


class InfeasibleDualError(NrmError):
    """A dual point violates the spectral constraint or the Huber box."""


class DatasetFormatError(NrmError):
    """Malformed dataset file.

    Attributes
    ----------
    field : str
        Name of the header field or section that failed to parse.
    offset : int
        Byte offset at which the problem was detected.
    """

    def __init__(self, message, field=None, offset=None):
        self.field = field
        self.offset = offset
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if offset is not None:
            where.append(f"offset {offset}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class ConfigError(NrmError, ValueError):
    pass
