"""Exception types shared across the package."""


class MalformedWordError(ValueError):
    """A word uses a letter the presentation does not declare, or cannot be parsed."""


class ResourceError(RuntimeError):
    """A computation would exceed a configured size limit."""

    def __init__(self, message, completed=None):
        super().__init__(message)
        self.completed = completed


class OutOfRadiusError(LookupError):
    """A query falls outside the region a distance oracle has computed."""


class PreconditionError(ValueError):
    """Arguments violate the documented precondition of an operation."""
