"""Exception types shared across the toolkit."""


class HesskitError(Exception):
    """Base class for toolkit errors."""


class NotAdmissibleError(HesskitError):
    """A field fails a convexity/sign precondition.

    Carries the worst offending sample so failures can be inspected.
    """

    def __init__(self, message, worst_index=None, worst_value=None):
        super().__init__(message)
        self.worst_index = worst_index
        self.worst_value = worst_value


class DivergentIntegralError(HesskitError):
    """An integral required to be finite diverges for the given inputs."""


class SchemaError(HesskitError):
    """An input file violates its schema; ``pointer`` locates the offender."""

    def __init__(self, message, pointer="/"):
        super().__init__(f"{message} (at {pointer})")
        self.pointer = pointer
