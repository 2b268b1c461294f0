"""Exception types shared across the toolkit.

Invalid arguments raise plain ``ValueError``; the classes here cover the
two failure modes that need to be distinguished at the CLI boundary.
"""


class FormatError(Exception):
    """A file does not conform to its declared binary format."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NumericalError(Exception):
    """A numerical routine produced non-finite values or diverged."""
