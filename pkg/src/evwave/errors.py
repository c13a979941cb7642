"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ConfigError -> 1 (usage),
DataError and subclasses -> 2 (bad input data), OSError -> 3 (I/O).
"""


class EvwaveError(Exception):
    """Base class for all package errors."""


class ConfigError(EvwaveError):
    """Invalid configuration or argument combination."""


class DataError(EvwaveError):
    """Input data violates a format or domain contract."""


class ParseError(DataError):
    """Malformed record in an event file; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ValidationError(DataError):
    """Well-formed record with out-of-contract values."""
