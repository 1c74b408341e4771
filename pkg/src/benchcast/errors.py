"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: ConfigError -> 1,
DataError -> 2, NumericError -> 3.
"""


class BenchcastError(Exception):
    """Base class for all package errors."""


class ConfigError(BenchcastError):
    """Invalid configuration value or unusable config file."""


class DataError(BenchcastError):
    """Malformed or inconsistent input data."""


class CorpusFormatError(DataError):
    """A corpus/embedding/findings file violates its schema."""


class CodeParseError(DataError):
    """A code sample could not be tokenized or parsed."""

    def __init__(self, message, line=None, offset=None):
        super().__init__(message)
        self.line = line
        self.offset = offset


class NumericError(BenchcastError):
    """Numerical failure (divergence, non-finite values, singular system)."""


class ModelFormatError(DataError):
    """A serialized model file is corrupt or has an unsupported version."""
