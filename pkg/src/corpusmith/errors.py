"""Exception types shared across the package."""


class CorpusmithError(Exception):
    """Base class for errors raised by this package."""


class DataError(CorpusmithError):
    """Invalid input data or parameters. Maps to CLI exit code 2."""


class UsageError(CorpusmithError):
    """Malformed command line. Maps to CLI exit code 1."""
