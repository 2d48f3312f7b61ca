"""Exception hierarchy shared across the package."""


class WavemleError(Exception):
    """Base class for all package errors."""


class ConfigError(WavemleError):
    """Invalid physical or numerical parameter (CLI exit code 2)."""


class SizingError(ConfigError):
    """Requested state arrays exceed the allocation guard."""


class DataIntegrityError(WavemleError):
    """Trajectory data is malformed or non-finite (CLI exit code 3)."""


class DegenerateDataError(WavemleError):
    """Estimator undefined: all left-endpoint displacements are zero (CLI exit code 4)."""
