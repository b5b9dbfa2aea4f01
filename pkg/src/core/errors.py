"""
Error hierarchy

Every failure the toolkit raises on purpose derives from SpecReconError.
The CLI maps the class to a process exit code.
"""


class SpecReconError(Exception):
    """Base class for toolkit errors"""

    exit_code: int = 1


class ConfigurationError(SpecReconError, ValueError):
    """Invalid manifest, protocol, flag or call parameters"""

    exit_code = 2


class DataError(SpecReconError, ValueError):
    """Malformed or out-of-range spectral data"""

    exit_code = 3


class NumericalError(SpecReconError):
    """Numerical failure (eigensolver, degenerate statistics)"""

    exit_code = 4
