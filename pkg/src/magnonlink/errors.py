"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the command-line
layer can emit single-line ``code: message`` records and map failures to
exit statuses (1 usage, 2 input/validation, 3 numerical).
"""


class MagnonlinkError(Exception):
    """Base class for all package errors."""

    code = "error"
    exit_status = 2


class ValidationError(MagnonlinkError, ValueError):
    """A domain object was constructed with invalid values."""

    code = "params"
    exit_status = 2


class ConfigError(MagnonlinkError):
    """Configuration file or override is malformed."""

    code = "config"
    exit_status = 2


class DataError(MagnonlinkError):
    """An input data file cannot be parsed or is inconsistent."""

    code = "data"
    exit_status = 2


class NumericalError(MagnonlinkError):
    """A computation failed numerically (non-convergence, bad span, ...)."""

    code = "numeric"
    exit_status = 3


class SingularInputError(NumericalError):
    """Model evaluation hit a pole for the supplied inputs."""

    code = "singular"
    exit_status = 3
