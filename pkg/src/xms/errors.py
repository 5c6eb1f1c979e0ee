"""Exception hierarchy shared by all xms modules.

Each exception carries a short machine-readable ``code`` so callers (and the
CLI) can map failures to exit codes and distinguish error classes without
parsing messages.
"""


class XmsError(Exception):
    """Base class; ``code`` is a short stable identifier."""

    exit_code = 1

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ConfigError(XmsError):
    """Invalid configuration, hyperparameters, or CLI arguments."""

    exit_code = 2


class DataError(XmsError):
    """Malformed or inconsistent input data (files or in-memory)."""

    exit_code = 3


class NumericalError(XmsError):
    """Numerical failure: singular systems, divergence, no structure."""

    exit_code = 4
