"""Exception hierarchy shared across the package.

The CLI maps these onto stable process exit codes, so every raise site in
the library picks the class by failure category, not by module.
"""


class DirspecError(Exception):
    """Base class; generic failure, exit code 1."""

    exit_code = 1


class ConfigError(DirspecError):
    """Invalid or malformed configuration, exit code 2."""

    exit_code = 2


class DataError(DirspecError):
    """Unreadable or inconsistent input data, exit code 3."""

    exit_code = 3


class NumericalError(DirspecError):
    """Numerical failure: non-finite values, non-convergence. Exit code 4."""

    exit_code = 4
