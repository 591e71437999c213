"""Exception types mapped to CLI exit codes."""


class ConfigIOError(Exception):
    """Unreadable or unparsable input file (exit code 2)."""


class NumericalError(Exception):
    """Non-convergent root find, singular covariance, or similar (exit code 4)."""
