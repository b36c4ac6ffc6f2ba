"""Exception hierarchy shared across the package.

ValidationError maps to CLI exit code 2, NumericalError to exit code 3.
"""


class SivPhononError(Exception):
    """Base class for all package errors."""


class ValidationError(SivPhononError, ValueError):
    """Bad input: violated precondition, malformed file, inconsistent config."""


class NumericalError(SivPhononError, RuntimeError):
    """Solver or fit failure: non-convergence, residual out of tolerance."""
