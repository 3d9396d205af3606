# src/core/errors.py
"""Exceptions raised by the simulation library and mapped to CLI exit codes."""


class TmssError(Exception):
    """Base class for every error the library raises on purpose."""

    exit_code = 1


class ConfigError(TmssError):
    """A run configuration failed validation. Carries every violation, not just the first."""

    exit_code = 2

    def __init__(self, violations):
        self.violations = list(violations)
        lines = [f"{path}: {reason}" for path, reason in self.violations]
        super().__init__("; ".join(lines) if lines else "invalid configuration")


class DomainError(TmssError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 3


class NonConvergentQuadrature(TmssError):
    """Adaptive quadrature did not reach the requested tolerance."""

    exit_code = 4

    def __init__(self, message, error_estimate = None):
        self.error_estimate = error_estimate
        if error_estimate is not None:
            message = f"{message} (achieved error estimate {error_estimate:.3e})"
        super().__init__(message)


class NumericalFailure(TmssError):
    """A factorization or eigen-solve failed, or a matrix is inconsistent."""

    exit_code = 5


class UnphysicalState(TmssError):
    """An assembled covariance matrix violates the uncertainty principle."""

    exit_code = 6

    def __init__(self, message, min_eigenvalue = None):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message)


class VerificationFailed(TmssError):
    """At least one oracle cross-check of the `verify` suite failed."""

    exit_code = 7
