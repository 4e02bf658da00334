"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PrivacyRDEError(Exception):
    exit_code = 1


class ValidationError(PrivacyRDEError, ValueError):
    """Malformed input: bad distributions, mismatched alphabets, bad files."""

    exit_code = 1


class InfeasibleError(PrivacyRDEError):
    """No channel satisfies the requested constraints.

    ``estimate`` holds whatever bound was computed while deciding
    infeasibility (e.g. the Gamma(D) estimate for an (D, E) request).
    """

    exit_code = 2

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConvergenceError(PrivacyRDEError):
    """Iterative solver hit its iteration cap."""

    exit_code = 3

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
