"""Exception types shared across the package."""


class DomainError(ValueError):
    """Physically invalid input (zero dipole, negative rate, T <= 0, ...)."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    Carries the full list of problems found, not just the first one.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NumericsError(RuntimeError):
    """Numerical procedure failed (integration, rank detection, ...)."""


class EigenbasisIllConditioned(NumericsError):
    """Eigenbasis too ill-conditioned to propagate with; use the ODE path."""


class AnalysisError(RuntimeError):
    """Trajectory analysis could not be performed (e.g. too few samples)."""
