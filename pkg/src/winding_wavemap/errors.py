"""Exception types shared across the laboratory."""


class ChartDomainError(ValueError):
    """Chart map evaluated on the circle where it is undefined."""


class ConfigError(ValueError):
    """Invalid manifold or run configuration."""


class CFLViolation(ValueError):
    """Requested time step exceeds the stability bound."""


class BlowupDetected(RuntimeError):
    """Non-finite field values appeared; the run is under-resolved past this time."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"non-finite field values at t={t:.6g}")


class NoScaleError(ValueError):
    """Spherical energy too small for a concentration scale to exist."""


class OutOfDomain(ValueError):
    """Diagnostic requested outside the resolved grid or time range."""


class UnderResolved(ValueError):
    """Concentration scale has dropped below the grid resolution."""


class StepFailure(RuntimeError):
    """ODE integrator failed to meet its tolerance."""
