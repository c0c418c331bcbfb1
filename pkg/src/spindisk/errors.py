"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the physically valid domain (e.g. nonpositive inertia)."""


class InfeasibleInertiaError(DomainError):
    """Inertia entry below the rest value, so no real mass offset produces it."""


class ConfigError(ValueError):
    """Invalid scenario or CLI configuration."""


class IntegrationError(RuntimeError):
    """A simulation step left the valid state space; the run is aborted.

    The attribute ``t`` holds the start time of the failing step.
    """

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t
