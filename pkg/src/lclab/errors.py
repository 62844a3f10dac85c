"""Exception types shared across the laboratory."""


class LabError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LabError):
    """Geometric or mathematical precondition violated (bad domain, bad point)."""


class DegenerateCovectorError(DomainError):
    """Frequency/coupling pair at which the characteristic roots degenerate."""


class ConfigError(LabError):
    """Invalid experiment configuration. Carries every violation found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ContractError(LabError):
    """A runtime contract (symmetry, shape, adjointness) failed."""


class ConvergenceError(LabError):
    """An iterative kernel failed to meet its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResourceLimitError(LabError):
    """Problem size exceeds the configured desk-scale limits."""


class InconclusiveError(LabError):
    """An experiment produced data too noisy to accept or reject."""
