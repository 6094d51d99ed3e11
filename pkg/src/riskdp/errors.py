"""Exception types shared across the package."""


class RiskDpError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(RiskDpError):
    """A model, document, or constructed object violates its invariants."""


class DomainError(RiskDpError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedModelError(RiskDpError):
    """The requested solver does not handle this model family."""


class UnsupportedCombinationError(RiskDpError):
    """The risk mapping / distribution combination has no exact evaluation."""


class InfeasiblePolicyError(RiskDpError):
    """A policy prescribes an inadmissible control at a reachable node."""


class ResourceLimitError(RiskDpError):
    """A configured resource budget was exceeded."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count
