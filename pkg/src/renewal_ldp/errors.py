"""Exception types shared across the package."""


class RenewalLdpError(Exception):
    """Base class for all package errors."""


class ConfigError(RenewalLdpError, ValueError):
    """A model description is structurally malformed."""


class ModelValidationError(RenewalLdpError, ValueError):
    """A structurally sound model failed a validation check."""


class EligibilityError(RenewalLdpError, ValueError):
    """The requested operation is not defined for this model."""


class ConvergenceError(RenewalLdpError, RuntimeError):
    """An iterative routine exhausted its budget without a certificate."""


class BudgetError(RenewalLdpError, RuntimeError):
    """A computation would exceed a configured resource budget."""
