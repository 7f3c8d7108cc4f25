"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ValidityError(DomainError):
    """A bound was requested outside its validity range."""


class InvalidSupportError(DomainError):
    """A perturbation region puts mass where ``f <= u``."""


class PerturbationTooLargeError(ValueError):
    """The requested perturbation exceeds the admissible maximum."""


class NoValidPlanError(ValueError):
    """No support point lies strictly above the threshold."""
