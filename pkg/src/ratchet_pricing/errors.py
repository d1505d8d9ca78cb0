"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Invalid parameters, grids or configuration values."""


class UnsupportedConfigurationError(ValidationError):
    """A valid parameter set that an operation is not defined for."""


class DomainError(ValueError):
    """Argument outside the domain where a formula is well-defined."""


class InteriorRegimeError(ValueError):
    """The first-order condition has no sign-changing bracket."""


class ArchiveFormatError(ValueError):
    """Fatal problem with a price archive (missing header, too many bad rows)."""
