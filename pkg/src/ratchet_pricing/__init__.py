"""Pricing under a within-day no-increase rule with two-state stochastic demand."""

__version__ = "0.1.0"

from .errors import (
    ArchiveFormatError,
    DomainError,
    InteriorRegimeError,
    UnsupportedConfigurationError,
    ValidationError,
)
from .model import MarketParams, PathOutcome, cs, path_outcome, profit, quantity, static_monopoly_price
from .policy import FlexiblePolicy, Policy, RegulatedClosedFormPolicy, roll_out

__all__ = [
    "__version__",
    "ArchiveFormatError",
    "DomainError",
    "FlexiblePolicy",
    "InteriorRegimeError",
    "MarketParams",
    "PathOutcome",
    "Policy",
    "RegulatedClosedFormPolicy",
    "UnsupportedConfigurationError",
    "ValidationError",
    "cs",
    "path_outcome",
    "profit",
    "quantity",
    "roll_out",
    "static_monopoly_price",
]
