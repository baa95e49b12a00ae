"""Exception types shared across the package.

Each operation signals a distinct failure mode so callers (and the command
line driver) can map problems to exit codes without string matching.
"""
from __future__ import annotations


class BondmixError(ValueError):
    """Base class for all package-specific errors."""


class ValidationError(BondmixError):
    """A constructed object violates one of its structural invariants."""


class PreconditionError(BondmixError):
    """An operation was called outside its stated domain."""


class UnsupportedFieldError(BondmixError):
    """The field kind does not support the requested operation."""


class DegenerateRegionError(BondmixError):
    """The requested region is too small to carry an interface problem."""


class SizeLimitError(BondmixError):
    """An exhaustive operation was asked to exceed its hard size limit."""


class RationalDirectionError(BondmixError):
    """A lattice (integer) direction vector was required."""


class InvalidBasisError(BondmixError):
    """A set of vectors is not an orthogonal integer basis."""


class InvalidTargetError(BondmixError):
    """A design target is outside the representable open unit ranges."""


class PeriodSearchError(BondmixError):
    """No admissible period was found below the search cap."""


class OutOfDomainError(BondmixError):
    """A probe ball or cell leaves the domain the field is defined on."""
