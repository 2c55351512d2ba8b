"""Error hierarchy shared by every module.

ValidationError and its subclasses map to CLI exit code 2,
CapacityError to exit code 3.
"""

from __future__ import annotations


class TrotterForgeError(Exception):
    """Base class for all library errors."""


class ValidationError(TrotterForgeError):
    """Input violates a contract precondition."""


class DomainError(ValidationError):
    """A parameter is outside its mathematical domain."""


class DimensionError(ValidationError):
    """Lattice or matrix dimensions are inconsistent."""


class IndexRangeError(ValidationError):
    """A site or pair index is out of range."""


class CapacityError(TrotterForgeError):
    """Request exceeds the dense-verification size cap."""
