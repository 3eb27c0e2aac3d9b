"""Smooth extensions of jets, functions on boxes and manifolds with corners,
and pointwise operations on spaces of smooth maps."""

from .errors import ConstructionError, ContractViolation, DomainError
from .taylor import Box, Jet, JetOracle, MultiIndex, Region

__all__ = [
    "Box",
    "ConstructionError",
    "ContractViolation",
    "DomainError",
    "Jet",
    "JetOracle",
    "MultiIndex",
    "Region",
]
__version__ = "0.1.0"
