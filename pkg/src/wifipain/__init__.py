"""Neighborhood Wi-Fi channel selection by minimising total potential pain."""

__version__ = "0.1.0"

from .errors import DataError, DimensionError, NodeLimitExceeded, SolverError, WifiPainError
from .pain import (ChannelAllocation, Neighborhood, PainBreakdown, PainMatrix, harden,
                   per_home_pain, total_pain)

__all__ = [
    "ChannelAllocation", "DataError", "DimensionError", "Neighborhood", "NodeLimitExceeded",
    "PainBreakdown", "PainMatrix", "SolverError", "WifiPainError", "harden", "per_home_pain",
    "total_pain",
]
