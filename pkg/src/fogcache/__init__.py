"""Online edge caching in fog radio access networks: NDT formulas, LP bounds and simulation."""

__version__ = "0.1.0"
