"""Gaussian boson sampling simulation for max-clique search.

Encodes weighted graphs into squeezed-light experiments with optional
per-node displacement, evaluates outcome probabilities exactly through
hafnians and loop hafnians, draws subgraph samples under squeezing,
displacement and photon-loss budgets, and scores classical max-clique
post-processing against baseline samplers.
"""

__version__ = "0.1.0"

from .errors import ResourceGuardError, ValidationError

__all__ = ["ResourceGuardError", "ValidationError", "__version__"]
