"""Volume-frozen percolation on the triangular lattice.

Simulator and measurement toolkit: the frozen dynamics with exact small
oracles, near-critical percolation estimators on a shared counter-based
activation field, hole geometry, exceptional-scale recursions, the
associated Markov chains, and deconcentration machinery.
"""

__version__ = "0.1.0"

from .rng import TauField  # noqa: F401
from .lattice import Box, Annulus, Domain, BlockGrid  # noqa: F401
