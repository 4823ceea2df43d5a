"""Two-time states, process matrices and the NBTS causal polytope."""

__version__ = "0.1.0"
