"""cutlab: an exact-rational branch-and-cut laboratory."""

__version__ = "0.1.0"
