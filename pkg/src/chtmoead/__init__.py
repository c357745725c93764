"""MOEA/D with penalty-based constraint handling on constrained real-world problems."""

__version__ = "0.1.0"
