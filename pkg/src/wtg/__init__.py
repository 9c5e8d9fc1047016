"""Value approximation for weighted timed games."""

__version__ = "0.1.0"
