"""Simulation of molecular absorption and its effect on THz links."""

__all__ = [
    "__version__",
]

__version__ = "0.1.0"
