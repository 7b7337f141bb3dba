"""Device-to-system simulation of spintronic spiking neural networks."""

from .rng import RngStream

__version__ = "0.1.0"
__all__ = ["RngStream", "__version__"]
