"""LT-coded non-coherent MFSK over Rayleigh fading: rate profiles and link energy."""

__version__ = "0.1.0"

from .errors import LTEnergyError, NumericalError  # noqa: E402

__all__ = ["LTEnergyError", "NumericalError", "__version__"]
