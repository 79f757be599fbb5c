"""Cable indices, word reduction, and degree-weighted volume bounds."""

__version__ = "0.1.0"

from .errors import CableDegError

__all__ = ["CableDegError", "__version__"]
