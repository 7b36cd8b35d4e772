"""Multiple-model estimation over a parameter box with vertex-model reduction."""
from __future__ import annotations

__version__ = "0.1.0"
