"""
Fuzzy private matching: protocols, primitives and a two-party harness
"""

from typing import Final

__version__: Final[str] = "0.1.0"
