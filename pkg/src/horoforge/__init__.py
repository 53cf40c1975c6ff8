"""Finite-state machines for horosphere graphs in hyperbolic RACGs."""

__version__ = "0.1.0"

from .graphdef import (  # noqa: F401
    DefiningGraph,
    GraphError,
    max_clique_size,
    validate_defining_graph,
)
from .rays import Ray, assemble_word, busemann, prefix_suffix_decompose  # noqa: F401
from .words import Word, normalize, word_distance  # noqa: F401

__all__ = [
    "DefiningGraph",
    "GraphError",
    "Ray",
    "Word",
    "assemble_word",
    "busemann",
    "max_clique_size",
    "normalize",
    "prefix_suffix_decompose",
    "validate_defining_graph",
    "word_distance",
    "__version__",
]
