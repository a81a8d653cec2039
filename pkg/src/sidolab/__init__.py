"""Exact homomorphism counting, tree-indexed random walks, and Sidorenko-type audits."""

from .errors import BudgetExceeded, DecompositionError, GraphError, PreconditionError, SidolabError
from .graph import Graph, WeightedGraph, build_named_graph, parse_graph, serialize_graph
from .homs import count_homomorphisms, sidorenko_check
from .treedecomp import TreeDecomposition, find_strong_decomposition, validate_strong

__all__ = [
    "BudgetExceeded",
    "DecompositionError",
    "Graph",
    "GraphError",
    "PreconditionError",
    "SidolabError",
    "TreeDecomposition",
    "WeightedGraph",
    "build_named_graph",
    "count_homomorphisms",
    "find_strong_decomposition",
    "parse_graph",
    "serialize_graph",
    "sidorenko_check",
    "validate_strong",
]

__version__ = "0.1.0"
