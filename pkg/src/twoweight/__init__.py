"""Testing conditions for two-weight inequalities of vector-valued positive dyadic operators."""

from .grid import CubeId, GridSpec
from .measure import DisjointAllocation, LeafMeasure
from .operator import ExponentTriple
from .sparse import CubeFamily

__all__ = ["CubeFamily", "CubeId", "DisjointAllocation", "ExponentTriple", "GridSpec", "LeafMeasure"]
