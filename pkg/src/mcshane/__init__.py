"""Harmonic measures on planar trees, flip codings of arcs, and McShane gap sums."""
from .planar_tree import EdgeAddress, EdgeRegion, RationalPath, RootRegion, TreeShape
from .harmonic import RatioForm, TableForm, gap, gap_n, gap_partition_sum, green_sum, partial_gap_sum
from .flips import LabelTree, Slope, build_surface, torus
from .cusp import LambdaForm, mcshane_term, modular_torus_form

__all__ = [
    "EdgeAddress", "EdgeRegion", "RationalPath", "RootRegion", "TreeShape",
    "RatioForm", "TableForm", "gap", "gap_n", "gap_partition_sum", "green_sum", "partial_gap_sum",
    "LabelTree", "Slope", "build_surface", "torus",
    "LambdaForm", "mcshane_term", "modular_torus_form",
]
