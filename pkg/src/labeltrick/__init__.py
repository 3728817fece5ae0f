"""Labeling tricks for GNN link prediction: subgraphs, labels, 1-WL, a numpy GNN."""

from .graph import Graph, Subgraph, extract_enclosing_subgraph, twin_link_graph
from .labeling import LabelingScheme, NodeLabels, apply_labeling, drnl_hash
from .wl import wl_link_code, wl_refine

__all__ = [
    "Graph",
    "Subgraph",
    "extract_enclosing_subgraph",
    "twin_link_graph",
    "LabelingScheme",
    "NodeLabels",
    "apply_labeling",
    "drnl_hash",
    "wl_link_code",
    "wl_refine",
]
