"""Desk-scale satellite image search: learned binary hash codes with
Hamming-radius retrieval plus geospatial, temporal, and multi-label filtering."""

from .codes import HashCode
from .hamming_index import CodeTable, Neighbor, hamming_distance
from .hashing import HashingHead, Triplet, infer_code

__all__ = [
    "HashCode",
    "CodeTable",
    "Neighbor",
    "hamming_distance",
    "HashingHead",
    "Triplet",
    "infer_code",
]

__version__ = "0.1.0"
