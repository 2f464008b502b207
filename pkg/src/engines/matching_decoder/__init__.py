# hexinject - Matching Decoder Package
# Detector graphs and minimum-weight perfect matching

from .graph import (
    BOUNDARY,
    SPLIT_LIMIT,
    DetectorGraph,
    Mechanism,
    build_graph,
    dump_graph,
    edge_for,
    edge_weight,
    enumerate_mechanisms,
    merge_probabilities,
    split_signature,
)
from .decoder import BRUTE_FORCE_LIMIT, Correction, MatchingDecoder, brute_force_decode, decode, single_fault_failures

__all__ = [
    "BOUNDARY",
    "DetectorGraph",
    "Mechanism",
    "enumerate_mechanisms",
    "build_graph",
    "dump_graph",
    "edge_for",
    "edge_weight",
    "merge_probabilities",
    "SPLIT_LIMIT",
    "split_signature",
    "BRUTE_FORCE_LIMIT",
    "Correction",
    "MatchingDecoder",
    "brute_force_decode",
    "decode",
    "single_fault_failures",
]
