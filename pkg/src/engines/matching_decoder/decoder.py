# hexinject - Minimum-Weight Perfect Matching Decoder
# Exact blossom matching over shortest-path distances, plus a brute-force oracle

from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.logging.logger import setup_logger
from src.schemas.circuit import Circuit
from .graph import BOUNDARY, DetectorGraph, Mechanism, enumerate_mechanisms

logger = setup_logger(__name__)

# Integer weight resolution handed to the blossom algorithm
WEIGHT_SCALE = 10**9
BRUTE_FORCE_LIMIT = 14


class Correction(BaseModel):
    """Matched detector pairs (BOUNDARY = -1) and the predicted observable flip."""
    model_config = ConfigDict(frozen=True)

    pairs: Tuple[Tuple[int, int], ...] = ()
    flip: bool = False
    weight: float = 0.0


class MatchingDecoder:
    """
    Decodes Stage-II syndromes on one detector graph.

    Shortest paths are computed per source detector on demand and kept;
    decoded syndromes are memoised.
    """

    def __init__(self, detector_graph: DetectorGraph, cache_size: int = 1 << 16):
        self.detector_graph = detector_graph
        self.graph = detector_graph.graph
        self._paths: Dict[int, Tuple[Dict[int, float], Dict[int, bool]]] = {}
        self._decode = lru_cache(maxsize=cache_size)(self._decode_uncached)

    def _from(self, source: int) -> Tuple[Dict[int, float], Dict[int, bool]]:
        if source not in self._paths:
            if source not in self.graph:
                raise ValueError(f"Detector {source} is not a node of the detector graph")
            distances, paths = nx.single_source_dijkstra(self.graph, source, weight="weight")
            flips = {}
            for target, path in paths.items():
                parity = False
                for a, b in zip(path[:-1], path[1:]):
                    parity ^= bool(self.graph.edges[a, b]["flips_observable"])
                flips[target] = parity
            self._paths[source] = (distances, flips)
        return self._paths[source]

    def distance(self, u: int, v: int) -> Optional[float]:
        return self._from(u)[0].get(v)

    def path_flip(self, u: int, v: int) -> bool:
        return self._from(u)[1].get(v, False)

    def decode(self, fired: Iterable[int]) -> Correction:
        """
        Minimum-weight perfect matching of the fired detectors.

        Each fired detector gets a boundary copy; copies pair with each other
        at zero cost, so any detector may end on the boundary.

        Raises:
            ValueError: If a detector is not in the graph or cannot reach
                any partner
        """
        return self._decode(tuple(sorted(set(int(d) for d in fired))))

    def _decode_uncached(self, fired: Tuple[int, ...]) -> Correction:
        if not fired:
            return Correction()

        matching_graph = nx.Graph()
        for i, u in enumerate(fired):
            to_boundary = self.distance(u, BOUNDARY)
            if to_boundary is not None:
                matching_graph.add_edge(("d", u), ("b", u), weight=round(to_boundary * WEIGHT_SCALE))
            for v in fired[i + 1:]:
                d = self.distance(u, v)
                if d is not None:
                    matching_graph.add_edge(("d", u), ("d", v), weight=round(d * WEIGHT_SCALE))
                matching_graph.add_edge(("b", u), ("b", v), weight=0)
            if ("d", u) not in matching_graph:
                raise ValueError(f"Detector {u} cannot be matched: no path to another detector or the boundary")

        mates = nx.min_weight_matching(matching_graph, weight="weight")
        pairs: List[Tuple[int, int]] = []
        flip = False
        total = 0.0
        for a, b in mates:
            if a[0] == "b" and b[0] == "b":
                continue
            if a[0] == "b":
                a, b = b, a
            u = a[1]
            v = BOUNDARY if b[0] == "b" else b[1]
            if v != BOUNDARY and v < u:
                u, v = v, u
            pairs.append((u, v))
            flip ^= self.path_flip(u, v)
            total += self.distance(u, v)
        matched = {u for pair in pairs for u in pair if u != BOUNDARY}
        if matched != set(fired):
            raise ValueError(f"No perfect matching covers fired detectors {sorted(set(fired) - matched)}")
        return Correction(pairs=tuple(sorted(pairs)), flip=flip, weight=total)

    def predict(self, syndromes: np.ndarray, columns: Iterable[int]) -> np.ndarray:
        """
        Predicted observable flips for a (shots x detectors) boolean matrix.

        Args:
            syndromes: Detector bits of the shots to decode
            columns: Detector indices of the matrix columns

        Returns:
            Boolean vector, one prediction per shot
        """
        columns = np.asarray(list(columns), dtype=np.intp)
        predictions = np.zeros(syndromes.shape[0], dtype=bool)
        for shot, row in enumerate(syndromes):
            fired = columns[np.flatnonzero(row)]
            if fired.size:
                predictions[shot] = self.decode(fired.tolist()).flip
        return predictions


def decode(detector_graph: DetectorGraph, fired: Iterable[int]) -> Correction:
    """One-off decode; use MatchingDecoder to reuse shortest paths across syndromes."""
    return MatchingDecoder(detector_graph).decode(fired)


def brute_force_decode(
    detector_graph: DetectorGraph,
    fired: Iterable[int],
    decoder: Optional[MatchingDecoder] = None,
) -> Correction:
    """
    Exhaustive minimum over every pairing of the fired detectors, boundary included.

    Raises:
        ValueError: If more than 14 detectors fired or no pairing exists
    """
    nodes = tuple(sorted(set(int(d) for d in fired)))
    if len(nodes) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"Brute-force decoding supports at most {BRUTE_FORCE_LIMIT} fired detectors, got {len(nodes)}")
    if not nodes:
        return Correction()
    decoder = decoder or MatchingDecoder(detector_graph)
    n = len(nodes)
    inf = float("inf")

    @lru_cache(maxsize=None)
    def best(mask: int) -> Tuple[float, Tuple[Tuple[int, int], ...]]:
        if mask == 0:
            return 0.0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        u = nodes[i]
        options: List[Tuple[float, Tuple[Tuple[int, int], ...]]] = []
        d = decoder.distance(u, BOUNDARY)
        if d is not None:
            cost, pairs = best(rest)
            options.append((d + cost, ((u, BOUNDARY),) + pairs))
        for j in range(i + 1, n):
            if not rest & (1 << j):
                continue
            d = decoder.distance(u, nodes[j])
            if d is None:
                continue
            cost, pairs = best(rest & ~(1 << j))
            options.append((d + cost, ((u, nodes[j]),) + pairs))
        if not options:
            return inf, ()
        return min(options, key=lambda option: option[0])

    weight, pairs = best((1 << n) - 1)
    if weight == inf:
        raise ValueError(f"No pairing covers fired detectors {list(nodes)}")
    flip = False
    for u, v in pairs:
        flip ^= decoder.path_flip(u, v)
    return Correction(pairs=tuple(sorted(pairs)), flip=flip, weight=weight)


def single_fault_failures(
    circuit: Circuit,
    detector_graph: DetectorGraph,
    decoder: Optional[MatchingDecoder] = None,
) -> List[Mechanism]:
    """
    Stage-II single-fault mechanisms whose own signature decodes to the wrong flip.

    Only mechanisms kept as plain edges are audited: one or two Stage-II
    detectors and no Stage-I detector.
    """
    decoder = decoder or MatchingDecoder(detector_graph)
    stage_one = frozenset(circuit.detector_indices(1))
    failures: List[Mechanism] = []
    audited = 0
    for mechanism in enumerate_mechanisms(circuit):
        if not 1 <= len(mechanism.detectors) <= 2 or mechanism.detectors & stage_one:
            continue
        audited += 1
        if decoder.decode(mechanism.detectors).flip != mechanism.flips_observable:
            failures.append(mechanism)
    logger.info(
        "Single-fault audit finished",
        extra={"context": {"audited": audited, "failures": len(failures)}},
    )
    return failures
