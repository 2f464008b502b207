# hexinject - Detector Graph Construction
# Fault enumeration into weighted Stage-II matching edges

import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Set, Tuple

import networkx as nx

from src.core.logging.logger import setup_logger
from src.engines.pauli_sim import FaultEffect, propagate_faults
from src.schemas.circuit import Circuit, InstructionKind

logger = setup_logger(__name__)

K = InstructionKind

BOUNDARY = -1

Signature = Tuple[FrozenSet[int], bool]
_EMPTY: Signature = (frozenset(), False)


def merge_probabilities(q1: float, q2: float) -> float:
    """Probability that exactly one of two independent mechanisms fires."""
    return q1 * (1 - q2) + q2 * (1 - q1)


def edge_weight(q: float) -> float:
    """Log-likelihood weight -ln(q/(1-q)); q is clamped to (0, 0.5]."""
    if q <= 0:
        raise ValueError(f"Edge probability must be positive, got {q}")
    q = min(q, 0.5)
    return -math.log(q / (1 - q))


@dataclass
class DetectorGraph:
    """
    Stage-II matching graph.

    Nodes are Stage-II detector indices plus BOUNDARY. Each edge carries
    probability, weight and flips_observable.
    """
    graph: nx.Graph
    detectors: Tuple[int, ...]
    dropped_mechanisms: int = 0
    dropped_mass: float = 0.0
    undetectable_mass: float = 0.0
    postselected_mass: float = 0.0
    total_mass: float = 0.0

    @property
    def dropped_fraction(self) -> float:
        return self.dropped_mass / self.total_mass if self.total_mass > 0 else 0.0

    def edges(self) -> List[Tuple[int, int, Dict[str, object]]]:
        return [(u, v, data) for u, v, data in self.graph.edges(data=True)]


def _key(signature: FrozenSet[int]) -> Tuple[int, int]:
    nodes = sorted(signature)
    if len(nodes) == 1:
        return nodes[0], BOUNDARY
    return nodes[0], nodes[1]


def _xor(a: Signature, b: Signature) -> Signature:
    return a[0] ^ b[0], a[1] != b[1]


def _component_faults(circuit: Circuit) -> Tuple[List[Tuple[int, str]], List[Tuple[int, int, str]]]:
    """Elementary X/Z faults of every noise location: (location, Pauli) and (location, slot, component)."""
    faults: List[Tuple[int, str]] = []
    keys: List[Tuple[int, int, str]] = []
    for index, inst in enumerate(circuit.instructions):
        if inst.kind == K.readout_flip:
            faults.append((index, "X"))
            keys.append((index, 0, "X"))
        elif inst.kind in (K.noise1, K.noise2):
            width = len(inst.qubits)
            for slot in range(width):
                for component in ("X", "Z"):
                    faults.append((index, "".join(component if i == slot else "I" for i in range(width))))
                    keys.append((index, slot, component))
    return faults, keys


def _label_components(label: str) -> List[Tuple[int, str]]:
    parts = []
    for slot, factor in enumerate(label):
        if factor in ("X", "Y"):
            parts.append((slot, "X"))
        if factor in ("Z", "Y"):
            parts.append((slot, "Z"))
    return parts


@dataclass(frozen=True)
class Mechanism:
    """One channel label at one noise location, with its noiseless signature."""
    location: int
    label: str
    probability: float
    detectors: FrozenSet[int]
    flips_observable: bool
    pieces: Tuple[Signature, ...]


def enumerate_mechanisms(circuit: Circuit) -> List[Mechanism]:
    """
    Every positive-probability error mechanism of a noisy circuit.

    Signatures are the XOR of the X and Z component signatures of each
    factor, so only two propagations per qubit per location are run.
    """
    faults, keys = _component_faults(circuit)
    effects: List[FaultEffect] = propagate_faults(circuit, faults) if faults else []
    component: Dict[Tuple[int, int, str], Signature] = {
        key: (effect.detectors, effect.observable_flip) for key, effect in zip(keys, effects)
    }

    found: List[Mechanism] = []
    for index, inst in enumerate(circuit.instructions):
        if inst.kind == K.readout_flip:
            options = [("X", [(0, "X")], inst.probability)]
        elif inst.kind in (K.noise1, K.noise2):
            table = circuit.channels[inst.channel]
            scale = inst.probability / table.p if table.p > 0 else 0.0
            options = [(label, _label_components(label), prob * scale) for label, prob in table.support]
        else:
            continue
        for label, parts, probability in options:
            if probability <= 0:
                continue
            pieces = tuple(component[(index, slot, c)] for slot, c in parts)
            signature = _EMPTY
            for piece in pieces:
                signature = _xor(signature, piece)
            found.append(Mechanism(
                location=index,
                label=label,
                probability=probability,
                detectors=signature[0],
                flips_observable=signature[1],
                pieces=pieces,
            ))
    return found


# Largest hyperedge split into matching edges; larger ones are dropped
SPLIT_LIMIT = 8


def _covers(
    nodes: Tuple[int, ...],
    known: Set[Tuple[int, int]],
    allow_new: bool,
) -> Iterator[Tuple[List[FrozenSet[int]], int]]:
    """Partitions of nodes into known pairs and boundary singletons, with the count of new singletons."""
    if not nodes:
        yield [], 0
        return
    first, rest = nodes[0], nodes[1:]
    single = frozenset({first})
    if (first, BOUNDARY) in known or allow_new:
        new = 0 if (first, BOUNDARY) in known else 1
        for tail, extra in _covers(rest, known, allow_new):
            yield [single] + tail, new + extra
    for i, other in enumerate(rest):
        pair = frozenset({first, other})
        if _key(pair) in known:
            for tail, extra in _covers(rest[:i] + rest[i + 1:], known, allow_new):
                yield [pair] + tail, extra


def split_signature(
    detectors: FrozenSet[int],
    flips_observable: bool,
    edge_flips: Dict[Tuple[int, int], bool],
) -> Optional[List[Signature]]:
    """
    Cover a hyperedge signature with matching edges.

    Known edges (pairs or detector-to-boundary) are tried first; a cover
    whose edge flips already XOR to the mechanism's flip wins, then the one
    with fewest pieces. Only when no cover by known edges exists do lone
    detectors get fresh boundary edges. The last piece absorbs any flip
    mismatch.

    Args:
        detectors: Stage-II detectors fired by the mechanism
        flips_observable: Whether the mechanism flips the observable
        edge_flips: Known edge key -> its majority observable flip

    Returns:
        Pieces with their observable flips, or None above SPLIT_LIMIT detectors
    """
    if not detectors or len(detectors) > SPLIT_LIMIT:
        return None
    nodes = tuple(sorted(detectors))
    known = set(edge_flips)
    for allow_new in (False, True):
        best: Optional[Tuple[Tuple[int, bool, int], List[FrozenSet[int]]]] = None
        for pieces, new in _covers(nodes, known, allow_new):
            parity = False
            for piece in pieces:
                parity ^= edge_flips.get(_key(piece), False)
            rank = (new, parity != flips_observable, len(pieces))
            if best is None or rank < best[0]:
                best = (rank, pieces)
        if best is None:
            continue
        pieces = best[1]
        flips = [edge_flips.get(_key(piece), False) for piece in pieces]
        if best[0][1]:
            flips[-1] = not flips[-1]
        return list(zip(pieces, flips))
    return None


def _decompose(
    mechanism: Mechanism,
    stage_one: FrozenSet[int],
    edge_flips: Dict[Tuple[int, int], bool],
) -> Optional[List[Signature]]:
    """Split a hyperedge mechanism into its X/Z components when those are edges, else cover it."""
    def fits(signature: FrozenSet[int]) -> bool:
        return 1 <= len(signature) <= 2 and not signature & stage_one and _key(signature) in edge_flips

    nonempty = [p for p in mechanism.pieces if p[0]]
    silent_flip = any(p[1] for p in mechanism.pieces if not p[0])
    if nonempty and not silent_flip and all(fits(p[0]) for p in nonempty):
        return nonempty
    return split_signature(mechanism.detectors, mechanism.flips_observable, edge_flips)


def build_graph(circuit: Circuit) -> DetectorGraph:
    """
    Build the Stage-II detector graph of a noisy circuit.

    Mechanisms firing a Stage-I detector are post-selected away, those with
    no Stage-II detector are undetectable. One or two detectors make an
    edge directly (one means a boundary edge); larger signatures are split
    into edges (X/Z components, else a cover by known edges, see
    split_signature); only those above SPLIT_LIMIT detectors are dropped.
    Parallel edges merge as independent mechanisms and take the observable
    flip carrying the larger probability mass.

    Raises:
        ValueError: If the circuit has no noise attached
    """
    if not circuit.noisy:
        raise ValueError("Detector graph needs a circuit with noise attached")

    stage_one = frozenset(circuit.detector_indices(1))
    stage_two = circuit.detector_indices(2)

    graph = nx.Graph()
    graph.add_node(BOUNDARY)
    graph.add_nodes_from(stage_two)
    result = DetectorGraph(graph=graph, detectors=tuple(stage_two))
    edge_mass: Dict[Tuple[int, int], Dict[str, float]] = {}

    def add_edge(signature: Signature, probability: float) -> None:
        key = _key(signature[0])
        mass = edge_mass.setdefault(key, {"q": 0.0, "flip": 0.0, "keep": 0.0})
        mass["q"] = merge_probabilities(mass["q"], probability)
        mass["flip" if signature[1] else "keep"] += probability

    leftovers: List[Mechanism] = []
    for mechanism in enumerate_mechanisms(circuit):
        probability = mechanism.probability
        result.total_mass += probability
        if mechanism.detectors & stage_one:
            result.postselected_mass += probability
        elif not mechanism.detectors:
            result.undetectable_mass += probability
        elif len(mechanism.detectors) <= 2:
            add_edge((mechanism.detectors, mechanism.flips_observable), probability)
        else:
            leftovers.append(mechanism)

    edge_flips = {key: mass["flip"] > mass["keep"] for key, mass in edge_mass.items()}
    for mechanism in leftovers:
        pieces = _decompose(mechanism, stage_one, edge_flips)
        if pieces is None:
            result.dropped_mechanisms += 1
            result.dropped_mass += mechanism.probability
            continue
        for piece in pieces:
            add_edge(piece, mechanism.probability)

    for (u, v), mass in edge_mass.items():
        q = min(mass["q"], 0.5)
        if q <= 0:
            continue
        graph.add_edge(
            u, v,
            probability=q,
            weight=edge_weight(q),
            flips_observable=mass["flip"] > mass["keep"],
        )

    logger.info(
        "Built detector graph",
        extra={"context": {
            "nodes": graph.number_of_nodes(),
            "edges": graph.number_of_edges(),
            "dropped_mechanisms": result.dropped_mechanisms,
            "dropped_fraction": result.dropped_fraction,
        }},
    )
    return result


def dump_graph(detector_graph: DetectorGraph) -> str:
    """One sorted line per edge: `u v|B weight prob flip`."""
    rows = []
    for u, v, data in detector_graph.graph.edges(data=True):
        a, b = (u, v) if v == BOUNDARY or (u != BOUNDARY and u < v) else (v, u)
        rows.append((a, b))
    lines = []
    for a, b in sorted(rows, key=lambda pair: (pair[0], pair[1] == BOUNDARY, pair[1])):
        data = detector_graph.graph.edges[a, b]
        other = "B" if b == BOUNDARY else str(b)
        lines.append(f"{a} {other} {data['weight']!r} {data['probability']!r} {int(data['flips_observable'])}")
    return "\n".join(lines) + ("\n" if lines else "")


def edge_for(detector_graph: DetectorGraph, u: int, v: Optional[int] = None) -> Dict[str, object]:
    """Edge attributes between two detectors, or a detector and the boundary."""
    return detector_graph.graph.edges[u, BOUNDARY if v is None else v]
