# hexinject - Layout Audits
# Connectivity, commutation, rank and isomorphism checks plus the text dump

from itertools import combinations
from typing import Dict, List, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import categorical_edge_match, categorical_node_match

from src.schemas.layout import CodeLayout, QubitRole
from .builder import anticommutes


def interaction_graph(layout: CodeLayout) -> nx.Graph:
    """
    Hardware coupling graph implied by the stabilizer routes.

    Nodes carry the qubit role and whether the qubit is the magic qubit;
    the final hop of every leg carries the leg Pauli, route hops carry "route".
    """
    graph = nx.Graph()
    for q in layout.qubits:
        graph.add_node(q.id, role=q.role.value, magic=q.id == layout.magic_qubit)
    for stabilizer in layout.stabilizers:
        for leg in stabilizer.legs:
            path = [stabilizer.syndrome, *leg.route, leg.data]
            for a, b in zip(path[:-2], path[1:-1]):
                graph.add_edge(a, b, pauli="route")
            graph.add_edge(path[-2], path[-1], pauli=leg.pauli)
    return graph


def interaction_degrees(layout: CodeLayout) -> Dict[int, int]:
    return dict(interaction_graph(layout).degree())


def max_interaction_degree(layout: CodeLayout) -> int:
    degrees = interaction_degrees(layout)
    return max(degrees.values()) if degrees else 0


def commutation_violations(layout: CodeLayout) -> List[Tuple[str, str]]:
    """
    Every pair of operators that should commute but does not.

    Checks all stabilizer pairs and each stabilizer against both logicals,
    and that X_L anticommutes with Z_L.

    Returns:
        List of (name, name) pairs; empty for a valid layout
    """
    operators = [(f"S{s.syndrome}", s.as_pauli()) for s in layout.stabilizers]
    logical_x = layout.logical_x.as_pauli()
    logical_z = layout.logical_z.as_pauli()
    violations = [
        (name_a, name_b)
        for (name_a, a), (name_b, b) in combinations(operators, 2)
        if anticommutes(a, b)
    ]
    for name, op in operators:
        if anticommutes(op, logical_x):
            violations.append((name, "X_L"))
        if anticommutes(op, logical_z):
            violations.append((name, "Z_L"))
    if not anticommutes(logical_x, logical_z):
        violations.append(("X_L", "Z_L"))
    return violations


def symplectic_matrix(layout: CodeLayout) -> np.ndarray:
    """Binary (x | z) rows of the stabilizers over the data qubits."""
    data = layout.data_qubits
    column = {q: i for i, q in enumerate(data)}
    n = len(data)
    matrix = np.zeros((len(layout.stabilizers), 2 * n), dtype=np.uint8)
    for row, stabilizer in enumerate(layout.stabilizers):
        for leg in stabilizer.legs:
            if leg.pauli == "X":
                matrix[row, column[leg.data]] = 1
            else:
                matrix[row, n + column[leg.data]] = 1
    return matrix


def gf2_rank(matrix: np.ndarray) -> int:
    work = matrix.copy() % 2
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        pivots = np.nonzero(work[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot = rank + pivots[0]
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        below = np.nonzero(work[:, col])[0]
        below = below[below != rank]
        work[below] ^= work[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def stabilizer_rank(layout: CodeLayout) -> int:
    return gf2_rank(symplectic_matrix(layout))


def route_asymmetry(layout: CodeLayout) -> bool:
    """True when every vertical leg carries more flags than any horizontal leg."""
    vertical = [len(leg.route) for s in layout.stabilizers for leg in s.legs if leg.is_vertical]
    horizontal = [len(leg.route) for s in layout.stabilizers for leg in s.legs if not leg.is_vertical]
    if not vertical or not horizontal:
        return False
    return min(vertical) > max(horizontal)


def layouts_isomorphic(a: CodeLayout, b: CodeLayout) -> bool:
    """
    Labelled graph isomorphism of two layouts.

    Roles, the magic qubit and leg Paulis must be preserved, and the
    logical supports must map onto each other.
    """
    if len(a.qubits) != len(b.qubits) or len(a.stabilizers) != len(b.stabilizers):
        return False

    def labelled(layout: CodeLayout) -> nx.Graph:
        graph = interaction_graph(layout)
        for q in layout.logical_x.support:
            graph.nodes[q]["lx"] = True
        for q in layout.logical_z.support:
            graph.nodes[q]["lz"] = True
        return graph

    return nx.is_isomorphic(
        labelled(a),
        labelled(b),
        node_match=categorical_node_match(["role", "magic", "lx", "lz"], [None, False, False, False]),
        edge_match=categorical_edge_match("pauli", None),
    )


def dump_layout(layout: CodeLayout) -> str:
    """
    Plain-text layout listing.

    Lines: a LAYOUT header, one `id role row col` line per qubit, one
    `S syndrome dir:data:pauli:flag,flag` line per stabilizer, then the
    logical supports and the magic qubit. Sorted by id.
    """
    lines = [
        f"LAYOUT {layout.code_type.value} {layout.structure.value} "
        f"{layout.distance} {layout.flags_per_leg}"
    ]
    for q in sorted(layout.qubits, key=lambda q: q.id):
        lines.append(f"{q.id} {q.role.value} {q.coord.row} {q.coord.col}")
    for stabilizer in sorted(layout.stabilizers, key=lambda s: s.syndrome):
        legs = " ".join(
            f"{leg.direction}:{leg.data}:{leg.pauli}:{','.join(str(f) for f in leg.route)}"
            for leg in stabilizer.legs
        )
        lines.append(f"S {stabilizer.syndrome} {legs}")
    lines.append("LX " + " ".join(str(q) for q in layout.logical_x.support))
    lines.append("LZ " + " ".join(str(q) for q in layout.logical_z.support))
    lines.append(f"MAGIC {layout.magic_qubit}")
    return "\n".join(lines) + "\n"


def role_counts(layout: CodeLayout) -> Dict[str, int]:
    counts = {role.value: 0 for role in QubitRole}
    for q in layout.qubits:
        counts[q.role.value] += 1
    return counts
