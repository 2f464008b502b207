# hexinject - Code Layout Builder
# Planar patches for the surface, XZZX and ZXXZ codes on lattice and heavy-hex hardware

from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from src.core.logging.logger import setup_logger
from src.schemas.layout import (
    Coord,
    Qubit,
    QubitRole,
    Leg,
    StabilizerSpec,
    LogicalOperatorSpec,
    CodeLayout,
)
from src.schemas.models import CodeType, Structure

logger = setup_logger(__name__)

# Fixed leg order; neighbouring blocks interleave in the same direction sequence
LEG_ORDER = ("N", "W", "E", "S")
_OFFSETS = {"N": (-1, 0), "W": (0, -1), "E": (0, 1), "S": (1, 0)}
_TRANSPOSED_DIRECTION = {"N": "W", "W": "N", "E": "S", "S": "E"}
_TRANSPOSED_CODE = {
    CodeType.surface: CodeType.surface,
    CodeType.xzzx: CodeType.zxxz,
    CodeType.zxxz: CodeType.xzzx,
}


def validate_distance(distance: int) -> int:
    if isinstance(distance, bool) or not isinstance(distance, int):
        raise ValueError(f"distance must be an integer, got {distance!r}")
    if distance < 3 or distance % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {distance}")
    return distance


def is_primal(coord: Coord) -> bool:
    """Primal data qubits sit on even grid points; dual data qubits on odd-odd points."""
    return (coord.row // 2) % 2 == 0


def grid_point(coord: Coord) -> Tuple[int, int]:
    return coord.row // 2, coord.col // 2


def leg_pauli(code_type: CodeType, syndrome_point: Tuple[int, int], direction: str) -> str:
    """
    Pauli applied on one leg of a stabilizer.

    Args:
        code_type: Code family
        syndrome_point: Undoubled grid position of the syndrome qubit
        direction: N, W, E or S

    Returns:
        "X" or "Z"
    """
    vertical = direction in ("N", "S")
    if code_type == CodeType.xzzx:
        return "X" if vertical else "Z"
    if code_type == CodeType.zxxz:
        return "Z" if vertical else "X"
    # Surface: Z checks at (even, odd), X checks at (odd, even)
    return "Z" if syndrome_point[0] % 2 == 0 else "X"


def _syndrome_role(code_type: CodeType, syndrome_point: Tuple[int, int]) -> QubitRole:
    if code_type != CodeType.surface:
        return QubitRole.syndrome_mixed
    return QubitRole.syndrome_z if syndrome_point[0] % 2 == 0 else QubitRole.syndrome_x


@lru_cache(maxsize=64)
def build_layout(
    code_type: CodeType,
    structure: Structure,
    distance: int,
    flags_per_leg: int = 2,
) -> CodeLayout:
    """
    Build one planar code patch.

    Data qubits occupy grid points with even coordinate sum and syndrome
    qubits the odd ones; all coordinates are stored doubled. On heavy-hex
    hardware each vertical leg is routed syndrome -> hub flag -> [chain flag]
    -> bridge flag -> data, and horizontal legs stay direct.

    Args:
        code_type: surface, xzzx or zxxz
        structure: lattice or heavy-hex
        distance: Odd code distance >= 3
        flags_per_leg: Flags on a vertical heavy-hex leg (2 or 3); ignored on lattice

    Returns:
        Frozen CodeLayout with dense qubit ids (data, then syndromes, then flags)

    Raises:
        ValueError: If distance or flags_per_leg is out of range
    """
    code_type = CodeType(code_type)
    structure = Structure(structure)
    validate_distance(distance)
    if flags_per_leg not in (2, 3):
        raise ValueError(f"flags_per_leg must be 2 or 3, got {flags_per_leg}")
    heavy = structure == Structure.heavy_hex

    size = 2 * distance - 1
    points = [(r, c) for r in range(size) for c in range(size)]
    data_points = [p for p in points if (p[0] + p[1]) % 2 == 0]
    syndrome_points = [p for p in points if (p[0] + p[1]) % 2 == 1]

    qubits: List[Qubit] = []
    ids: Dict[Tuple[int, int], int] = {}
    for r, c in data_points:
        ids[(r, c)] = len(qubits)
        qubits.append(Qubit(id=len(qubits), coord=Coord(2 * r, 2 * c), role=QubitRole.data))
    for r, c in syndrome_points:
        ids[(r, c)] = len(qubits)
        qubits.append(Qubit(id=len(qubits), coord=Coord(2 * r, 2 * c),
                            role=_syndrome_role(code_type, (r, c))))

    # Leg skeleton first so flags are only created where a vertical leg exists
    skeleton: List[Tuple[Tuple[int, int], List[Tuple[str, Tuple[int, int]]]]] = []
    for r, c in syndrome_points:
        legs = []
        for direction in LEG_ORDER:
            dr, dc = _OFFSETS[direction]
            target = (r + dr, c + dc)
            if 0 <= target[0] < size and 0 <= target[1] < size:
                legs.append((direction, target))
        skeleton.append(((r, c), legs))

    flag_ids: Dict[Coord, int] = {}
    if heavy:
        flag_coords = set()
        for (r, c), legs in skeleton:
            for direction, (dr_, dc_) in legs:
                if direction in ("N", "S"):
                    flag_coords.add(Coord(2 * r, 2 * c + 1))
                    flag_coords.add(Coord(2 * dr_ + 1, 2 * dc_))
                    if flags_per_leg == 3:
                        flag_coords.add(_chain_coord((r, c), direction))
        for coord in sorted(flag_coords):
            flag_ids[coord] = len(qubits)
            qubits.append(Qubit(id=len(qubits), coord=coord, role=QubitRole.flag))

    stabilizers: List[StabilizerSpec] = []
    for (r, c), legs in skeleton:
        leg_specs = []
        for direction, target in legs:
            route: Tuple[int, ...] = ()
            if heavy and direction in ("N", "S"):
                hops = [flag_ids[Coord(2 * r, 2 * c + 1)]]
                if flags_per_leg == 3:
                    hops.append(flag_ids[_chain_coord((r, c), direction)])
                hops.append(flag_ids[Coord(2 * target[0] + 1, 2 * target[1])])
                route = tuple(hops)
            leg_specs.append(Leg(
                data=ids[target],
                pauli=leg_pauli(code_type, (r, c), direction),
                direction=direction,
                route=route,
            ))
        stabilizers.append(StabilizerSpec(syndrome=ids[(r, c)], legs=tuple(leg_specs)))

    logical_x, logical_z = _find_logicals(qubits, stabilizers)
    layout = CodeLayout(
        code_type=code_type,
        structure=structure,
        distance=distance,
        flags_per_leg=flags_per_leg if heavy else 0,
        qubits=tuple(qubits),
        stabilizers=tuple(stabilizers),
        logical_x=logical_x,
        logical_z=logical_z,
        magic_qubit=ids[(0, 0)],
    )
    logger.debug(
        "Built code layout",
        extra={"context": {
            "code": code_type.value,
            "structure": structure.value,
            "distance": distance,
            "qubits": len(qubits),
            "stabilizers": len(stabilizers),
        }},
    )
    return layout


def _chain_coord(syndrome_point: Tuple[int, int], direction: str) -> Coord:
    r, c = syndrome_point
    return Coord(2 * r - 1, 2 * c - 1) if direction == "N" else Coord(2 * r + 1, 2 * c - 1)


def anticommutes(a: Dict[int, str], b: Dict[int, str]) -> bool:
    """Symplectic product of two Pauli maps (qubit -> X/Y/Z)."""
    clashes = 0
    for q, pa in a.items():
        pb = b.get(q)
        if pb is not None and pb != pa:
            clashes += 1
    return clashes % 2 == 1


def _boundary_lines(qubits: Iterable[Qubit]) -> Dict[str, List[int]]:
    data = [q for q in qubits if q.role == QubitRole.data]
    return {
        "row": [q.id for q in sorted(data, key=lambda q: q.coord.col) if q.coord.row == 0],
        "column": [q.id for q in sorted(data, key=lambda q: q.coord.row) if q.coord.col == 0],
    }


def _find_logicals(
    qubits: Iterable[Qubit],
    stabilizers: Iterable[StabilizerSpec],
) -> Tuple[LogicalOperatorSpec, LogicalOperatorSpec]:
    stabilizer_maps = [s.as_pauli() for s in stabilizers]
    found: Dict[str, Optional[LogicalOperatorSpec]] = {"X": None, "Z": None}
    for line in _boundary_lines(qubits).values():
        for pauli in ("X", "Z"):
            candidate = {q: pauli for q in line}
            if any(anticommutes(candidate, s) for s in stabilizer_maps):
                continue
            if found[pauli] is not None:
                raise ValueError(f"Ambiguous logical {pauli}: both boundary lines commute with the stabilizers")
            found[pauli] = LogicalOperatorSpec(pauli=pauli, support=tuple(line))
    if found["X"] is None or found["Z"] is None:
        raise ValueError("Layout has no boundary-line logical operator pair")
    return found["X"], found["Z"]


def logical_supports(layout: CodeLayout) -> Tuple[LogicalOperatorSpec, LogicalOperatorSpec]:
    """
    Locate the logical operators of a layout on its top row and left column.

    Surface and XZZX patches carry Z_L on the left column and X_L on the top
    row; ZXXZ patches have them reversed.

    Returns:
        (logical_x, logical_z)
    """
    return _find_logicals(layout.qubits, layout.stabilizers)


def diagonal_reflect(layout: CodeLayout) -> CodeLayout:
    """
    Mirror a layout across its top-left to bottom-right diagonal.

    Coordinates are transposed, legs change direction (N<->W, S<->E) and
    qubit ids are reassigned in the builder's canonical order, so reflecting
    an XZZX lattice patch reproduces the ZXXZ lattice patch exactly.
    """
    def rank(q: Qubit) -> Tuple[int, int, int]:
        group = 0 if q.role == QubitRole.data else (2 if q.role == QubitRole.flag else 1)
        return group, q.coord.col, q.coord.row

    order = sorted(layout.qubits, key=rank)
    relabel = {q.id: new_id for new_id, q in enumerate(order)}
    qubits = tuple(
        Qubit(id=relabel[q.id], coord=Coord(q.coord.col, q.coord.row), role=q.role)
        for q in order
    )

    stabilizers = []
    for stabilizer in sorted(layout.stabilizers, key=lambda s: relabel[s.syndrome]):
        legs = [
            Leg(
                data=relabel[leg.data],
                pauli=leg.pauli,
                direction=_TRANSPOSED_DIRECTION[leg.direction],
                route=tuple(relabel[f] for f in leg.route),
            )
            for leg in stabilizer.legs
        ]
        legs.sort(key=lambda leg: LEG_ORDER.index(leg.direction))
        stabilizers.append(StabilizerSpec(syndrome=relabel[stabilizer.syndrome], legs=tuple(legs)))

    logical_x, logical_z = _find_logicals(qubits, stabilizers)
    return CodeLayout(
        code_type=_TRANSPOSED_CODE[layout.code_type],
        structure=layout.structure,
        distance=layout.distance,
        flags_per_leg=layout.flags_per_leg,
        qubits=qubits,
        stabilizers=tuple(stabilizers),
        logical_x=logical_x,
        logical_z=logical_z,
        magic_qubit=relabel[layout.magic_qubit],
    )
