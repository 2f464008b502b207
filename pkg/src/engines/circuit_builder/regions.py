# hexinject - Region Assignment
# Splits the extended patch into preparation regions per initialization method

from typing import Dict, Tuple

from src.core.logging.logger import setup_logger
from src.engines.code_layout import grid_point, validate_distance
from src.schemas.circuit import InitBasis, Region, RegionAssignment
from src.schemas.layout import CodeLayout
from src.schemas.models import CodeType, InitMethod

logger = setup_logger(__name__)

# Square cut sits just past the first dual qubit on the diagonal
SQUARE_CUT = 2


def _row_side(point: Tuple[int, int], method: InitMethod) -> bool:
    r, c = point
    if r == 0:
        return True
    if c == 0:
        return False
    if method.is_triangle:
        if c != r:
            return c > r
        return method.is_down
    if method == InitMethod.down_square:
        return c > SQUARE_CUT
    return r <= SQUARE_CUT


def _row_side_basis(code_type: CodeType) -> InitBasis:
    return InitBasis.zero if code_type == CodeType.zxxz else InitBasis.plus


def _flip(basis: InitBasis) -> InitBasis:
    return InitBasis.zero if basis == InitBasis.plus else InitBasis.plus


def assign_regions(layout: CodeLayout, method: InitMethod, d1: int, d2: int) -> RegionAssignment:
    """
    Assign every data qubit of the extended patch to a preparation region.

    The top row (minus the magic qubit) always prepares with regions I/III
    and the left column with II/IV. Triangle methods split the interior on
    the main diagonal, square methods with one straight cut. Qubits inside
    the injection patch get I/II, the rest III/IV.

    Args:
        layout: Layout of the extended (d2) patch
        method: Initialization method
        d1: Injection patch distance
        d2: Extended patch distance

    Returns:
        RegionAssignment with region and preparation basis per data qubit

    Raises:
        ValueError: If d1 > d2, a distance is invalid, or the layout is not the d2 patch
    """
    validate_distance(d1)
    validate_distance(d2)
    method = InitMethod(method)
    if d1 > d2:
        raise ValueError(f"d1 must not exceed d2, got d1={d1}, d2={d2}")
    if layout.distance != d2:
        raise ValueError(f"Layout distance {layout.distance} does not match d2={d2}")

    inner_limit = 2 * d1 - 2
    row_basis = _row_side_basis(layout.code_type)
    mixed = layout.code_type != CodeType.surface

    regions: Dict[int, Region] = {}
    bases: Dict[int, InitBasis] = {}
    for q in layout.data_qubits:
        point = grid_point(layout.qubit(q).coord)
        if q == layout.magic_qubit:
            regions[q] = Region.magic
            bases[q] = InitBasis.magic
            continue
        row_side = _row_side(point, method)
        inner = point[0] <= inner_limit and point[1] <= inner_limit
        if row_side:
            region = Region.one if inner else Region.three
        else:
            region = Region.two if inner else Region.four
        regions[q] = region
        basis = row_basis if region.row_side else _flip(row_basis)
        # Dual qubits of the mixed codes carry the Hadamard-rotated basis
        if mixed and point[0] % 2 == 1:
            basis = _flip(basis)
        bases[q] = basis

    assignment = RegionAssignment(
        d1=d1,
        d2=d2,
        method=method.value,
        code_type=layout.code_type.value,
        regions=regions,
        init_basis=bases,
    )
    logger.debug(
        "Assigned regions",
        extra={"context": {
            "method": method.value,
            "d1": d1,
            "d2": d2,
            "row_side": len(assignment.qubits_in(Region.one, Region.three)),
            "column_side": len(assignment.qubits_in(Region.two, Region.four)),
        }},
    )
    return assignment
