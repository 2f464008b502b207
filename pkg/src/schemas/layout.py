# hexinject - Code Layout Schemas
# Qubits, stabilizers with flag routes, logical operators

from enum import Enum
from typing import Dict, List, Literal, NamedTuple, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .models import CodeType, Structure

Pauli = Literal["X", "Z"]
Direction = Literal["N", "W", "E", "S"]


class QubitRole(str, Enum):
    data = "data"
    syndrome_x = "syndrome_x"
    syndrome_z = "syndrome_z"
    syndrome_mixed = "syndrome_mixed"
    flag = "flag"

    @property
    def is_syndrome(self) -> bool:
        return self in (QubitRole.syndrome_x, QubitRole.syndrome_z, QubitRole.syndrome_mixed)


class Coord(NamedTuple):
    """Doubled lattice coordinate; data and syndrome qubits sit at even positions."""
    row: int
    col: int


class Qubit(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0)
    coord: Coord
    role: QubitRole


class Leg(BaseModel):
    """One syndrome-data coupling, optionally routed through flag qubits (syndrome side first)."""
    model_config = ConfigDict(frozen=True)

    data: int = Field(..., ge=0)
    pauli: Pauli
    direction: Direction
    route: Tuple[int, ...] = ()

    @property
    def is_vertical(self) -> bool:
        return self.direction in ("N", "S")


class StabilizerSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    syndrome: int = Field(..., ge=0)
    legs: Tuple[Leg, ...]

    def as_pauli(self) -> Dict[int, str]:
        return {leg.data: leg.pauli for leg in self.legs}


class LogicalOperatorSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    pauli: Pauli
    support: Tuple[int, ...]

    def as_pauli(self) -> Dict[int, str]:
        return {q: self.pauli for q in self.support}


class CodeLayout(BaseModel):
    """Immutable description of one code patch."""
    model_config = ConfigDict(frozen=True)

    code_type: CodeType
    structure: Structure
    distance: int
    flags_per_leg: int = 0
    qubits: Tuple[Qubit, ...]
    stabilizers: Tuple[StabilizerSpec, ...]
    logical_x: LogicalOperatorSpec
    logical_z: LogicalOperatorSpec
    magic_qubit: int

    def qubit(self, qubit_id: int) -> Qubit:
        return self.qubits[qubit_id]

    def by_coord(self) -> Dict[Coord, int]:
        return {q.coord: q.id for q in self.qubits}

    def ids_with_role(self, *roles: QubitRole) -> List[int]:
        return [q.id for q in self.qubits if q.role in roles]

    @property
    def data_qubits(self) -> List[int]:
        return self.ids_with_role(QubitRole.data)

    @property
    def syndrome_qubits(self) -> List[int]:
        return [q.id for q in self.qubits if q.role.is_syndrome]

    @property
    def flag_qubits(self) -> List[int]:
        return self.ids_with_role(QubitRole.flag)
