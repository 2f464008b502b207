# hexinject - Circuit Schemas
# Instruction stream, detector metadata and channel tables

from enum import Enum
from typing import Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .layout import Coord, QubitRole
from .models import Basis


class InstructionKind(str, Enum):
    reset = "R"
    hadamard = "H"
    cnot = "CX"
    cz = "CZ"
    measure = "M"
    noise1 = "N1"
    noise2 = "N2"
    readout_flip = "RF"
    detector = "DET"
    observable = "OBS"

    @property
    def is_two_qubit_gate(self) -> bool:
        return self in (InstructionKind.cnot, InstructionKind.cz)

    @property
    def is_noise(self) -> bool:
        return self in (InstructionKind.noise1, InstructionKind.noise2, InstructionKind.readout_flip)


class DetectorClass(str, Enum):
    stabilizer_compare = "stabilizer"
    flag_check = "flag"
    final_readout = "final"


class Instruction(BaseModel):
    """
    One circuit step.

    qubits holds gate/reset/measure/noise targets; record is the measurement
    slot written by a MeasureZ (or flipped by a ReadoutFlip); records is the
    parity set of a Detector or Observable.
    """
    model_config = ConfigDict(frozen=True)

    kind: InstructionKind
    qubits: Tuple[int, ...] = ()
    record: Optional[int] = None
    records: Tuple[int, ...] = ()
    channel: Optional[str] = None
    probability: float = 0.0
    stage: Optional[int] = None
    detector_class: Optional[DetectorClass] = None
    round: Optional[int] = None
    postselect: bool = False


class DetectorInfo(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0)
    stage: int = Field(..., ge=1, le=2)
    detector_class: DetectorClass
    round: int = Field(..., ge=1)
    postselect: bool = False
    anchor: Optional[int] = None


class ChannelDistribution(BaseModel):
    """Pauli error table of one channel; probabilities sum to the total rate."""
    model_config = ConfigDict(frozen=True)

    arity: int = Field(..., ge=1, le=2)
    p: float = Field(..., ge=0.0, le=1.0)
    support: Tuple[Tuple[str, float], ...]

    def total(self) -> float:
        return sum(prob for _, prob in self.support)

    def probability(self, label: str) -> float:
        for name, prob in self.support:
            if name == label:
                return prob
        raise ValueError(f"Unknown Pauli label {label!r} for a {self.arity}-qubit channel")


class Circuit(BaseModel):
    """Compiled injection protocol plus the metadata the sampler, decoder and audits need."""
    model_config = ConfigDict(frozen=True)

    instructions: Tuple[Instruction, ...] = ()
    qubit_count: int = Field(0, ge=0)
    measurement_count: int = Field(0, ge=0)
    qubit_coords: Tuple[Coord, ...] = ()
    qubit_roles: Tuple[QubitRole, ...] = ()
    detectors: Tuple[DetectorInfo, ...] = ()
    observable_basis: Optional[Basis] = None
    magic_qubit: Optional[int] = None
    channels: Dict[str, ChannelDistribution] = Field(default_factory=dict)
    noisy: bool = False

    @property
    def data_qubits(self) -> Tuple[int, ...]:
        return tuple(i for i, role in enumerate(self.qubit_roles) if role == QubitRole.data)

    def detector_indices(self, stage: int) -> Tuple[int, ...]:
        return tuple(d.index for d in self.detectors if d.stage == stage)


class Region(str, Enum):
    magic = "magic"
    one = "I"
    two = "II"
    three = "III"
    four = "IV"

    @property
    def row_side(self) -> bool:
        return self in (Region.one, Region.three)

    @property
    def inner(self) -> bool:
        """Inside the injection patch (prepared before the first stage)."""
        return self in (Region.magic, Region.one, Region.two)


class InitBasis(str, Enum):
    zero = "zero"
    plus = "plus"
    magic = "magic"


class RegionAssignment(BaseModel):
    """Region and preparation basis of every data qubit of the extended patch."""
    model_config = ConfigDict(frozen=True)

    d1: int
    d2: int
    method: str
    code_type: str
    regions: Dict[int, Region]
    init_basis: Dict[int, InitBasis]

    def qubits_in(self, *regions: Region) -> Tuple[int, ...]:
        return tuple(sorted(q for q, region in self.regions.items() if region in regions))
