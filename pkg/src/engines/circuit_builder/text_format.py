# hexinject - Circuit Text Format
# Line-per-instruction dump and its parser

from typing import Dict, List, Optional, Tuple

from src.schemas.circuit import (
    ChannelDistribution,
    Circuit,
    DetectorClass,
    DetectorInfo,
    Instruction,
    InstructionKind,
)
from src.schemas.layout import Coord, QubitRole
from src.schemas.models import Basis

K = InstructionKind
_MISSING = "-"


def _opt(value: Optional[int]) -> str:
    return _MISSING if value is None else str(value)


def _parse_opt(token: str) -> Optional[int]:
    return None if token == _MISSING else int(token)


def dump_circuit(circuit: Circuit) -> str:
    """
    Deterministic plain-text listing of a circuit.

    Header lines give the qubit count (QUBITS n), each qubit (QUBIT id role
    row col), the readout basis, the magic qubit and channel tables. PHASE
    lines mark stage/round changes.
    Instruction lines: R q, H q, CX c t, CZ a b, M q rec, N1 q channel p,
    N2 a b channel p, RF rec p, DET stage class round post anchor recs...,
    OBS recs... Probabilities use repr so parsing is exact.
    """
    lines: List[str] = []
    if circuit.qubit_count:
        lines.append(f"QUBITS {circuit.qubit_count}")
    for qubit_id, (coord, role) in enumerate(zip(circuit.qubit_coords, circuit.qubit_roles)):
        lines.append(f"QUBIT {qubit_id} {role.value} {coord.row} {coord.col}")
    if circuit.observable_basis is not None:
        lines.append(f"BASIS {circuit.observable_basis.value}")
    if circuit.magic_qubit is not None:
        lines.append(f"MAGIC {circuit.magic_qubit}")
    for name in sorted(circuit.channels):
        table = circuit.channels[name]
        support = " ".join(f"{label}:{prob!r}" for label, prob in table.support)
        lines.append(f"CHANNEL {name} {table.arity} {table.p!r} {support}")
    if circuit.noisy:
        lines.append("NOISY")

    detectors = iter(circuit.detectors)
    phase: Optional[Tuple[Optional[int], Optional[int]]] = None
    for inst in circuit.instructions:
        if inst.kind == K.detector:
            info = next(detectors)
            lines.append(
                f"DET {inst.stage} {inst.detector_class.value} {inst.round} "
                f"{int(inst.postselect)} {_opt(info.anchor)} " + " ".join(str(r) for r in inst.records)
            )
            continue
        current = (inst.stage, inst.round)
        if current != phase:
            lines.append(f"PHASE {_opt(inst.stage)} {_opt(inst.round)}")
            phase = current
        q = inst.qubits
        if inst.kind in (K.reset, K.hadamard):
            lines.append(f"{inst.kind.value} {q[0]}")
        elif inst.kind in (K.cnot, K.cz):
            lines.append(f"{inst.kind.value} {q[0]} {q[1]}")
        elif inst.kind == K.measure:
            lines.append(f"M {q[0]} {inst.record}")
        elif inst.kind == K.noise1:
            lines.append(f"N1 {q[0]} {inst.channel} {inst.probability!r}")
        elif inst.kind == K.noise2:
            lines.append(f"N2 {q[0]} {q[1]} {inst.channel} {inst.probability!r}")
        elif inst.kind == K.readout_flip:
            lines.append(f"RF {inst.record} {inst.probability!r}")
        elif inst.kind == K.observable:
            lines.append("OBS " + " ".join(str(r) for r in inst.records))
    if not lines:
        return ""
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """
    Parse the dump_circuit format back into a Circuit.

    Raises:
        ValueError: On an unknown or malformed line (message carries the line number)
    """
    coords: List[Coord] = []
    roles: List[QubitRole] = []
    instructions: List[Instruction] = []
    detectors: List[DetectorInfo] = []
    channels: Dict[str, ChannelDistribution] = {}
    basis: Optional[Basis] = None
    magic: Optional[int] = None
    noisy = False
    qubit_count = 0
    measurements = 0
    stage: Optional[int] = None
    round_index: Optional[int] = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        head, *rest = line.split()
        try:
            if head == "QUBITS":
                qubit_count = int(rest[0])
            elif head == "QUBIT":
                if int(rest[0]) != len(coords):
                    raise ValueError("qubit ids must be dense and ordered")
                roles.append(QubitRole(rest[1]))
                coords.append(Coord(int(rest[2]), int(rest[3])))
            elif head == "BASIS":
                basis = Basis(rest[0])
            elif head == "MAGIC":
                magic = int(rest[0])
            elif head == "CHANNEL":
                support = tuple((label, float(prob)) for label, prob in (tok.split(":") for tok in rest[3:]))
                channels[rest[0]] = ChannelDistribution(arity=int(rest[1]), p=float(rest[2]), support=support)
            elif head == "NOISY":
                noisy = True
            elif head == "PHASE":
                stage, round_index = _parse_opt(rest[0]), _parse_opt(rest[1])
            elif head in ("R", "H"):
                instructions.append(Instruction(kind=K(head), qubits=(int(rest[0]),), stage=stage, round=round_index))
            elif head in ("CX", "CZ"):
                instructions.append(Instruction(
                    kind=K(head), qubits=(int(rest[0]), int(rest[1])), stage=stage, round=round_index,
                ))
            elif head == "M":
                instructions.append(Instruction(
                    kind=K.measure, qubits=(int(rest[0]),), record=int(rest[1]), stage=stage, round=round_index,
                ))
                measurements += 1
            elif head == "N1":
                instructions.append(Instruction(
                    kind=K.noise1, qubits=(int(rest[0]),), channel=rest[1], probability=float(rest[2]),
                    stage=stage, round=round_index,
                ))
            elif head == "N2":
                instructions.append(Instruction(
                    kind=K.noise2, qubits=(int(rest[0]), int(rest[1])), channel=rest[2],
                    probability=float(rest[3]), stage=stage, round=round_index,
                ))
            elif head == "RF":
                instructions.append(Instruction(
                    kind=K.readout_flip, record=int(rest[0]), probability=float(rest[1]),
                    stage=stage, round=round_index,
                ))
            elif head == "DET":
                det_stage, det_round = int(rest[0]), int(rest[2])
                det_class = DetectorClass(rest[1])
                postselect = rest[3] == "1"
                records = tuple(int(r) for r in rest[5:])
                detectors.append(DetectorInfo(
                    index=len(detectors), stage=det_stage, detector_class=det_class,
                    round=det_round, postselect=postselect, anchor=_parse_opt(rest[4]),
                ))
                instructions.append(Instruction(
                    kind=K.detector, records=records, stage=det_stage, detector_class=det_class,
                    round=det_round, postselect=postselect,
                ))
            elif head == "OBS":
                instructions.append(Instruction(
                    kind=K.observable, records=tuple(int(r) for r in rest), stage=stage, round=round_index,
                ))
            else:
                raise ValueError(f"unknown instruction {head!r}")
        except (IndexError, ValueError) as e:
            raise ValueError(f"Malformed circuit line {number}: {raw!r} ({e})")

    return Circuit(
        instructions=tuple(instructions),
        qubit_count=max(qubit_count, len(coords)),
        measurement_count=measurements,
        qubit_coords=tuple(coords),
        qubit_roles=tuple(roles),
        detectors=tuple(detectors),
        observable_basis=basis,
        magic_qubit=magic,
        channels=channels,
        noisy=noisy,
    )
