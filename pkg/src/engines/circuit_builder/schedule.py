# hexinject - Stabilizer Round Scheduling
# Gate sequences for one stabilizer-measurement round, flag chains mirrored

from typing import Dict, List, Optional

from src.schemas.circuit import (
    Circuit,
    DetectorClass,
    DetectorInfo,
    Instruction,
    InstructionKind,
)
from src.schemas.layout import CodeLayout, Leg, StabilizerSpec
from src.schemas.models import Structure

K = InstructionKind


def _gate(kind: InstructionKind, *qubits: int) -> Instruction:
    return Instruction(kind=kind, qubits=tuple(qubits))


def _coupling(control: int, leg: Leg) -> Instruction:
    """Controlled leg Pauli from the qubit next to the data qubit."""
    return _gate(K.cnot if leg.pauli == "X" else K.cz, control, leg.data)


def uses_direct_z_readout(stabilizer: StabilizerSpec) -> bool:
    """All-Z unflagged checks collect parity on a |0> syndrome via data-controlled CNOTs."""
    return all(leg.pauli == "Z" and not leg.route for leg in stabilizer.legs)


def stabilizer_block(
    layout: CodeLayout,
    stabilizer: StabilizerSpec,
    mirror_flags: bool = True,
) -> List[Instruction]:
    """
    Gate sequence measuring one stabilizer.

    A flagged leg resets its route flags, runs the CNOT chain outward from
    the syndrome, applies the controlled Pauli from the last flag onto the
    data qubit, runs the chain back in reverse and measures the flags. With
    mirror_flags=False the chains are not undone: all flags of the block are
    reset up front and measured after the syndrome.

    MeasureZ instructions are returned without record slots; the caller
    numbers them.
    """
    s = stabilizer.syndrome
    ops: List[Instruction] = [_gate(K.reset, s)]

    if layout.structure == Structure.lattice and uses_direct_z_readout(stabilizer):
        for leg in stabilizer.legs:
            ops.append(_gate(K.cnot, leg.data, s))
        ops.append(_gate(K.measure, s))
        return ops

    block_flags: List[int] = []
    if not mirror_flags:
        for leg in stabilizer.legs:
            for f in leg.route:
                if f not in block_flags:
                    block_flags.append(f)
        ops.extend(_gate(K.reset, f) for f in block_flags)

    ops.append(_gate(K.hadamard, s))
    for leg in stabilizer.legs:
        if not leg.route:
            ops.append(_coupling(s, leg))
            continue
        chain = [s, *leg.route]
        forward = [_gate(K.cnot, a, b) for a, b in zip(chain[:-1], chain[1:])]
        if mirror_flags:
            ops.extend(_gate(K.reset, f) for f in leg.route)
        ops.extend(forward)
        ops.append(_coupling(leg.route[-1], leg))
        if mirror_flags:
            ops.extend(reversed(forward))
            ops.extend(_gate(K.measure, f) for f in leg.route)
    ops.append(_gate(K.hadamard, s))
    ops.append(_gate(K.measure, s))
    if not mirror_flags:
        ops.extend(_gate(K.measure, f) for f in block_flags)
    return ops


def schedule_round(layout: CodeLayout, mirror_flags: bool = True) -> List[Instruction]:
    """
    Ordered gate list for one full round over every stabilizer.

    Stabilizers run one after another in syndrome-id order with legs in
    N, W, E, S order.
    """
    ops: List[Instruction] = []
    for stabilizer in sorted(layout.stabilizers, key=lambda st: st.syndrome):
        ops.extend(stabilizer_block(layout, stabilizer, mirror_flags))
    return ops


def round_circuit(layout: CodeLayout, mirror_flags: bool = True) -> Circuit:
    """
    One isolated round with numbered records and a detector on every flag.

    Used for flag-propagation audits; data qubits are left unprepared.
    """
    instructions: List[Instruction] = []
    detectors: List[DetectorInfo] = []
    flag_set = set(layout.flag_qubits)
    record = 0
    flag_records: List[Dict[str, int]] = []
    for inst in schedule_round(layout, mirror_flags):
        if inst.kind == K.measure:
            inst = inst.model_copy(update={"record": record, "stage": 2, "round": 1})
            if inst.qubits[0] in flag_set:
                flag_records.append({"record": record, "qubit": inst.qubits[0]})
            record += 1
        else:
            inst = inst.model_copy(update={"stage": 2, "round": 1})
        instructions.append(inst)
    for entry in flag_records:
        index = len(detectors)
        detectors.append(DetectorInfo(
            index=index, stage=2, detector_class=DetectorClass.flag_check,
            round=1, anchor=entry["qubit"],
        ))
        instructions.append(Instruction(
            kind=K.detector, records=(entry["record"],), stage=2,
            detector_class=DetectorClass.flag_check, round=1,
        ))
    return Circuit(
        instructions=tuple(instructions),
        qubit_count=len(layout.qubits),
        measurement_count=record,
        qubit_coords=tuple(q.coord for q in layout.qubits),
        qubit_roles=tuple(q.role for q in layout.qubits),
        detectors=tuple(detectors),
        magic_qubit=layout.magic_qubit,
    )


def remap(inst: Instruction, mapping: Optional[Dict[int, int]]) -> Instruction:
    if mapping is None or not inst.qubits:
        return inst
    return inst.model_copy(update={"qubits": tuple(mapping[q] for q in inst.qubits)})
