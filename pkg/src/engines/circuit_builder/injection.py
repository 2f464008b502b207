# hexinject - Injection Circuit Compiler
# Stage I post-selected injection, Stage II extension rounds, transversal readout

from typing import Dict, Iterable, List, Optional, Tuple

from src.core.logging.logger import setup_logger
from src.engines.code_layout import build_layout, grid_point
from src.engines.noise_model import attach_noise
from src.schemas.circuit import (
    Circuit,
    DetectorClass,
    DetectorInfo,
    InitBasis,
    Instruction,
    InstructionKind,
    RegionAssignment,
)
from src.schemas.layout import CodeLayout, Leg, LogicalOperatorSpec
from src.schemas.models import Basis, InjectionConfig, NoiseParams
from .regions import assign_regions
from .schedule import remap, stabilizer_block

logger = setup_logger(__name__)

K = InstructionKind


class _Assembler:
    """Accumulates instructions, numbers measurement records and detectors."""

    def __init__(self):
        self.instructions: List[Instruction] = []
        self.detectors: List[DetectorInfo] = []
        self.records = 0
        self.stage = 1
        self.round = 0

    def phase(self, stage: int, round_index: int) -> None:
        self.stage = stage
        self.round = round_index

    def emit(self, inst: Instruction) -> Optional[int]:
        update = {"stage": self.stage, "round": self.round}
        record = None
        if inst.kind == K.measure:
            record = self.records
            update["record"] = record
            self.records += 1
        self.instructions.append(inst.model_copy(update=update))
        return record

    def prepare(self, qubit: int, basis: InitBasis) -> None:
        self.emit(Instruction(kind=K.reset, qubits=(qubit,)))
        if basis == InitBasis.plus:
            self.emit(Instruction(kind=K.hadamard, qubits=(qubit,)))

    def detector(
        self,
        records: Iterable[int],
        detector_class: DetectorClass,
        anchor: int,
        postselect: bool = False,
    ) -> None:
        round_index = max(self.round, 1)
        self.detectors.append(DetectorInfo(
            index=len(self.detectors),
            stage=self.stage,
            detector_class=detector_class,
            round=round_index,
            postselect=postselect,
            anchor=anchor,
        ))
        self.instructions.append(Instruction(
            kind=K.detector,
            records=tuple(records),
            stage=self.stage,
            detector_class=detector_class,
            round=round_index,
            postselect=postselect,
        ))

    def observable(self, records: Iterable[int]) -> None:
        self.instructions.append(Instruction(
            kind=K.observable,
            records=tuple(records),
            stage=self.stage,
            round=self.round,
        ))


def _leg_matches(leg: Leg, basis: Dict[int, InitBasis], data: Optional[int] = None) -> bool:
    """A leg is deterministic when its qubit is an eigenstate of the leg Pauli."""
    qubit = leg.data if data is None else data
    expected = InitBasis.zero if leg.pauli == "Z" else InitBasis.plus
    return basis.get(qubit) == expected


def readout_paulis(layout: CodeLayout, logical: LogicalOperatorSpec) -> Dict[int, str]:
    """
    Measurement Pauli of every data qubit in the transversal readout.

    Stabilizers fall into two families by the row parity of their syndrome,
    and inside one family each data qubit meets a single leg Pauli. The
    family that agrees with the tested logical on its support is read out,
    which rebuilds every stabilizer able to see a flip of that logical.

    Raises:
        ValueError: If no family covers the data qubits consistently with the logical
    """
    families: Dict[int, Dict[int, str]] = {0: {}, 1: {}}
    consistent = {0: True, 1: True}
    for stabilizer in layout.stabilizers:
        family = grid_point(layout.qubit(stabilizer.syndrome).coord)[0] % 2
        paulis = families[family]
        for leg in stabilizer.legs:
            if paulis.setdefault(leg.data, leg.pauli) != leg.pauli:
                consistent[family] = False
    data = set(layout.data_qubits)
    for family in (0, 1):
        paulis = families[family]
        if not consistent[family] or set(paulis) != data:
            continue
        if all(paulis[q] == logical.pauli for q in logical.support):
            return dict(paulis)
    raise ValueError(
        f"No stabilizer family of the {layout.code_type.value} layout matches logical {logical.pauli}"
    )


def _coord_map(layout_d1: CodeLayout, layout_d2: CodeLayout) -> Dict[int, int]:
    by_coord = layout_d2.by_coord()
    mapping = {}
    for q in layout_d1.qubits:
        if q.coord not in by_coord:
            raise ValueError(f"Injection patch qubit at {tuple(q.coord)} is missing from the extended patch")
        mapping[q.id] = by_coord[q.coord]
    return mapping


def _check_consistency(layout_d1: CodeLayout, layout_d2: CodeLayout, regions: RegionAssignment) -> None:
    if layout_d1.code_type != layout_d2.code_type or layout_d1.structure != layout_d2.structure:
        raise ValueError("Injection and extended layouts must share code type and structure")
    if layout_d1.flags_per_leg != layout_d2.flags_per_leg:
        raise ValueError("Injection and extended layouts must share flags_per_leg")
    if layout_d1.distance > layout_d2.distance:
        raise ValueError(f"d1={layout_d1.distance} exceeds d2={layout_d2.distance}")
    if regions.d1 != layout_d1.distance or regions.d2 != layout_d2.distance:
        raise ValueError(
            f"Region assignment for d1={regions.d1}, d2={regions.d2} does not match layouts "
            f"d1={layout_d1.distance}, d2={layout_d2.distance}"
        )
    if regions.code_type != layout_d2.code_type.value:
        raise ValueError(f"Region assignment built for {regions.code_type}, layout is {layout_d2.code_type.value}")
    if set(regions.regions) != set(layout_d2.data_qubits):
        raise ValueError("Region assignment does not cover exactly the extended patch data qubits")


def _measure_round(
    asm: _Assembler,
    layout: CodeLayout,
    mapping: Optional[Dict[int, int]],
    mirror_flags: bool,
) -> Tuple[Dict[int, int], List[Tuple[int, int]]]:
    """Emit one round; returns syndrome records and (flag, record) pairs in the circuit's ids."""
    outcomes: Dict[int, int] = {}
    flags: List[Tuple[int, int]] = []
    for stabilizer in sorted(layout.stabilizers, key=lambda st: st.syndrome):
        syndrome = stabilizer.syndrome if mapping is None else mapping[stabilizer.syndrome]
        for inst in stabilizer_block(layout, stabilizer, mirror_flags):
            record = asm.emit(remap(inst, mapping))
            if record is None:
                continue
            qubit = inst.qubits[0] if mapping is None else mapping[inst.qubits[0]]
            if qubit == syndrome:
                outcomes[syndrome] = record
            else:
                flags.append((qubit, record))
    return outcomes, flags


def build_injection_circuit(
    layout_d1: CodeLayout,
    layout_d2: CodeLayout,
    regions: RegionAssignment,
    noise_params: Optional[NoiseParams] = None,
    readout_basis: Basis = Basis.z,
    mirror_flags: bool = True,
) -> Circuit:
    """
    Compile the full two-stage injection protocol.

    Stage I prepares the injection patch, runs two post-selected rounds and
    checks every flag. Stage II prepares regions III/IV and runs d2 rounds
    over the extended patch. The final layer reads every data qubit in the
    Pauli of the stabilizer family sharing the tested logical's type (see
    readout_paulis), reconstructs that whole family against the last round,
    and records the tested logical parity.

    Args:
        layout_d1: Injection patch layout
        layout_d2: Extended patch layout (qubit ids of the circuit)
        regions: Region assignment over layout_d2
        noise_params: Attach noise when given
        readout_basis: z tests the logical Z parity, x the logical X parity
        mirror_flags: Undo flag chains symmetrically (False builds the audit mutant)

    Returns:
        Compiled Circuit, noisy when noise_params is given

    Raises:
        ValueError: If layouts and regions disagree, or the tested logical is
            not prepared in its own eigenbasis
    """
    readout_basis = Basis(readout_basis)
    _check_consistency(layout_d1, layout_d2, regions)
    to_d2 = _coord_map(layout_d1, layout_d2)
    magic = layout_d2.magic_qubit
    magic_basis = InitBasis.zero if readout_basis == Basis.z else InitBasis.plus

    basis: Dict[int, InitBasis] = {
        q: (magic_basis if b == InitBasis.magic else b) for q, b in regions.init_basis.items()
    }
    inner_data = {q for q, region in regions.regions.items() if region.inner}
    if inner_data != {to_d2[q] for q in layout_d1.data_qubits}:
        raise ValueError("Regions I/II and the magic qubit do not cover exactly the injection patch")
    outer_data = sorted(set(layout_d2.data_qubits) - inner_data)

    asm = _Assembler()

    # Stage I
    asm.phase(1, 0)
    for q in sorted(inner_data):
        asm.prepare(q, basis[q])

    d1_stabilizers = sorted(layout_d1.stabilizers, key=lambda st: st.syndrome)
    previous: Dict[int, int] = {}
    for round_index in (1, 2):
        asm.phase(1, round_index)
        outcomes, flags = _measure_round(asm, layout_d1, to_d2, mirror_flags)
        for stabilizer in d1_stabilizers:
            s = to_d2[stabilizer.syndrome]
            if round_index == 1:
                legs = [(to_d2[leg.data], leg) for leg in stabilizer.legs]
                if any(q == magic for q, _ in legs):
                    continue
                if all(_leg_matches(leg, basis, q) for q, leg in legs):
                    asm.detector((outcomes[s],), DetectorClass.stabilizer_compare, s, postselect=True)
            else:
                asm.detector((outcomes[s], previous[s]), DetectorClass.stabilizer_compare, s, postselect=True)
        for flag, record in flags:
            asm.detector((record,), DetectorClass.flag_check, flag, postselect=True)
        previous = outcomes
    injection_outcomes = previous

    # Stage II
    counterparts: Dict[int, bool] = {}
    d1_legs = {
        to_d2[st.syndrome]: {(to_d2[leg.data], leg.pauli) for leg in st.legs}
        for st in layout_d1.stabilizers
    }
    for stabilizer in layout_d2.stabilizers:
        old = d1_legs.get(stabilizer.syndrome)
        if old is not None:
            inside = {(leg.data, leg.pauli) for leg in stabilizer.legs if leg.data in inner_data}
            counterparts[stabilizer.syndrome] = inside == old

    asm.phase(2, 0)
    for q in outer_data:
        asm.prepare(q, basis[q])

    d2_stabilizers = sorted(layout_d2.stabilizers, key=lambda st: st.syndrome)
    d2 = layout_d2.distance
    previous = {}
    for round_index in range(1, d2 + 1):
        asm.phase(2, round_index)
        outcomes, flags = _measure_round(asm, layout_d2, None, mirror_flags)
        for stabilizer in d2_stabilizers:
            s = stabilizer.syndrome
            if round_index > 1:
                asm.detector((outcomes[s], previous[s]), DetectorClass.stabilizer_compare, s)
                continue
            new_legs = [leg for leg in stabilizer.legs if leg.data not in inner_data]
            if counterparts.get(s):
                if all(_leg_matches(leg, basis) for leg in new_legs):
                    asm.detector((outcomes[s], injection_outcomes[s]), DetectorClass.stabilizer_compare, s)
            elif len(new_legs) == len(stabilizer.legs) and all(_leg_matches(leg, basis) for leg in new_legs):
                asm.detector((outcomes[s],), DetectorClass.stabilizer_compare, s)
        for flag, record in flags:
            asm.detector((record,), DetectorClass.flag_check, flag)
        previous = outcomes

    logical = layout_d2.logical_z if readout_basis == Basis.z else layout_d2.logical_x
    needed = InitBasis.zero if logical.pauli == "Z" else InitBasis.plus
    wrong = [q for q in logical.support if basis[q] != needed]
    if wrong:
        raise ValueError(
            f"Logical {logical.pauli} support qubits {wrong} are not prepared in the {needed.value} basis"
        )
    measured = readout_paulis(layout_d2, logical)

    # Transversal readout
    asm.phase(2, d2 + 1)
    data_records: Dict[int, int] = {}
    for q in sorted(layout_d2.data_qubits):
        if measured[q] == "X":
            asm.emit(Instruction(kind=K.hadamard, qubits=(q,)))
        data_records[q] = asm.emit(Instruction(kind=K.measure, qubits=(q,)))
    for stabilizer in d2_stabilizers:
        if all(measured[leg.data] == leg.pauli for leg in stabilizer.legs):
            records = [data_records[leg.data] for leg in stabilizer.legs]
            records.append(previous[stabilizer.syndrome])
            asm.detector(records, DetectorClass.final_readout, stabilizer.syndrome)
    asm.observable(data_records[q] for q in logical.support)

    circuit = Circuit(
        instructions=tuple(asm.instructions),
        qubit_count=len(layout_d2.qubits),
        measurement_count=asm.records,
        qubit_coords=tuple(q.coord for q in layout_d2.qubits),
        qubit_roles=tuple(q.role for q in layout_d2.qubits),
        detectors=tuple(asm.detectors),
        observable_basis=readout_basis,
        magic_qubit=magic,
    )
    logger.debug(
        "Compiled injection circuit",
        extra={"context": {
            "code": layout_d2.code_type.value,
            "structure": layout_d2.structure.value,
            "d1": layout_d1.distance,
            "d2": d2,
            "method": regions.method,
            "basis": readout_basis.value,
            "instructions": len(circuit.instructions),
            "detectors": len(circuit.detectors),
        }},
    )
    if noise_params is not None:
        circuit = attach_noise(circuit, noise_params)
    return circuit


def compile_config(
    config: InjectionConfig,
    basis: Basis,
    noisy: bool = True,
    mirror_flags: bool = True,
) -> Circuit:
    """Layouts, regions and circuit for one configuration and readout basis."""
    layout_d1 = build_layout(config.code, config.structure, config.d1, config.flags_per_leg)
    layout_d2 = build_layout(config.code, config.structure, config.d2, config.flags_per_leg)
    regions = assign_regions(layout_d2, config.init_method, config.d1, config.d2)
    return build_injection_circuit(
        layout_d1,
        layout_d2,
        regions,
        noise_params=config.noise if noisy else None,
        readout_basis=basis,
        mirror_flags=mirror_flags,
    )
