# hexinject - Circuit Symmetry
# Canonical circuit structure for comparing circuits under diagonal reflection

from collections import defaultdict
from typing import Dict, List, Tuple

from src.schemas.circuit import Circuit, Instruction, InstructionKind

K = InstructionKind

Label = Tuple[int, int]


def _labels(circuit: Circuit, transpose: bool) -> List[Label]:
    if len(circuit.qubit_coords) != circuit.qubit_count:
        raise ValueError("Circuit structure needs coordinates for every qubit")
    return [(c.col, c.row) if transpose else (c.row, c.col) for c in circuit.qubit_coords]


def _sorted_gate_runs(tokens: List[tuple]) -> List[tuple]:
    """Sort maximal runs of consecutive two-qubit gates; they share the syndrome control and commute."""
    out: List[tuple] = []
    run: List[tuple] = []
    for token in tokens:
        if token[0] in (K.cnot.value, K.cz.value):
            run.append(token)
            continue
        out.extend(sorted(run))
        run = []
        out.append(token)
    out.extend(sorted(run))
    return out


def circuit_structure(circuit: Circuit, transpose: bool = False) -> tuple:
    """
    Canonical, id-free description of a circuit.

    Qubits are named by coordinate (transposed on request) and measurement
    records by (qubit, occurrence). Each phase becomes the sorted set of its
    blocks (one per syndrome in a round, one per qubit in preparation and
    readout) plus the multiset of its detectors. Noise instructions are
    ignored.
    """
    labels = _labels(circuit, transpose)

    record_label: Dict[int, Tuple[Label, int]] = {}
    seen: Dict[int, int] = defaultdict(int)
    for inst in circuit.instructions:
        if inst.kind == K.measure:
            q = inst.qubits[0]
            record_label[inst.record] = (labels[q], seen[q])
            seen[q] += 1

    phases: Dict[Tuple, Dict[str, list]] = {}
    order: List[Tuple] = []
    current_block: Dict[Tuple, List[tuple]] = {}
    for inst in circuit.instructions:
        key = (inst.stage, inst.round)
        if key not in phases:
            phases[key] = {"blocks": [], "per_qubit": defaultdict(list), "detectors": [], "observable": []}
            order.append(key)
        phase = phases[key]
        if inst.kind.is_noise:
            continue
        if inst.kind == K.detector:
            phase["detectors"].append((
                inst.detector_class.value,
                inst.postselect,
                tuple(sorted(record_label[r] for r in inst.records)),
            ))
            continue
        if inst.kind == K.observable:
            phase["observable"].append(tuple(sorted(record_label[r] for r in inst.records)))
            continue

        if inst.kind == K.reset and circuit.qubit_roles[inst.qubits[0]].is_syndrome:
            current_block[key] = []
            phase["blocks"].append(current_block[key])
        token = _token(inst, labels, record_label)
        if key in current_block:
            current_block[key].append(token)
        else:
            phase["per_qubit"][labels[inst.qubits[0]]].append(token)

    canonical = []
    for key in order:
        phase = phases[key]
        blocks = sorted(tuple(_sorted_gate_runs(block)) for block in phase["blocks"])
        per_qubit = sorted((label, tuple(tokens)) for label, tokens in phase["per_qubit"].items())
        canonical.append((
            key,
            tuple(blocks),
            tuple(per_qubit),
            tuple(sorted(phase["detectors"])),
            tuple(phase["observable"]),
        ))
    basis = circuit.observable_basis.value if circuit.observable_basis is not None else None
    return basis, tuple(canonical)


def _token(inst: Instruction, labels: List[Label], record_label: Dict[int, Tuple[Label, int]]) -> tuple:
    qubits = [labels[q] for q in inst.qubits]
    if inst.kind == K.cz:
        qubits.sort()
    if inst.kind == K.measure:
        return (inst.kind.value, tuple(qubits), record_label[inst.record])
    return (inst.kind.value, tuple(qubits))


def circuits_mirror_equivalent(a: Circuit, b: Circuit) -> bool:
    """True when circuit a, reflected across the diagonal, has the structure of circuit b."""
    return circuit_structure(a, transpose=True) == circuit_structure(b)
