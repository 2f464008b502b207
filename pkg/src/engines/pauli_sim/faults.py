# hexinject - Single-Fault Propagation
# Deterministic fault signatures, blind-qubit search and flag audits

from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.core.logging.logger import setup_logger
from src.engines.circuit_builder import round_circuit
from src.schemas.circuit import Circuit, InstructionKind
from src.schemas.layout import CodeLayout
from .frames import FrameState, execute, fault_injections, unpack_rows

logger = setup_logger(__name__)

K = InstructionKind

FAULT_CHUNK = 8192

_LABELS = {(False, False): "I", (True, False): "X", (True, True): "Y", (False, True): "Z"}


class FaultEffect(BaseModel):
    """Detector signature of one inserted Pauli, plus the data-qubit frame left at the stop point."""
    model_config = ConfigDict(frozen=True)

    detectors: FrozenSet[int] = frozenset()
    observable_flip: bool = False
    residual: Dict[int, str] = {}

    @property
    def silent(self) -> bool:
        return not self.detectors


def propagate_faults(
    circuit: Circuit,
    faults: Sequence[Tuple[int, str]],
    until: Optional[int] = None,
) -> List[FaultEffect]:
    """
    Propagate many single faults at once, one fault per packed column.

    Noise instructions are skipped. A fault at a MeasureZ hits the qubit
    just before it is read; a fault at a ReadoutFlip takes "X" and flips
    the record.

    Args:
        circuit: Circuit to propagate through
        faults: (instruction index, Pauli string) pairs; the Pauli has one
            factor per qubit of the instruction
        until: Stop after this instruction; detectors later in the circuit
            stay unfired and the residual is read at this point

    Returns:
        One FaultEffect per fault, in input order

    Raises:
        ValueError: On an out-of-range location, an annotation location or a malformed Pauli
    """
    if until is not None and not 0 <= until < len(circuit.instructions):
        raise ValueError(f"until={until} out of range [0, {len(circuit.instructions)})")
    data = np.array(circuit.data_qubits, dtype=np.intp)
    effects: List[FaultEffect] = []
    for start in range(0, len(faults), FAULT_CHUNK):
        chunk = faults[start:start + FAULT_CHUNK]
        state = FrameState(circuit, len(chunk))
        injections = fault_injections(circuit, chunk, state.n_words)
        execute(circuit, state, injections=injections, until=until)

        n_det = len(circuit.detectors)
        fired = unpack_rows(state.detectors, len(chunk))[:n_det].T
        if state.observables:
            flips = unpack_rows(state.observables[0], len(chunk))[0]
        else:
            flips = np.zeros(len(chunk), dtype=bool)
        if data.size:
            xs = unpack_rows(state.x[data], len(chunk)).T
            zs = unpack_rows(state.z[data], len(chunk)).T
        for column in range(len(chunk)):
            residual: Dict[int, str] = {}
            if data.size:
                for position in np.flatnonzero(xs[column] | zs[column]):
                    residual[int(data[position])] = _LABELS[(bool(xs[column, position]), bool(zs[column, position]))]
            effects.append(FaultEffect(
                detectors=frozenset(int(d) for d in np.flatnonzero(fired[column])),
                observable_flip=bool(flips[column]),
                residual=residual,
            ))
    return effects


def propagate_fault(
    circuit: Circuit,
    location: int,
    pauli: str,
    until: Optional[int] = None,
) -> FaultEffect:
    """Signature of a single Pauli inserted at one instruction of a noiseless run."""
    return propagate_faults(circuit, [(location, pauli)], until=until)[0]


def _initialization_location(circuit: Circuit, qubit: int) -> Optional[int]:
    """Last preparation step (reset or Hadamard) of a data qubit in a round-0 phase."""
    location = None
    for index, inst in enumerate(circuit.instructions):
        if inst.round == 0 and inst.kind in (K.reset, K.hadamard) and inst.qubits == (qubit,):
            location = index
    return location


def blind_faults(circuit: Circuit) -> Dict[int, List[str]]:
    """
    Data qubits with an initialization fault that fires nothing but flips the observable.

    Returns:
        Qubit id -> list of such Paulis (subset of X, Y, Z)
    """
    candidates: List[Tuple[int, int, str]] = []
    for qubit in circuit.data_qubits:
        if qubit == circuit.magic_qubit:
            continue
        location = _initialization_location(circuit, qubit)
        if location is None:
            continue
        for pauli in ("X", "Y", "Z"):
            candidates.append((qubit, location, pauli))

    effects = propagate_faults(circuit, [(location, pauli) for _, location, pauli in candidates])
    blind: Dict[int, List[str]] = {}
    for (qubit, _, pauli), effect in zip(candidates, effects):
        if effect.silent and effect.observable_flip:
            blind.setdefault(qubit, []).append(pauli)
    return blind


def find_blind_qubits(*circuits: Circuit) -> Set[int]:
    """
    Blind data qubits over one or more readout-basis circuits of a configuration.

    The magic qubit is excluded; the union over circuits is returned since
    X-type and Z-type blindness show up in different readout bases.
    """
    found: Set[int] = set()
    for circuit in circuits:
        found.update(blind_faults(circuit))
    logger.debug("Blind-qubit scan", extra={"context": {"circuits": len(circuits), "blind": sorted(found)}})
    return found


def flag_symmetry_violations(layout: CodeLayout, mirror_flags: bool = True) -> List[Dict[str, object]]:
    """
    Flag faults that spread onto more than one data qubit within a round.

    Every X, Y or Z on a flag right after a two-qubit gate touching it is
    propagated to the end of an isolated round; the data-qubit residual of a
    mirrored chain holds at most one qubit.

    Returns:
        One dict per violation with location, flag, pauli and data qubits
    """
    circuit = round_circuit(layout, mirror_flags=mirror_flags)
    flags = set(layout.flag_qubits)
    faults: List[Tuple[int, str]] = []
    meta: List[Tuple[int, int, str]] = []
    for index, inst in enumerate(circuit.instructions):
        if not inst.kind.is_two_qubit_gate:
            continue
        for slot, qubit in enumerate(inst.qubits):
            if qubit not in flags:
                continue
            for label in ("X", "Y", "Z"):
                pauli = "".join(label if i == slot else "I" for i in range(2))
                faults.append((index, pauli))
                meta.append((index, qubit, label))

    violations: List[Dict[str, object]] = []
    if not faults:
        return violations
    effects = propagate_faults(circuit, faults, until=len(circuit.instructions) - 1)
    for (index, flag, label), effect in zip(meta, effects):
        if len(effect.residual) > 1:
            violations.append({
                "location": index,
                "flag": flag,
                "pauli": label,
                "data_qubits": sorted(effect.residual),
            })
    if violations:
        logger.warning(
            "Flag faults spread to multiple data qubits",
            extra={"context": {"violations": len(violations), "mirror_flags": mirror_flags}},
        )
    return violations


def data_effect_type(effect: FaultEffect) -> Optional[str]:
    """'X' or 'Z' when every residual data factor has that type, else None."""
    kinds = set(effect.residual.values())
    if len(kinds) == 1:
        return next(iter(kinds))
    return None
