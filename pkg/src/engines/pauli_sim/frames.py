# hexinject - Bit-Packed Pauli Frames
# Frame propagation over packed shot/fault columns

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.schemas.circuit import Circuit, InstructionKind

K = InstructionKind
WORD = np.dtype("<u8")
_ONE = np.uint64(1)

_PAULI_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def words_for(columns: int) -> int:
    return max(1, (columns + 63) // 64)


def pack_columns(bits: np.ndarray, n_words: int) -> np.ndarray:
    """Pack a boolean vector (one entry per column) into little-endian uint64 words."""
    packed = np.packbits(bits.astype(np.uint8), bitorder="little")
    buffer = np.zeros(n_words * 8, dtype=np.uint8)
    buffer[:packed.size] = packed
    return buffer.view(WORD)


def unpack_rows(packed: np.ndarray, columns: int) -> np.ndarray:
    """(rows, words) packed words to a (rows, columns) boolean matrix."""
    if packed.ndim == 1:
        packed = packed[None, :]
    as_bytes = np.ascontiguousarray(packed, dtype=WORD).view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=1, bitorder="little")
    return bits[:, :columns].astype(bool)


def flip_positions(row: np.ndarray, positions: np.ndarray) -> None:
    """XOR a 1 into the given column positions of one packed row, in place."""
    if positions.size == 0:
        return
    positions = positions.astype(np.uint64)
    np.bitwise_xor.at(row, (positions >> np.uint64(6)).astype(np.intp), _ONE << (positions & np.uint64(63)))


def pauli_bits(label: str) -> Tuple[int, int]:
    try:
        return _PAULI_BITS[label]
    except KeyError:
        raise ValueError(f"Invalid Pauli character {label!r}; expected one of I, X, Y, Z")


class FrameState:
    """X/Z frame bits per qubit plus measurement records, all packed across columns."""

    def __init__(self, circuit: Circuit, columns: int):
        self.columns = columns
        self.n_words = words_for(columns)
        self.x = np.zeros((circuit.qubit_count, self.n_words), dtype=WORD)
        self.z = np.zeros((circuit.qubit_count, self.n_words), dtype=WORD)
        self.records = np.zeros((max(circuit.measurement_count, 1), self.n_words), dtype=WORD)
        self.detectors = np.zeros((max(len(circuit.detectors), 1), self.n_words), dtype=WORD)
        self.observables: List[np.ndarray] = []


Injection = Tuple[int, np.ndarray, np.ndarray]


def execute(
    circuit: Circuit,
    state: FrameState,
    on_noise=None,
    injections: Optional[Dict[int, List[Injection]]] = None,
    until: Optional[int] = None,
) -> FrameState:
    """
    Propagate frames through the circuit.

    Args:
        circuit: Circuit to run
        state: Packed frame state, updated in place
        on_noise: Callback (index, instruction, state) invoked at noise
            instructions; None runs noiselessly
        injections: Per-location (qubit, x_mask, z_mask) frame flips; qubit
            -1 flips the instruction's measurement record with x_mask.
            Applied after the instruction, or before it for a MeasureZ
        until: Stop after this instruction index

    Returns:
        The same state
    """
    injections = injections or {}
    x, z, records = state.x, state.z, state.records
    detector_index = 0
    last = len(circuit.instructions) - 1 if until is None else until

    def inject(index: int, record: Optional[int]) -> None:
        for qubit, x_mask, z_mask in injections.get(index, ()):
            if qubit < 0:
                records[record] ^= x_mask
            else:
                x[qubit] ^= x_mask
                z[qubit] ^= z_mask

    for index, inst in enumerate(circuit.instructions):
        if index > last:
            break
        kind = inst.kind
        if kind == K.measure:
            inject(index, inst.record)
            records[inst.record] = x[inst.qubits[0]]
            continue
        if kind == K.reset:
            q = inst.qubits[0]
            x[q] = 0
            z[q] = 0
        elif kind == K.hadamard:
            q = inst.qubits[0]
            x[q], z[q] = z[q].copy(), x[q].copy()
        elif kind == K.cnot:
            c, t = inst.qubits
            x[t] ^= x[c]
            z[c] ^= z[t]
        elif kind == K.cz:
            a, b = inst.qubits
            z[a] ^= x[b]
            z[b] ^= x[a]
        elif kind.is_noise:
            if on_noise is not None:
                on_noise(index, inst, state)
        elif kind == K.detector:
            if inst.records:
                state.detectors[detector_index] = np.bitwise_xor.reduce(records[list(inst.records)], axis=0)
            detector_index += 1
        elif kind == K.observable:
            if inst.records:
                state.observables.append(np.bitwise_xor.reduce(records[list(inst.records)], axis=0))
            else:
                state.observables.append(np.zeros(state.n_words, dtype=WORD))
        inject(index, inst.record)
    return state


def fault_injections(
    circuit: Circuit,
    faults: Sequence[Tuple[int, str]],
    n_words: int,
) -> Dict[int, List[Injection]]:
    """
    Turn (location, Pauli string) faults, one per column, into packed injections.

    Raises:
        ValueError: On a bad location, a Pauli of the wrong length, or a
            non-X fault on a readout flip
    """
    count = len(circuit.instructions)
    grouped: Dict[Tuple[int, int], Tuple[np.ndarray, np.ndarray]] = {}
    for column, (location, pauli) in enumerate(faults):
        if not 0 <= location < count:
            raise ValueError(f"Fault location {location} out of range [0, {count})")
        inst = circuit.instructions[location]
        if inst.kind in (K.detector, K.observable):
            raise ValueError(f"Fault location {location} is a {inst.kind.name} annotation, not an operation")
        if inst.kind == K.readout_flip:
            if len(pauli) != 1 or pauli not in "IX":
                raise ValueError(f"Readout flip faults take 'X' or 'I', got {pauli!r}")
            targets = [-1]
        else:
            targets = list(inst.qubits)
            if len(pauli) != len(targets):
                raise ValueError(
                    f"Pauli {pauli!r} has {len(pauli)} factors but location {location} acts on {len(targets)} qubits"
                )
        for qubit, label in zip(targets, pauli):
            xb, zb = pauli_bits(label)
            if not (xb or zb):
                continue
            key = (location, qubit)
            if key not in grouped:
                grouped[key] = (np.zeros(len(faults), dtype=bool), np.zeros(len(faults), dtype=bool))
            grouped[key][0][column] ^= bool(xb)
            grouped[key][1][column] ^= bool(zb)

    injections: Dict[int, List[Injection]] = {}
    for (location, qubit), (xs, zs) in grouped.items():
        injections.setdefault(location, []).append(
            (qubit, pack_columns(xs, n_words), pack_columns(zs, n_words))
        )
    return injections
