# hexinject - Biased Pauli Channels
# Single/two-qubit channel tables and noise insertion into compiled circuits

from itertools import product
from typing import Dict, List, Optional, Tuple

from src.core.logging.logger import setup_logger
from src.schemas.circuit import ChannelDistribution, Circuit, Instruction, InstructionKind
from src.schemas.models import INFINITE_BIAS, BiasValue, NoiseParams, parse_bias

logger = setup_logger(__name__)

SINGLE_LABELS: Tuple[str, ...] = ("X", "Y", "Z")
# IX, IY, IZ, XI, ..., ZZ
DOUBLE_LABELS: Tuple[str, ...] = tuple(
    a + b for a, b in product("IXYZ", repeat=2) if a + b != "II"
)
# Pairs made only of Z and identity
_DEPHASING_PAIRS = {"IZ", "ZI", "ZZ"}

SINGLE = "single"
DOUBLE = "double"


def _check_rate(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Error probability must lie in [0, 1], got {p}")
    return float(p)


def single_qubit_channel(p: float, eta: BiasValue) -> ChannelDistribution:
    """
    One-qubit biased Pauli channel.

    P_X = P_Y = p/(2(eta+1)) and P_Z = eta*p/(eta+1); infinite bias puts
    all weight on Z.

    Raises:
        ValueError: If p is outside [0, 1] or eta < 0.5
    """
    p = _check_rate(p)
    eta = parse_bias(eta)
    if eta == INFINITE_BIAS:
        px, pz = 0.0, p
    else:
        px = p / (2 * (eta + 1))
        pz = (eta * p) / (eta + 1)
    return ChannelDistribution(arity=1, p=p, support=(("X", px), ("Y", px), ("Z", pz)))


def two_qubit_channel(p: float, eta: BiasValue) -> ChannelDistribution:
    """
    Two-qubit biased Pauli channel over the 15 non-identity pairs.

    IZ, ZI and ZZ each get eta*p/(3(eta+2)); the other twelve get
    p/(6(eta+2)). Infinite bias splits p evenly over the three Z pairs.

    Raises:
        ValueError: If p is outside [0, 1] or eta < 0.5
    """
    p = _check_rate(p)
    eta = parse_bias(eta)
    if eta == INFINITE_BIAS:
        strong, weak = p / 3, 0.0
    else:
        strong = (eta * p) / (3 * (eta + 2))
        weak = p / (6 * (eta + 2))
    support = tuple((label, strong if label in _DEPHASING_PAIRS else weak) for label in DOUBLE_LABELS)
    return ChannelDistribution(arity=2, p=p, support=support)


def depolarizing_channel(p: float, arity: int) -> ChannelDistribution:
    """Uniform channel: p/3 per one-qubit Pauli, p/15 per two-qubit pair."""
    p = _check_rate(p)
    if arity == 1:
        return ChannelDistribution(arity=1, p=p, support=tuple((label, p / 3) for label in SINGLE_LABELS))
    if arity == 2:
        return ChannelDistribution(arity=2, p=p, support=tuple((label, p / 15) for label in DOUBLE_LABELS))
    raise ValueError(f"arity must be 1 or 2, got {arity}")


def channels_for(params: NoiseParams) -> Dict[str, ChannelDistribution]:
    return {
        SINGLE: single_qubit_channel(params.p_single, params.eta),
        DOUBLE: two_qubit_channel(params.p_double, params.eta),
    }


def attach_noise(
    circuit: Circuit,
    params: NoiseParams,
    channels: Optional[Dict[str, ChannelDistribution]] = None,
) -> Circuit:
    """
    Insert noise after every gate, reset and measurement.

    Noise2 follows each CNOT/CZ, Noise1 each Hadamard and reset, and a
    ReadoutFlip with p_readout follows each MeasureZ. Locations are inserted
    even at zero probability so noise placement never depends on the rates.

    Args:
        circuit: Noiseless compiled circuit
        params: Rates and bias
        channels: Optional channel tables overriding the ones derived from params

    Returns:
        New circuit with noise instructions and channel tables

    Raises:
        ValueError: If the circuit already carries noise
    """
    if circuit.noisy or any(inst.kind.is_noise for inst in circuit.instructions):
        raise ValueError("Circuit already has noise attached")

    tables = channels if channels is not None else channels_for(params)
    for name in (SINGLE, DOUBLE):
        if name not in tables:
            raise ValueError(f"Missing channel table: {name}")

    instructions: List[Instruction] = []
    for inst in circuit.instructions:
        instructions.append(inst)
        if inst.kind.is_two_qubit_gate:
            instructions.append(Instruction(
                kind=InstructionKind.noise2,
                qubits=inst.qubits,
                channel=DOUBLE,
                probability=tables[DOUBLE].p,
                stage=inst.stage,
                round=inst.round,
            ))
        elif inst.kind in (InstructionKind.hadamard, InstructionKind.reset):
            instructions.append(Instruction(
                kind=InstructionKind.noise1,
                qubits=inst.qubits,
                channel=SINGLE,
                probability=tables[SINGLE].p,
                stage=inst.stage,
                round=inst.round,
            ))
        elif inst.kind == InstructionKind.measure:
            instructions.append(Instruction(
                kind=InstructionKind.readout_flip,
                record=inst.record,
                probability=params.p_readout,
                stage=inst.stage,
                round=inst.round,
            ))

    noisy = circuit.model_copy(update={
        "instructions": tuple(instructions),
        "channels": dict(tables),
        "noisy": True,
    })
    logger.debug(
        "Attached noise",
        extra={"context": {
            "locations": len(instructions) - len(circuit.instructions),
            "p_double": params.p_double,
            "eta": params.eta,
        }},
    )
    return noisy


def noise_location_count(circuit: Circuit) -> int:
    return sum(1 for inst in circuit.instructions if inst.kind.is_noise)
