# hexinject - Detection Event Sampler
# Batched Monte Carlo sampling of detectors and observable flips

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from src.core.config import load_settings
from src.core.logging.logger import setup_logger
from src.schemas.circuit import ChannelDistribution, Circuit, Instruction, InstructionKind
from .frames import FrameState, execute, flip_positions, pauli_bits, unpack_rows

logger = setup_logger(__name__)

K = InstructionKind


@dataclass
class ShotBatch:
    """Detection events (shots x detectors) and observable flips of one batch."""
    detectors: np.ndarray
    observables: np.ndarray
    seed: int
    batch_index: int
    shots: int

    def postselected(self, columns: Iterable[int]) -> np.ndarray:
        """Boolean mask of shots where none of the given detectors fired."""
        columns = list(columns)
        if not columns:
            return np.ones(self.shots, dtype=bool)
        return ~self.detectors[:, columns].any(axis=1)


def location_rng(seed: int, batch_index: int, location: int) -> np.random.Generator:
    """Independent stream per (seed, batch, instruction); batch order never changes results."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(batch_index, location)))


class _ChannelSampler:
    """Per-channel label masks, so each draw becomes a few packed XORs."""

    def __init__(self, table: ChannelDistribution):
        total = table.total()
        self.labels = [label for label, _ in table.support]
        self.weights = np.array([prob for _, prob in table.support], dtype=float)
        self.weights = self.weights / total if total > 0 else self.weights
        # masks[slot][component] -> bool per label; component 0 = X, 1 = Z
        self.masks = [
            [np.array([bool(pauli_bits(label[slot])[component]) for label in self.labels]) for component in (0, 1)]
            for slot in range(table.arity)
        ]

    def apply(self, rng: np.random.Generator, inst: Instruction, state: FrameState) -> None:
        hits = rng.binomial(state.columns, inst.probability)
        if hits == 0:
            return
        positions = rng.choice(state.columns, size=hits, replace=False)
        labels = rng.choice(len(self.labels), size=hits, p=self.weights)
        for slot, qubit in enumerate(inst.qubits):
            x_mask, z_mask = self.masks[slot]
            flip_positions(state.x[qubit], positions[x_mask[labels]])
            flip_positions(state.z[qubit], positions[z_mask[labels]])


def sample_batch(circuit: Circuit, shots: int, seed: int, batch_index: int = 0) -> ShotBatch:
    """
    Sample one batch of shots.

    Args:
        circuit: Circuit, normally with noise attached
        shots: Shots in this batch
        seed: Master seed
        batch_index: Stream index of this batch

    Returns:
        ShotBatch with boolean detector and observable arrays
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    samplers: Dict[str, _ChannelSampler] = {
        name: _ChannelSampler(table) for name, table in circuit.channels.items()
    }

    def on_noise(index: int, inst: Instruction, state: FrameState) -> None:
        if inst.probability <= 0:
            return
        rng = location_rng(seed, batch_index, index)
        if inst.kind == K.readout_flip:
            hits = rng.binomial(state.columns, inst.probability)
            if hits:
                flip_positions(state.records[inst.record], rng.choice(state.columns, size=hits, replace=False))
            return
        try:
            sampler = samplers[inst.channel]
        except KeyError:
            raise ValueError(f"Noise instruction {index} names unknown channel {inst.channel!r}")
        sampler.apply(rng, inst, state)

    state = execute(circuit, FrameState(circuit, shots), on_noise=on_noise)
    n_det = len(circuit.detectors)
    detectors = unpack_rows(state.detectors, shots).T[:, :n_det] if n_det else np.zeros((shots, 0), dtype=bool)
    if state.observables:
        observables = unpack_rows(state.observables[0], shots)[0]
    else:
        observables = np.zeros(shots, dtype=bool)
    return ShotBatch(
        detectors=np.ascontiguousarray(detectors),
        observables=observables,
        seed=seed,
        batch_index=batch_index,
        shots=shots,
    )


def batch_plan(shots: int, batch_size: Optional[int] = None) -> List[Tuple[int, int]]:
    """(batch_index, shots) pairs covering the requested shot count."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    size = batch_size or load_settings().batch_size
    if size < 1:
        raise ValueError(f"batch_size must be >= 1, got {size}")
    plan = []
    index = 0
    remaining = shots
    while remaining > 0:
        plan.append((index, min(size, remaining)))
        remaining -= size
        index += 1
    return plan


def sample(
    circuit: Circuit,
    shots: int,
    seed: int,
    batch_size: Optional[int] = None,
) -> Iterator[ShotBatch]:
    """
    Stream shot batches for a circuit.

    Batches are reproducible from (seed, batch index, batch size); the
    default batch size comes from HEXINJECT_BATCH_SIZE.

    Raises:
        ValueError: If shots < 1
    """
    plan = batch_plan(shots, batch_size)
    logger.debug(
        "Sampling circuit",
        extra={"context": {"shots": shots, "batches": len(plan), "seed": seed, "noisy": circuit.noisy}},
    )
    for batch_index, batch_shots in plan:
        yield sample_batch(circuit, batch_shots, seed, batch_index)


def write_event_dump(path: str, circuit: Circuit, batches: Iterable[ShotBatch]) -> Dict[str, object]:
    """
    Write detection events as a packed binary file plus a JSON sidecar.

    Each shot is one row of detector bits followed by the observable bit,
    packed little-endian and padded to whole bytes. The sidecar (path +
    ".json") records the dimensions and detector metadata.

    Returns:
        The sidecar content
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    shots = 0
    n_det = len(circuit.detectors)
    with target.open("wb") as handle:
        for batch in batches:
            rows = np.concatenate([batch.detectors, batch.observables[:, None]], axis=1)
            handle.write(np.packbits(rows.astype(np.uint8), axis=1, bitorder="little").tobytes())
            shots += batch.shots

    sidecar = {
        "format": "packed-bits-little-endian",
        "shots": shots,
        "detectors": n_det,
        "observables": 1,
        "bytes_per_shot": (n_det + 1 + 7) // 8,
        "observable_basis": circuit.observable_basis.value if circuit.observable_basis else None,
        "detector_metadata": [
            {
                "index": info.index,
                "stage": info.stage,
                "class": info.detector_class.value,
                "round": info.round,
                "postselect": info.postselect,
                "anchor": info.anchor,
            }
            for info in circuit.detectors
        ],
    }
    with open(f"{target}.json", "w", encoding="utf-8") as handle:
        json.dump(sidecar, handle, indent=2)
    logger.info(
        "Wrote detection event dump",
        extra={"context": {"path": str(target), "shots": shots, "detectors": n_det}},
    )
    return sidecar
