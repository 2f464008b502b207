# hexinject - Pauli Frame Simulator Package
# Packed frame sampling and single-fault propagation

from .frames import FrameState, execute, fault_injections, pack_columns, unpack_rows, words_for
from .sampler import ShotBatch, batch_plan, location_rng, sample, sample_batch, write_event_dump
from .faults import (
    FaultEffect,
    blind_faults,
    data_effect_type,
    find_blind_qubits,
    flag_symmetry_violations,
    propagate_fault,
    propagate_faults,
)

__all__ = [
    "FrameState",
    "execute",
    "fault_injections",
    "pack_columns",
    "unpack_rows",
    "words_for",
    "ShotBatch",
    "batch_plan",
    "location_rng",
    "sample",
    "sample_batch",
    "write_event_dump",
    "FaultEffect",
    "blind_faults",
    "data_effect_type",
    "find_blind_qubits",
    "flag_symmetry_violations",
    "propagate_fault",
    "propagate_faults",
]
