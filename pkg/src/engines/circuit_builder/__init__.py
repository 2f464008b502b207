# hexinject - Circuit Builder Engine Package
# Region assignment, round scheduling and the two-stage injection circuit

from .regions import assign_regions
from .schedule import (
    stabilizer_block,
    schedule_round,
    round_circuit,
    uses_direct_z_readout,
)
from .injection import build_injection_circuit, compile_config, readout_paulis
from .text_format import dump_circuit, parse_circuit
from .symmetry import circuit_structure, circuits_mirror_equivalent

__all__ = [
    "assign_regions",
    "stabilizer_block",
    "schedule_round",
    "round_circuit",
    "uses_direct_z_readout",
    "build_injection_circuit",
    "compile_config",
    "readout_paulis",
    "dump_circuit",
    "parse_circuit",
    "circuit_structure",
    "circuits_mirror_equivalent",
]
