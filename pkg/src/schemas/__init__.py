"""
Schema Foundation
Pydantic models shared by every engine
"""

from .models import (
    CodeType,
    Structure,
    InitMethod,
    Basis,
    RunStatus,
    NoiseParams,
    InjectionConfig,
    SweepGrid,
    BasisOutcome,
    ExperimentResult,
    AuditCheck,
    AuditReport,
    INFINITE_BIAS,
    CSV_COLUMNS,
    parse_bias,
    format_bias,
)
from .layout import (
    QubitRole,
    Coord,
    Qubit,
    Leg,
    StabilizerSpec,
    LogicalOperatorSpec,
    CodeLayout,
)
from .circuit import (
    InstructionKind,
    DetectorClass,
    Instruction,
    DetectorInfo,
    ChannelDistribution,
    Circuit,
    Region,
    InitBasis,
    RegionAssignment,
)

__all__ = [
    "CodeType",
    "Structure",
    "InitMethod",
    "Basis",
    "RunStatus",
    "NoiseParams",
    "InjectionConfig",
    "SweepGrid",
    "BasisOutcome",
    "ExperimentResult",
    "AuditCheck",
    "AuditReport",
    "INFINITE_BIAS",
    "CSV_COLUMNS",
    "parse_bias",
    "format_bias",
    "QubitRole",
    "Coord",
    "Qubit",
    "Leg",
    "StabilizerSpec",
    "LogicalOperatorSpec",
    "CodeLayout",
    "InstructionKind",
    "DetectorClass",
    "Instruction",
    "DetectorInfo",
    "ChannelDistribution",
    "Circuit",
    "Region",
    "InitBasis",
    "RegionAssignment",
]
