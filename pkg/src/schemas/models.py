# hexinject - Pydantic Schema Models
# Run configuration, noise parameters, sweep grids and result records

import math
from enum import Enum
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.config import DESK_SHOTS


# Enums for schema validation
class CodeType(str, Enum):
    surface = "surface"
    xzzx = "xzzx"
    zxxz = "zxxz"


class Structure(str, Enum):
    lattice = "lattice"
    heavy_hex = "heavy-hex"


class InitMethod(str, Enum):
    right_triangle = "right-triangle"
    down_triangle = "down-triangle"
    right_square = "right-square"
    down_square = "down-square"

    @property
    def is_down(self) -> bool:
        return self in (InitMethod.down_triangle, InitMethod.down_square)

    @property
    def is_triangle(self) -> bool:
        return self in (InitMethod.down_triangle, InitMethod.right_triangle)


class Basis(str, Enum):
    """Readout basis of one run: z tests the logical Z parity (E_X), x the logical X parity (E_Z)."""
    z = "z"
    x = "x"


class RunStatus(str, Enum):
    completed = "completed"
    no_acceptance = "no_acceptance"
    failed = "failed"
    skipped = "skipped"


INFINITE_BIAS = "inf"
BiasValue = Union[float, Literal["inf"]]

CSV_COLUMNS = [
    "code", "structure", "d1", "d2", "init", "eta", "p2", "p1", "p_readout",
    "shots", "accepted_z", "accepted_x", "ex", "ex_se", "ez", "ez_se", "etotal", "seed",
]

DEFAULT_ETAS: List[BiasValue] = [0.5, 1.0, 5.0, 10.0, 100.0]
DEFAULT_P2S: List[float] = [0.0005, 0.001, 0.002, 0.005, 0.01]
DEFAULT_D2S: List[int] = [3, 5, 7, 9]


def parse_bias(value: Any) -> BiasValue:
    """
    Normalise a bias value to a float or the symbolic infinite marker.

    Args:
        value: number, or one of "inf", "infinite", "infinity" (any case)

    Returns:
        float >= 0.5 or INFINITE_BIAS

    Raises:
        ValueError: If the value is below 0.5 or not a number
    """
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "infinite", "infinity"):
            return INFINITE_BIAS
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"Invalid bias eta: {value!r}. Must be a number >= 0.5 or 'inf'")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"Invalid bias eta: {value!r}. Must be a number >= 0.5 or 'inf'")
    if math.isinf(value) and value > 0:
        return INFINITE_BIAS
    if math.isnan(value) or value < 0.5:
        raise ValueError(f"Bias eta must be >= 0.5, got {value}")
    return float(value)


def format_bias(eta: BiasValue) -> str:
    return INFINITE_BIAS if eta == INFINITE_BIAS else repr(float(eta))


def _check_distance(name: str, value: int) -> int:
    if value < 3 or value % 2 == 0:
        raise ValueError(f"{name} must be an odd integer >= 3, got {value}")
    return value


class NoiseParams(BaseModel):
    """Gate, reset and readout error rates plus the Z bias."""
    model_config = ConfigDict(frozen=True)

    p_double: float = Field(..., ge=0.0, le=1.0)
    p_single: float = Field(..., ge=0.0, le=1.0)
    p_readout: float = Field(..., ge=0.0, le=1.0)
    eta: BiasValue = 0.5

    @model_validator(mode="before")
    @classmethod
    def fill_default_rates(cls, data: Any) -> Any:
        """Default p_single to p_double/20 and p_readout to p_double."""
        if isinstance(data, dict) and data.get("p_double") is not None:
            data = dict(data)
            p_double = float(data["p_double"])
            if data.get("p_single") is None:
                data["p_single"] = p_double / 20
            if data.get("p_readout") is None:
                data["p_readout"] = p_double
        return data

    @field_validator("eta", mode="before")
    @classmethod
    def validate_eta(cls, v: Any) -> BiasValue:
        return parse_bias(v)

    @property
    def is_noiseless(self) -> bool:
        return self.p_double == 0 and self.p_single == 0 and self.p_readout == 0


class InjectionConfig(BaseModel):
    """One injection experiment: code, structure, patch sizes, method, noise and sampling plan."""
    model_config = ConfigDict(frozen=True)

    code: CodeType = CodeType.surface
    structure: Structure = Structure.lattice
    d1: int = 3
    d2: int = 3
    init_method: InitMethod = InitMethod.down_triangle
    noise: NoiseParams = Field(default_factory=lambda: NoiseParams(p_double=0.005))
    shots: int = Field(DESK_SHOTS, ge=1)
    seed: int = Field(0, ge=0)
    bases: Tuple[Basis, ...] = (Basis.z, Basis.x)
    flags_per_leg: int = Field(2, ge=2, le=3)

    @field_validator("d1", "d2")
    @classmethod
    def validate_distance(cls, v: int, info) -> int:
        return _check_distance(info.field_name, v)

    @field_validator("bases")
    @classmethod
    def validate_bases(cls, v: Tuple[Basis, ...]) -> Tuple[Basis, ...]:
        if not v:
            raise ValueError("bases must not be empty")
        # z before x, duplicates removed
        return tuple(b for b in (Basis.z, Basis.x) if b in v)

    @model_validator(mode="after")
    def validate_patch_order(self) -> "InjectionConfig":
        if self.d1 > self.d2:
            raise ValueError(f"d1 must not exceed d2, got d1={self.d1}, d2={self.d2}")
        return self

    def row_key(self) -> str:
        """Stable key identifying this configuration in a sweep table."""
        return "|".join([
            self.code.value,
            self.structure.value,
            str(self.d1),
            str(self.d2),
            self.init_method.value,
            format_bias(self.noise.eta),
            repr(self.noise.p_double),
        ])


class SweepGrid(BaseModel):
    """Axes of a parameter sweep; the table is their Cartesian product."""
    codes: List[CodeType] = Field(default_factory=lambda: list(CodeType))
    structures: List[Structure] = Field(default_factory=lambda: list(Structure))
    methods: List[InitMethod] = Field(default_factory=lambda: list(InitMethod))
    etas: List[BiasValue] = Field(default_factory=lambda: list(DEFAULT_ETAS))
    p2s: List[float] = Field(default_factory=lambda: list(DEFAULT_P2S))
    d2s: List[int] = Field(default_factory=lambda: list(DEFAULT_D2S))
    d1: int = 3
    shots: int = Field(DESK_SHOTS, ge=1)
    seed: int = Field(0, ge=0)
    bases: Tuple[Basis, ...] = (Basis.z, Basis.x)
    flags_per_leg: int = Field(2, ge=2, le=3)

    @field_validator("etas", mode="before")
    @classmethod
    def validate_etas(cls, v: Any) -> List[BiasValue]:
        return [parse_bias(eta) for eta in v]

    @field_validator("p2s")
    @classmethod
    def validate_p2s(cls, v: List[float]) -> List[float]:
        for p in v:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"p2 values must lie in [0, 1], got {p}")
        return v

    @model_validator(mode="after")
    def validate_axes(self) -> "SweepGrid":
        for name in ("codes", "structures", "methods", "etas", "p2s", "d2s"):
            if not getattr(self, name):
                raise ValueError(f"Sweep axis {name} must not be empty")
        _check_distance("d1", self.d1)
        for d2 in self.d2s:
            _check_distance("d2", d2)
            if d2 < self.d1:
                raise ValueError(f"d2 values must be >= d1={self.d1}, got {d2}")
        return self

    def expand(self) -> List[InjectionConfig]:
        """One InjectionConfig per grid point, seeds left at the master seed."""
        configs = []
        for code in self.codes:
            for structure in self.structures:
                for method in self.methods:
                    for eta in self.etas:
                        for p2 in self.p2s:
                            for d2 in self.d2s:
                                configs.append(InjectionConfig(
                                    code=code,
                                    structure=structure,
                                    d1=self.d1,
                                    d2=d2,
                                    init_method=method,
                                    noise=NoiseParams(p_double=p2, eta=eta),
                                    shots=self.shots,
                                    seed=self.seed,
                                    bases=self.bases,
                                    flags_per_leg=self.flags_per_leg,
                                ))
        return configs


class BasisOutcome(BaseModel):
    """Counts and logical flip estimate for one readout basis."""
    basis: Basis
    shots: int = Field(..., ge=0)
    accepted: int = Field(..., ge=0)
    logical_errors: int = Field(0, ge=0)
    rate: Optional[float] = None
    std_error: Optional[float] = None

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.shots if self.shots else 0.0


class ExperimentResult(BaseModel):
    """Aggregated estimates for one configuration."""
    config: InjectionConfig
    status: RunStatus = RunStatus.completed
    outcomes: Dict[str, BasisOutcome] = Field(default_factory=dict)
    ex: Optional[float] = None
    ex_se: Optional[float] = None
    ez: Optional[float] = None
    ez_se: Optional[float] = None
    etotal: Optional[float] = None
    acceptance_rate: float = Field(0.0, ge=0.0, le=1.0)
    dropped_mass: float = 0.0
    wall_time_s: float = 0.0

    def csv_row(self) -> Dict[str, str]:
        """Row for the results table, keyed by CSV_COLUMNS."""
        cfg = self.config
        z = self.outcomes.get(Basis.z.value)
        x = self.outcomes.get(Basis.x.value)
        return {
            "code": cfg.code.value,
            "structure": cfg.structure.value,
            "d1": str(cfg.d1),
            "d2": str(cfg.d2),
            "init": cfg.init_method.value,
            "eta": format_bias(cfg.noise.eta),
            "p2": repr(cfg.noise.p_double),
            "p1": repr(cfg.noise.p_single),
            "p_readout": repr(cfg.noise.p_readout),
            "shots": str(cfg.shots),
            "accepted_z": str(z.accepted) if z else "",
            "accepted_x": str(x.accepted) if x else "",
            "ex": _fmt(self.ex),
            "ex_se": _fmt(self.ex_se),
            "ez": _fmt(self.ez),
            "ez_se": _fmt(self.ez_se),
            "etotal": _fmt(self.etotal),
            "seed": str(cfg.seed),
        }


def _fmt(value: Optional[float]) -> str:
    return "nan" if value is None else repr(float(value))


class AuditCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class AuditReport(BaseModel):
    """Machine-readable pass/fail list produced by verify."""
    checks: List[AuditCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(AuditCheck(name=name, passed=bool(passed), detail=detail))


class TrendStatus(str, Enum):
    passed = "passed"
    failed = "failed"
    inconclusive = "inconclusive"


class TrendCheck(BaseModel):
    """One statistical trend claim evaluated at a 3-sigma margin."""
    name: str
    status: TrendStatus
    detail: str = ""
    estimates: Dict[str, Optional[float]] = Field(default_factory=dict)


class TrendReport(BaseModel):
    """Trend checks of one preset family; inconclusive checks do not fail it."""
    family: str
    shots: int = Field(..., ge=1)
    seed: int = Field(0, ge=0)
    checks: List[TrendCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.status != TrendStatus.failed for check in self.checks)
