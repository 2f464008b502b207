# hexinject - Trend Checks
# Preset sweep families whose estimates are compared at a 3-sigma margin

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.core.logging.logger import setup_logger
from src.schemas.models import (
    BiasValue,
    CodeType,
    InitMethod,
    InjectionConfig,
    NoiseParams,
    Structure,
    SweepGrid,
    TrendCheck,
    TrendReport,
    TrendStatus,
)
from .sweep import read_table, sweep

logger = setup_logger(__name__)

SIGMA = 3.0
TREND_SHOTS = 100_000
TREND_P2 = 0.005
LOW_P2 = 0.001
BIASES: Tuple[float, ...] = (0.5, 10.0, 100.0)
EXTENSION_D2S: Tuple[int, ...] = (3, 5, 9)
BEST_D2 = 9

# Blind qubit right of the magic qubit, and below it
RIGHT_BLIND = (InitMethod.down_triangle, InitMethod.right_square)
BELOW_BLIND = (InitMethod.right_triangle, InitMethod.down_square)

# XZZX with a Right method mirrors ZXXZ with the matching Down method
MATCHED_METHOD = {
    CodeType.surface: InitMethod.down_triangle,
    CodeType.xzzx: InitMethod.right_triangle,
    CodeType.zxxz: InitMethod.down_triangle,
}


@dataclass(frozen=True)
class Estimate:
    value: Optional[float]
    std_error: Optional[float]

    @property
    def known(self) -> bool:
        return self.value is not None and self.std_error is not None


def _number(text: Optional[str]) -> Optional[float]:
    if not text:
        return None
    value = float(text)
    return None if math.isnan(value) else value


def row_estimate(row: Optional[Dict[str, str]], metric: str) -> Estimate:
    """
    Estimate of ex, ez or etotal from a sweep table row.

    The E_total error is propagated from the two basis errors to first order.
    """
    if row is None:
        return Estimate(None, None)
    if metric != "etotal":
        return Estimate(_number(row[metric]), _number(row[f"{metric}_se"]))
    total = _number(row["etotal"])
    if total is None:
        return Estimate(None, None)
    ex, ez = _number(row["ex"]) or 0.0, _number(row["ez"]) or 0.0
    se = math.hypot((1.0 - ez) * (_number(row["ex_se"]) or 0.0), (1.0 - ex) * (_number(row["ez_se"]) or 0.0))
    return Estimate(total, se)


def _gap(a: Estimate, b: Estimate) -> Tuple[float, float]:
    return a.value - b.value, math.hypot(a.std_error, b.std_error)


def less_than(a: Estimate, b: Estimate, sigma: float = SIGMA) -> TrendStatus:
    """a below b by more than sigma standard errors passes; the reverse fails."""
    if not (a.known and b.known):
        return TrendStatus.inconclusive
    diff, se = _gap(a, b)
    if diff < -sigma * se:
        return TrendStatus.passed
    if diff > sigma * se:
        return TrendStatus.failed
    return TrendStatus.inconclusive


def not_greater(a: Estimate, b: Estimate, sigma: float = SIGMA) -> TrendStatus:
    """One-sided: only a rise of a over b beyond sigma standard errors fails."""
    if not (a.known and b.known):
        return TrendStatus.inconclusive
    diff, se = _gap(a, b)
    return TrendStatus.failed if diff > sigma * se else TrendStatus.passed


def agree(estimates: Sequence[Estimate], sigma: float = SIGMA) -> TrendStatus:
    """Every pair within sigma standard errors of each other."""
    if len(estimates) < 2 or not all(e.known for e in estimates):
        return TrendStatus.inconclusive
    for i, a in enumerate(estimates):
        for b in estimates[i + 1:]:
            diff, se = _gap(a, b)
            if abs(diff) > sigma * se:
                return TrendStatus.failed
    return TrendStatus.passed


def combine(statuses: Sequence[TrendStatus]) -> TrendStatus:
    if any(s == TrendStatus.failed for s in statuses):
        return TrendStatus.failed
    if statuses and all(s == TrendStatus.passed for s in statuses):
        return TrendStatus.passed
    return TrendStatus.inconclusive


def best_combination(
    estimates: Dict[str, Estimate],
    expected: str,
    sigma: float = SIGMA,
) -> Tuple[TrendStatus, str]:
    """
    Whether `expected` has the lowest estimate by a sigma margin.

    Returns the status and a detail line with the measured gap; a lead
    inside the margin, or a deficit inside it, is inconclusive.
    """
    known = {label: e for label, e in estimates.items() if e.known}
    if expected not in known or len(known) < 2:
        return TrendStatus.inconclusive, f"missing estimates for {sorted(set(estimates) - set(known))}"
    ranked = sorted(known, key=lambda label: known[label].value)
    best, runner_up = ranked[0], ranked[1]
    if best == expected:
        diff, se = _gap(known[runner_up], known[expected])
        status = TrendStatus.passed if diff > sigma * se else TrendStatus.inconclusive
        return status, f"{expected} leads {runner_up} by {diff:.3e} (se {se:.3e})"
    diff, se = _gap(known[expected], known[best])
    status = TrendStatus.failed if diff > sigma * se else TrendStatus.inconclusive
    return status, f"{best} beats {expected} by {diff:.3e} (se {se:.3e})"


class _Table:
    """Sweep-table rows looked up by configuration."""

    def __init__(self, rows: Dict[str, Dict[str, str]]):
        self.rows = rows

    def get(
        self,
        metric: str,
        code: CodeType,
        structure: Structure,
        method: InitMethod,
        eta: BiasValue = 0.5,
        p2: float = TREND_P2,
        d2: int = 3,
    ) -> Estimate:
        key = InjectionConfig(
            code=code, structure=structure, d1=3, d2=d2, init_method=method,
            noise=NoiseParams(p_double=p2, eta=eta),
        ).row_key()
        return row_estimate(self.rows.get(key), metric)


def _grid(shots: int, seed: int, **axes) -> SweepGrid:
    return SweepGrid(d1=3, shots=shots, seed=seed, **axes)


def _check(name: str, status: TrendStatus, detail: str, estimates: Dict[str, Estimate]) -> TrendCheck:
    return TrendCheck(
        name=name,
        status=status,
        detail=detail,
        estimates={label: e.value for label, e in estimates.items()},
    )


# Initialization: surface code, both structures, four methods

def _initialization_grids(shots: int, seed: int) -> List[SweepGrid]:
    return [_grid(
        shots, seed, codes=[CodeType.surface], structures=list(Structure), methods=list(InitMethod),
        etas=[0.5], p2s=[TREND_P2], d2s=[3],
    )]


def _initialization_checks(table: _Table) -> List[TrendCheck]:
    lattice = {m.value: table.get("etotal", CodeType.surface, Structure.lattice, m) for m in InitMethod}
    heavy = {m.value: table.get("etotal", CodeType.surface, Structure.heavy_hex, m) for m in InitMethod}
    split = combine([
        less_than(heavy[below.value], heavy[right.value]) for right in RIGHT_BLIND for below in BELOW_BLIND
    ])
    return [
        _check("lattice_methods_agree", agree(list(lattice.values())),
               "all four methods within 3 sigma on the lattice", lattice),
        _check("heavy_hex_right_blind_cluster_higher", split,
               "down-triangle and right-square above right-triangle and down-square", heavy),
    ]


# Bias: eta sweep per code with symmetry-matched methods

def _bias_grids(shots: int, seed: int) -> List[SweepGrid]:
    grids = [
        _grid(shots, seed, codes=[code], structures=[Structure.heavy_hex], methods=[method],
              etas=list(BIASES), p2s=[TREND_P2], d2s=[3])
        for code, method in MATCHED_METHOD.items()
    ]
    grids.append(_grid(
        shots, seed, codes=[CodeType.surface], structures=[Structure.lattice],
        methods=[MATCHED_METHOD[CodeType.surface]], etas=list(BIASES), p2s=[TREND_P2], d2s=[3],
    ))
    return grids


def _bias_checks(table: _Table) -> List[TrendCheck]:
    checks: List[TrendCheck] = []
    for code, method in MATCHED_METHOD.items():
        estimates: Dict[str, Estimate] = {}
        statuses = []
        for metric in ("etotal", "ex", "ez"):
            series = [table.get(metric, code, Structure.heavy_hex, method, eta=eta) for eta in BIASES]
            estimates.update({f"{metric}@{eta}": e for eta, e in zip(BIASES, series)})
            statuses += [not_greater(later, earlier) for earlier, later in zip(series, series[1:])]
        checks.append(_check(f"heavy_hex_{code.value}_non_increasing_in_eta", combine(statuses),
                             "E_total, E_X and E_Z never rise by more than 3 sigma", estimates))

    surface = MATCHED_METHOD[CodeType.surface]
    low, high = BIASES[0], BIASES[-1]
    ex = {f"ex@{eta}": table.get("ex", CodeType.surface, Structure.lattice, surface, eta=eta) for eta in (low, high)}
    ez = {f"ez@{eta}": table.get("ez", CodeType.surface, Structure.lattice, surface, eta=eta) for eta in (low, high)}
    checks.append(_check("lattice_surface_ex_decreases", less_than(ex[f"ex@{high}"], ex[f"ex@{low}"]),
                         f"E_X at eta={high} below eta={low}", ex))
    checks.append(_check("lattice_surface_ez_increases", less_than(ez[f"ez@{low}"], ez[f"ez@{high}"]),
                         f"E_Z at eta={low} below eta={high}", ez))

    pair = {
        "zxxz": table.get("etotal", CodeType.zxxz, Structure.heavy_hex, MATCHED_METHOD[CodeType.zxxz], eta=high),
        "xzzx": table.get("etotal", CodeType.xzzx, Structure.heavy_hex, MATCHED_METHOD[CodeType.xzzx], eta=high),
    }
    checks.append(_check("heavy_hex_zxxz_below_xzzx", less_than(pair["zxxz"], pair["xzzx"]),
                         f"symmetry-matched E_total at eta={high}", pair))
    return checks


# Extension: ZXXZ down-triangle over d2 at low noise

def _extension_grids(shots: int, seed: int) -> List[SweepGrid]:
    return [_grid(
        shots, seed, codes=[CodeType.zxxz], structures=list(Structure), methods=[InitMethod.down_triangle],
        etas=[0.5], p2s=[LOW_P2], d2s=list(EXTENSION_D2S),
    )]


def _extension_checks(table: _Table) -> List[TrendCheck]:
    def series(structure: Structure) -> Dict[str, Estimate]:
        return {
            f"d2={d2}": table.get("etotal", CodeType.zxxz, structure, InitMethod.down_triangle, p2=LOW_P2, d2=d2)
            for d2 in EXTENSION_D2S
        }

    heavy = series(Structure.heavy_hex)
    lattice = series(Structure.lattice)
    values = list(lattice.values())
    return [
        _check("heavy_hex_distance_agree", agree(list(heavy.values())),
               f"E_total within 3 sigma across d2 at p2={LOW_P2}", heavy),
        _check("lattice_distance_not_worse",
               combine([not_greater(later, earlier) for earlier, later in zip(values, values[1:])]),
               f"larger d2 never raises E_total by more than 3 sigma at p2={LOW_P2}", lattice),
    ]


# Best combination: heavy-hex, every code and method, high bias, d2 = 9

def _best_grids(shots: int, seed: int) -> List[SweepGrid]:
    return [_grid(
        shots, seed, codes=list(CodeType), structures=[Structure.heavy_hex], methods=list(InitMethod),
        etas=[BIASES[-1]], p2s=[TREND_P2], d2s=[BEST_D2],
    )]


def _best_checks(table: _Table) -> List[TrendCheck]:
    estimates = {
        f"{code.value}/{method.value}": table.get(
            "etotal", code, Structure.heavy_hex, method, eta=BIASES[-1], d2=BEST_D2,
        )
        for code in CodeType for method in InitMethod
    }
    status, detail = best_combination(estimates, f"{CodeType.zxxz.value}/{InitMethod.down_triangle.value}")
    return [_check("heavy_hex_best_combination", status, detail, estimates)]


FAMILIES: Dict[str, Tuple[Callable[[int, int], List[SweepGrid]], Callable[[_Table], List[TrendCheck]]]] = {
    "initialization": (_initialization_grids, _initialization_checks),
    "bias": (_bias_grids, _bias_checks),
    "extension": (_extension_grids, _extension_checks),
    "best": (_best_grids, _best_checks),
}


def family_grids(family: str, shots: int = TREND_SHOTS, seed: int = 0) -> List[SweepGrid]:
    if family not in FAMILIES:
        raise ValueError(f"Unknown trend family {family!r}, expected one of {sorted(FAMILIES)}")
    return FAMILIES[family][0](shots, seed)


def evaluate(family: str, rows: Dict[str, Dict[str, str]], shots: int = TREND_SHOTS, seed: int = 0) -> TrendReport:
    """Trend checks of a family over sweep-table rows; missing rows make checks inconclusive."""
    if family not in FAMILIES:
        raise ValueError(f"Unknown trend family {family!r}, expected one of {sorted(FAMILIES)}")
    checks = FAMILIES[family][1](_Table(rows))
    return TrendReport(family=family, shots=shots, seed=seed, checks=checks)


def trends(
    family: str,
    out_path: str,
    shots: int = TREND_SHOTS,
    seed: int = 0,
    workers: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> TrendReport:
    """
    Run the rows of one trend family into a sweep table, then check its claims.

    The table is resumable like any sweep, so a long family can be run in
    pieces and re-evaluated at the end.

    Args:
        family: initialization, bias, extension or best
        out_path: CSV table to create or resume
        shots: Shots per basis of every row
        seed: Master seed
        workers: Rows run concurrently
        batch_size: Shots per batch

    Returns:
        TrendReport; a check that could not be decided is inconclusive
    """
    grids = family_grids(family, shots, seed)
    for grid in grids:
        sweep(grid, out_path, workers=workers, batch_size=batch_size)
    report = evaluate(family, read_table(Path(out_path)), shots=shots, seed=seed)
    logger.info(
        "Trend checks finished",
        extra={"context": {
            "family": family,
            "path": out_path,
            "passed": sum(c.status == TrendStatus.passed for c in report.checks),
            "failed": sum(c.status == TrendStatus.failed for c in report.checks),
            "inconclusive": sum(c.status == TrendStatus.inconclusive for c in report.checks),
        }},
    )
    return report
