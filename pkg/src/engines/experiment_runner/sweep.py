# hexinject - Parameter Sweeps
# Resumable CSV tables over the Cartesian product of a sweep grid

import csv
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from src.core.config import load_settings
from src.core.logging.logger import log_engine_failure, log_run_event, setup_logger
from src.schemas.models import CSV_COLUMNS, ExperimentResult, InjectionConfig, RunStatus, SweepGrid
from .runner import derive_seed, run

logger = setup_logger(__name__)

KEY_COLUMNS = ["code", "structure", "d1", "d2", "init", "eta", "p2"]


class SweepSummary(BaseModel):
    """What one sweep invocation did to its output table."""
    path: str
    completed: List[str] = Field(default_factory=list)
    no_acceptance: List[str] = Field(default_factory=list)
    skipped: List[str] = Field(default_factory=list)
    failed: List[str] = Field(default_factory=list)

    @property
    def rows_run(self) -> int:
        return len(self.completed) + len(self.no_acceptance)


def row_key(row: Dict[str, str]) -> str:
    """Row key of a CSV row; matches InjectionConfig.row_key."""
    return "|".join(row[column] for column in KEY_COLUMNS)


def read_table(path: Path) -> Dict[str, Dict[str, str]]:
    """Existing rows by key; an absent or empty file has none."""
    if not path.exists() or path.stat().st_size == 0:
        return {}
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"{path} has columns {reader.fieldnames}, expected {CSV_COLUMNS}")
        return {row_key(row): row for row in reader}


def write_table(path: Path, rows: Dict[str, Dict[str, str]]) -> None:
    """Rewrite the table with rows sorted by key."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for key in sorted(rows):
            writer.writerow(rows[key])


def _append_row(path: Path, row: Dict[str, str]) -> None:
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        if fresh:
            writer.writeheader()
        writer.writerow(row)


def row_config(config: InjectionConfig, master_seed: int) -> InjectionConfig:
    """The grid point with its seed derived from the master seed and row key."""
    return config.model_copy(update={"seed": derive_seed(master_seed, config.row_key())})


def _run_row(config: InjectionConfig, batch_size: Optional[int]) -> Optional[ExperimentResult]:
    try:
        # rows already run concurrently, so batches inside a row stay serial
        return run(config, batch_size=batch_size, workers=1)
    except Exception as e:
        log_engine_failure("experiment_runner", e, {"row_key": config.row_key(), "seed": config.seed})
        return None


def sweep(
    grid: SweepGrid,
    out_path: str,
    workers: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> SweepSummary:
    """
    Run every grid point missing from the output table.

    Finished rows are appended as they complete, so an interrupted sweep
    resumes where it stopped; the table is rewritten sorted by row key at
    the end. A failing row is logged and left out, the others still run.

    Args:
        grid: Sweep axes, shots and master seed
        out_path: CSV file to create or resume
        workers: Rows run concurrently; defaults to HEXINJECT_WORKERS
        batch_size: Shots per batch; defaults to HEXINJECT_BATCH_SIZE

    Returns:
        SweepSummary listing row keys per outcome
    """
    path = Path(out_path)
    existing = read_table(path)
    summary = SweepSummary(path=str(path))

    pending: List[InjectionConfig] = []
    for config in grid.expand():
        key = config.row_key()
        if key in existing:
            summary.skipped.append(key)
            log_run_event(logger, key, RunStatus.skipped.value, {"reason": "already in table"})
        else:
            pending.append(row_config(config, grid.seed))

    if existing:
        # start from a clean sorted copy before appending
        write_table(path, existing)

    logger.info(
        "Starting sweep",
        extra={"context": {"path": str(path), "rows": len(pending), "skipped": len(summary.skipped)}},
    )
    workers = workers or load_settings().workers
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(_run_row, config, batch_size): config for config in pending}
        for future in as_completed(futures):
            config = futures[future]
            result = future.result()
            if result is None:
                summary.failed.append(config.row_key())
                continue
            _append_row(path, result.csv_row())
            if result.status == RunStatus.no_acceptance:
                summary.no_acceptance.append(config.row_key())
            else:
                summary.completed.append(config.row_key())

    write_table(path, read_table(path))
    logger.info(
        "Sweep finished",
        extra={"context": {
            "path": str(path),
            "completed": len(summary.completed),
            "no_acceptance": len(summary.no_acceptance),
            "skipped": len(summary.skipped),
            "failed": len(summary.failed),
        }},
    )
    return summary
