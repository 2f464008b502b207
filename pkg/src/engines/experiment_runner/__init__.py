# hexinject - Experiment Runner Package
# Single runs, resumable sweeps, trend checks and the invariant audit

from .runner import binomial_std_error, combine_rates, compile_noisy, derive_seed, run, run_basis
from .sweep import KEY_COLUMNS, SweepSummary, read_table, row_config, row_key, sweep, write_table
from .audit import verify
from .trends import FAMILIES, SIGMA, TREND_SHOTS, agree, best_combination, combine, evaluate, family_grids, less_than, not_greater, row_estimate, trends

__all__ = [
    "binomial_std_error",
    "combine_rates",
    "compile_noisy",
    "derive_seed",
    "run",
    "run_basis",
    "KEY_COLUMNS",
    "SweepSummary",
    "read_table",
    "row_config",
    "row_key",
    "sweep",
    "write_table",
    "verify",
    "FAMILIES",
    "SIGMA",
    "TREND_SHOTS",
    "agree",
    "best_combination",
    "combine",
    "evaluate",
    "family_grids",
    "less_than",
    "not_greater",
    "row_estimate",
    "trends",
]
