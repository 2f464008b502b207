# Test Trend Checks
# 3-sigma comparisons, preset families and the trend command

import importlib
import json

import pytest

from src.cli.main import EXIT_INVARIANT, EXIT_OK, main
from src.engines.experiment_runner import (
    FAMILIES,
    agree,
    best_combination,
    combine,
    combine_rates,
    evaluate,
    family_grids,
    less_than,
    not_greater,
    read_table,
    row_estimate,
    trends,
)
from src.engines.experiment_runner.trends import Estimate
from src.schemas.models import ExperimentResult, InitMethod, Structure, TrendStatus

SE = 0.0005


def fake_run(rate_of):
    """A stand-in for run() whose E_X and E_Z both equal rate_of(config)."""
    def _run(config, **kwargs):
        rate = rate_of(config)
        return ExperimentResult(
            config=config, ex=rate, ex_se=SE, ez=rate, ez_se=SE,
            etotal=combine_rates(rate, rate), acceptance_rate=0.5,
        )
    return _run


def patch_run(monkeypatch, rate_of):
    # the package re-exports the sweep function under the submodule name
    sweep_module = importlib.import_module("src.engines.experiment_runner.sweep")
    monkeypatch.setattr(sweep_module, "run", fake_run(rate_of))


def right_blind_higher(config):
    if config.structure == Structure.heavy_hex and config.init_method in (
        InitMethod.down_triangle, InitMethod.right_square,
    ):
        return 0.02
    return 0.01


# Test comparisons

def test_less_than():
    """Test a gap beyond 3 sigma decides, anything inside is inconclusive."""
    low, high = Estimate(0.010, 0.001), Estimate(0.020, 0.001)
    assert less_than(low, high) == TrendStatus.passed
    assert less_than(high, low) == TrendStatus.failed
    assert less_than(low, Estimate(0.012, 0.001)) == TrendStatus.inconclusive
    assert less_than(low, Estimate(None, None)) == TrendStatus.inconclusive


def test_not_greater_is_one_sided():
    """Test only a significant rise fails."""
    base = Estimate(0.010, 0.001)
    assert not_greater(Estimate(0.002, 0.001), base) == TrendStatus.passed
    assert not_greater(Estimate(0.012, 0.001), base) == TrendStatus.passed
    assert not_greater(Estimate(0.020, 0.001), base) == TrendStatus.failed


def test_agree():
    """Test every pair must sit within 3 sigma."""
    close = [Estimate(0.010, 0.001), Estimate(0.012, 0.001), Estimate(0.009, 0.001)]
    assert agree(close) == TrendStatus.passed
    assert agree(close + [Estimate(0.030, 0.001)]) == TrendStatus.failed
    assert agree(close[:1]) == TrendStatus.inconclusive


def test_combine():
    """Test one failure fails and any undecided part keeps the whole undecided."""
    assert combine([TrendStatus.passed, TrendStatus.passed]) == TrendStatus.passed
    assert combine([TrendStatus.passed, TrendStatus.inconclusive]) == TrendStatus.inconclusive
    assert combine([TrendStatus.inconclusive, TrendStatus.failed]) == TrendStatus.failed
    assert combine([]) == TrendStatus.inconclusive


def test_best_combination():
    """Test a clear lead passes, a narrow one is inconclusive and a clear deficit fails."""
    expected = "zxxz/down-triangle"
    clear = {expected: Estimate(0.010, 0.001), "xzzx/right-triangle": Estimate(0.020, 0.001)}
    status, detail = best_combination(clear, expected)
    assert status == TrendStatus.passed
    assert "leads xzzx/right-triangle" in detail

    narrow = {expected: Estimate(0.010, 0.001), "xzzx/right-triangle": Estimate(0.011, 0.001)}
    assert best_combination(narrow, expected)[0] == TrendStatus.inconclusive

    beaten = {expected: Estimate(0.020, 0.001), "xzzx/right-triangle": Estimate(0.010, 0.001)}
    status, detail = best_combination(beaten, expected)
    assert status == TrendStatus.failed
    assert detail.startswith("xzzx/right-triangle beats")


def test_row_estimate_propagates_total_error():
    """Test E_total carries the first-order error of both bases, and nan reads as missing."""
    row = {"ex": "0.1", "ex_se": "0.01", "ez": "0.2", "ez_se": "0.02", "etotal": "0.28"}
    total = row_estimate(row, "etotal")
    assert total.value == pytest.approx(0.28)
    assert total.std_error == pytest.approx(((0.8 * 0.01) ** 2 + (0.9 * 0.02) ** 2) ** 0.5)
    assert row_estimate(row, "ex") == Estimate(0.1, 0.01)
    assert not row_estimate(dict(row, ez="nan", ez_se="nan"), "ez").known
    assert not row_estimate(None, "etotal").known


# Test families

@pytest.mark.parametrize("family, rows", [
    ("initialization", 8),
    ("bias", 12),
    ("extension", 6),
    ("best", 12),
])
def test_family_row_counts(family, rows):
    """Test each preset family expands to its grid of distinct rows."""
    keys = {config.row_key() for grid in family_grids(family, shots=10) for config in grid.expand()}
    assert len(keys) == rows


def test_unknown_family():
    """Test an unknown family name is rejected."""
    with pytest.raises(ValueError, match="Unknown trend family"):
        family_grids("latency")
    with pytest.raises(ValueError, match="Unknown trend family"):
        evaluate("latency", {})


def test_missing_rows_are_inconclusive():
    """Test a family evaluated over an empty table decides nothing."""
    for family in FAMILIES:
        report = evaluate(family, {})
        assert report.checks
        assert all(check.status == TrendStatus.inconclusive for check in report.checks)
        assert report.passed


def test_initialization_trends(tmp_path, monkeypatch):
    """Test the initialization family on rates with a higher right-blind cluster."""
    patch_run(monkeypatch, right_blind_higher)
    out = tmp_path / "initialization.csv"
    report = trends("initialization", str(out), shots=10, workers=2)
    statuses = {check.name: check.status for check in report.checks}
    assert statuses == {
        "lattice_methods_agree": TrendStatus.passed,
        "heavy_hex_right_blind_cluster_higher": TrendStatus.passed,
    }
    assert report.passed
    assert len(read_table(out)) == 8


def test_initialization_trends_fail_on_lattice_spread(tmp_path, monkeypatch):
    """Test lattice methods that differ beyond 3 sigma fail the family."""
    patch_run(monkeypatch, lambda config: 0.03 if config.init_method == InitMethod.down_square else 0.01)
    report = trends("initialization", str(tmp_path / "initialization.csv"), shots=10, workers=2)
    statuses = {check.name: check.status for check in report.checks}
    assert statuses["lattice_methods_agree"] == TrendStatus.failed
    assert statuses["heavy_hex_right_blind_cluster_higher"] == TrendStatus.failed
    assert not report.passed


def test_bias_trends(tmp_path, monkeypatch):
    """Test the bias family on rates that fall with eta, ZXXZ lowest."""
    code_offset = {"zxxz": 0.0, "xzzx": 0.004, "surface": 0.008}

    def rate_of(config):
        return 0.01 + code_offset[config.code.value] + 0.01 / config.noise.eta

    patch_run(monkeypatch, rate_of)
    report = trends("bias", str(tmp_path / "bias.csv"), shots=10, workers=2)
    statuses = {check.name: check.status for check in report.checks}
    for code in ("surface", "xzzx", "zxxz"):
        assert statuses[f"heavy_hex_{code}_non_increasing_in_eta"] == TrendStatus.passed
    assert statuses["heavy_hex_zxxz_below_xzzx"] == TrendStatus.passed
    assert statuses["lattice_surface_ex_decreases"] == TrendStatus.passed
    # equal basis rates cannot show E_Z rising with eta
    assert statuses["lattice_surface_ez_increases"] == TrendStatus.failed


def test_best_trends_inconclusive_on_ties(tmp_path, monkeypatch):
    """Test equal rates leave the best combination undecided, not failed."""
    patch_run(monkeypatch, lambda config: 0.01)
    report = trends("best", str(tmp_path / "best.csv"), shots=10, workers=2)
    assert [check.status for check in report.checks] == [TrendStatus.inconclusive]
    assert len(report.checks[0].estimates) == 12
    assert report.passed


# Test trend command

def test_trend_command(capsys, tmp_path, monkeypatch):
    """Test the trend subcommand prints the report and exits by its outcome."""
    patch_run(monkeypatch, right_blind_higher)
    code = main(["trend", "initialization", "--shots", "10", "--out", str(tmp_path / "ok.csv")])
    report = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK
    assert report["family"] == "initialization"
    assert report["passed"] is True

    patch_run(monkeypatch, lambda config: 0.03 if config.init_method == InitMethod.down_square else 0.01)
    code = main(["trend", "initialization", "--shots", "10", "--out", str(tmp_path / "bad.csv")])
    assert code == EXIT_INVARIANT
    assert json.loads(capsys.readouterr().out)["passed"] is False


def test_initialization_trends_run_end_to_end(tmp_path):
    """Test the initialization family on real low-shot runs reports every check."""
    report = trends("initialization", str(tmp_path / "real.csv"), shots=64, batch_size=64)
    assert [check.name for check in report.checks] == [
        "lattice_methods_agree", "heavy_hex_right_blind_cluster_higher",
    ]
    assert all(len(check.estimates) == 4 for check in report.checks)
