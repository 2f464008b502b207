# Test Experiment Runner Engine
# Runs, estimates, sweeps and the invariant audit

import csv
import importlib
import json
import math

import pytest

from src.engines.experiment_runner import (
    SweepSummary,
    binomial_std_error,
    combine_rates,
    derive_seed,
    read_table,
    row_config,
    run,
    sweep,
    verify,
)
from src.engines.noise_model import DOUBLE, SINGLE, depolarizing_channel
from src.schemas.models import (
    CSV_COLUMNS,
    Basis,
    CodeType,
    InitMethod,
    InjectionConfig,
    NoiseParams,
    RunStatus,
    Structure,
    SweepGrid,
)

SMALL_BATCH = 128


def small_config(**overrides):
    values = dict(
        noise=NoiseParams(p_double=0.005),
        shots=300,
        seed=11,
    )
    values.update(overrides)
    return InjectionConfig(**values)


# Test estimates

def test_combine_rates():
    """Test E_total = 1 - (1 - E_X)(1 - E_Z)."""
    assert combine_rates(0.1, 0.2) == pytest.approx(0.28)
    assert combine_rates(0.0, 0.0) == 0.0
    assert combine_rates(0.1, None) == pytest.approx(0.1)
    assert combine_rates(None, None) is None


def test_binomial_std_error():
    """Test the standard error is sqrt(e(1-e)/n)."""
    assert binomial_std_error(0.1, 100) == pytest.approx(0.03)
    assert binomial_std_error(0.0, 50) == 0.0
    assert math.isnan(binomial_std_error(0.2, 0))


def test_derive_seed_is_stable_and_keyed():
    """Test derived seeds repeat per key and differ across keys and master seeds."""
    a = derive_seed(7, "surface|lattice|3|3|down-triangle|0.5|0.005")
    assert a == derive_seed(7, "surface|lattice|3|3|down-triangle|0.5|0.005")
    assert a != derive_seed(7, "surface|lattice|3|5|down-triangle|0.5|0.005")
    assert a != derive_seed(8, "surface|lattice|3|3|down-triangle|0.5|0.005")
    assert 0 <= a < 2**63


# Test single runs

@pytest.mark.parametrize("code", list(CodeType))
@pytest.mark.parametrize("structure", list(Structure))
def test_zero_noise_run(code, structure):
    """Test a noiseless run accepts every shot and never errs."""
    config = small_config(code=code, structure=structure, noise=NoiseParams(p_double=0.0), shots=200)
    result = run(config, batch_size=SMALL_BATCH)
    assert result.status == RunStatus.completed
    assert result.acceptance_rate == 1.0
    assert result.ex == 0.0
    assert result.ez == 0.0
    assert result.etotal == 0.0
    assert result.outcomes["z"].accepted == 200
    assert result.outcomes["x"].accepted == 200


def test_noisy_run_estimates():
    """Test estimates, standard errors and pooled acceptance agree with the counts."""
    result = run(small_config(noise=NoiseParams(p_double=0.01)), batch_size=SMALL_BATCH)
    z = result.outcomes["z"]
    x = result.outcomes["x"]
    assert 0 < z.accepted < 300
    assert result.ex == pytest.approx(z.logical_errors / z.accepted)
    assert result.ez == pytest.approx(x.logical_errors / x.accepted)
    assert result.ex_se == pytest.approx(math.sqrt(result.ex * (1 - result.ex) / z.accepted))
    assert result.etotal == pytest.approx(1 - (1 - result.ex) * (1 - result.ez))
    assert result.acceptance_rate == pytest.approx((z.accepted + x.accepted) / 600)
    assert result.dropped_mass < 0.01


def test_run_is_reproducible():
    """Test the same configuration and seed give identical counts."""
    config = small_config(structure=Structure.heavy_hex)
    first = run(config, batch_size=SMALL_BATCH)
    second = run(config, batch_size=SMALL_BATCH, workers=3)
    assert first.outcomes == second.outcomes
    assert first.csv_row() == second.csv_row()


def test_half_bias_matches_depolarizing_run():
    """Test eta = 0.5 equals a run on hand-built depolarizing tables."""
    noise = NoiseParams(p_double=0.008, eta=0.5)
    config = small_config(noise=noise)
    channels = {
        SINGLE: depolarizing_channel(noise.p_single, 1),
        DOUBLE: depolarizing_channel(noise.p_double, 2),
    }
    assert run(config, batch_size=SMALL_BATCH).outcomes == run(config, channels=channels, batch_size=SMALL_BATCH).outcomes


def test_single_basis_run():
    """Test a Z-only run reports E_X and leaves E_Z empty."""
    result = run(small_config(bases=(Basis.z,)), batch_size=SMALL_BATCH)
    assert set(result.outcomes) == {"z"}
    assert result.ez is None
    assert result.etotal == pytest.approx(result.ex)
    assert result.csv_row()["accepted_x"] == ""


def test_no_acceptance_is_reported():
    """Test certain readout flips reject every shot without raising."""
    config = small_config(noise=NoiseParams(p_double=0.0, p_single=0.0, p_readout=1.0), shots=50)
    result = run(config, batch_size=SMALL_BATCH)
    assert result.status == RunStatus.no_acceptance
    assert result.acceptance_rate == 0.0
    assert result.ex is None
    assert result.etotal is None
    row = result.csv_row()
    assert row["ex"] == "nan"
    assert row["etotal"] == "nan"
    assert row["accepted_z"] == "0"


def test_run_dumps_events(tmp_path):
    """Test --dump-events writes one packed file and sidecar per basis."""
    target = tmp_path / "events.bin"
    run(small_config(shots=40), batch_size=SMALL_BATCH, dump_events=str(target))
    for basis in ("z", "x"):
        packed = tmp_path / f"events.{basis}.bin"
        sidecar = json.loads((tmp_path / f"events.{basis}.bin.json").read_text())
        assert sidecar["shots"] == 40
        assert sidecar["observable_basis"] == basis
        assert packed.stat().st_size == 40 * sidecar["bytes_per_shot"]


# Test sweeps

def small_grid(**overrides):
    values = dict(
        codes=[CodeType.surface],
        structures=[Structure.lattice],
        methods=[InitMethod.down_triangle],
        etas=[0.5],
        p2s=[0.005],
        d2s=[3],
        shots=100,
        seed=5,
    )
    values.update(overrides)
    return SweepGrid(**values)


def test_default_grid_size():
    """Test the default grid has 3 x 2 x 4 x 5 x 5 x 4 rows."""
    configs = SweepGrid().expand()
    assert len(configs) == 2400
    assert len({config.row_key() for config in configs}) == 2400


def test_one_point_sweep_equals_run(tmp_path):
    """Test a single-row sweep writes the row a direct run produces."""
    grid = small_grid()
    out = tmp_path / "results.csv"
    summary = sweep(grid, str(out), batch_size=SMALL_BATCH)
    assert isinstance(summary, SweepSummary)
    assert summary.rows_run == 1

    config = row_config(grid.expand()[0], grid.seed)
    expected = run(config, batch_size=SMALL_BATCH).csv_row()
    rows = list(read_table(out).values())
    assert rows == [expected]
    assert rows[0]["seed"] == str(derive_seed(grid.seed, config.row_key()))


def test_sweep_header_and_order(tmp_path):
    """Test the exact column list and rows sorted by key."""
    out = tmp_path / "results.csv"
    sweep(small_grid(p2s=[0.005, 0.001], etas=[0.5, 10.0], shots=50), str(out), workers=2, batch_size=SMALL_BATCH)
    with out.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = list(reader)
    assert header == CSV_COLUMNS
    assert len(rows) == 4
    keys = ["|".join(row[:7]) for row in rows]
    assert keys == sorted(keys)


def test_sweep_resume_is_noop(tmp_path):
    """Test re-running a finished sweep skips every row and keeps the file."""
    grid = small_grid(p2s=[0.005, 0.002], shots=60)
    out = tmp_path / "results.csv"
    sweep(grid, str(out), batch_size=SMALL_BATCH)
    before = out.read_text()
    summary = sweep(grid, str(out), batch_size=SMALL_BATCH)
    assert summary.rows_run == 0
    assert len(summary.skipped) == 2
    assert out.read_text() == before


def test_sweep_isolates_failures(tmp_path, monkeypatch):
    """Test a failing row is logged and skipped while the others are written."""
    # the package re-exports the sweep function under the submodule name
    sweep_module = importlib.import_module("src.engines.experiment_runner.sweep")

    real_run = sweep_module.run

    def flaky_run(config, **kwargs):
        if config.noise.p_double == 0.002:
            raise ValueError("boom")
        return real_run(config, **kwargs)

    monkeypatch.setattr(sweep_module, "run", flaky_run)
    out = tmp_path / "results.csv"
    summary = sweep(small_grid(p2s=[0.005, 0.002], shots=60), str(out), batch_size=SMALL_BATCH)
    assert len(summary.failed) == 1
    assert summary.failed[0].endswith("|0.002")
    assert len(read_table(out)) == 1


def test_sweep_rejects_foreign_table(tmp_path):
    """Test a CSV with other columns is not resumed."""
    out = tmp_path / "results.csv"
    out.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="expected"):
        sweep(small_grid(), str(out))


def test_sweep_grid_rejections():
    """Test empty axes and bad distances are rejected."""
    with pytest.raises(ValueError, match="must not be empty"):
        small_grid(codes=[])
    with pytest.raises(ValueError, match="odd integer"):
        small_grid(d2s=[4])
    with pytest.raises(ValueError, match="d2 values"):
        small_grid(d1=5, d2s=[3])


# Test the invariant audit

def test_verify_default_config_passes():
    """Test every audit check passes on the default d=3 configuration."""
    report = verify(InjectionConfig(shots=100))
    failed = [(check.name, check.detail) for check in report.checks if not check.passed]
    assert failed == []
    names = {check.name for check in report.checks}
    for expected in (
        "channel_normalization",
        "blind_qubit_count",
        "blind_qubit_pairing",
        "lattice_symmetry",
        "flag_symmetry",
        "noiseless_determinism",
        "decoder_oracle",
        "single_fault_correction",
        "dropped_mass",
    ):
        assert expected in names


def test_verify_catches_broken_flag_mirror():
    """Test the unmirrored heavy-hex schedule fails the flag-symmetry audit."""
    config = InjectionConfig(structure=Structure.heavy_hex, shots=100)
    report = verify(config, mirror_flags=False)
    assert not report.passed
    flag = next(check for check in report.checks if check.name == "flag_symmetry")
    assert not flag.passed
