# Test Pauli Frame Simulator
# Sampling, fault propagation, blind qubits, flag audits and the tableau oracle

import json
import random
from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from src.engines.circuit_builder import assign_regions, compile_config, round_circuit
from src.engines.code_layout import anticommutes, build_layout
from src.engines.noise_model import attach_noise
from src.engines.pauli_sim import (
    batch_plan,
    blind_faults,
    data_effect_type,
    find_blind_qubits,
    flag_symmetry_violations,
    propagate_fault,
    propagate_faults,
    sample,
    sample_batch,
    write_event_dump,
)
from src.schemas.circuit import (
    Circuit,
    DetectorClass,
    DetectorInfo,
    InitBasis,
    Instruction,
    InstructionKind,
)
from src.schemas.layout import Coord, QubitRole
from src.schemas.models import Basis, CodeType, InitMethod, InjectionConfig, NoiseParams, Structure
from tests.tableau_reference import run_shot

K = InstructionKind

ALL_COMBOS = [
    (code, structure, method)
    for code in CodeType
    for structure in Structure
    for method in InitMethod
]


def make_config(code, structure, method, p2=0.0, eta=0.5, d2=3):
    noise = NoiseParams(p_double=p2, p_single=p2 / 20, p_readout=p2, eta=eta)
    return InjectionConfig(code=code, structure=structure, d1=3, d2=d2, init_method=method, noise=noise)


def small_circuit(instructions, qubits, detectors=()):
    """Wrap hand-written instructions; detectors is a list of record tuples."""
    body = list(instructions)
    infos = []
    for records in detectors:
        infos.append(DetectorInfo(
            index=len(infos), stage=2, detector_class=DetectorClass.stabilizer_compare, round=1,
        ))
        body.append(Instruction(
            kind=K.detector, records=tuple(records), stage=2,
            detector_class=DetectorClass.stabilizer_compare, round=1,
        ))
    measurements = sum(1 for inst in body if inst.kind == K.measure)
    return Circuit(
        instructions=tuple(body),
        qubit_count=qubits,
        measurement_count=measurements,
        qubit_coords=tuple(Coord(0, 2 * i) for i in range(qubits)),
        qubit_roles=tuple(QubitRole.data for _ in range(qubits)),
        detectors=tuple(infos),
    )


# Test frame propagation rules

def test_cnot_spreads_x_from_control():
    """Test an X on a CNOT control ends up on both qubits."""
    circuit = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.reset, qubits=(1,)),
        Instruction(kind=K.cnot, qubits=(0, 1)),
    ], qubits=2)
    effect = propagate_fault(circuit, 0, "X", until=2)
    assert effect.residual == {0: "X", 1: "X"}


def test_cnot_spreads_z_from_target():
    """Test a Z on a CNOT target moves back onto the control."""
    circuit = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.reset, qubits=(1,)),
        Instruction(kind=K.cnot, qubits=(0, 1)),
    ], qubits=2)
    effect = propagate_fault(circuit, 1, "Z", until=2)
    assert effect.residual == {0: "Z", 1: "Z"}


def test_cz_and_hadamard_rules():
    """Test CZ adds Z to the partner of an X and Hadamard swaps X and Z."""
    circuit = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.reset, qubits=(1,)),
        Instruction(kind=K.cz, qubits=(0, 1)),
        Instruction(kind=K.hadamard, qubits=(1,)),
    ], qubits=2)
    after_cz = propagate_fault(circuit, 0, "X", until=2)
    assert after_cz.residual == {0: "X", 1: "Z"}
    after_h = propagate_fault(circuit, 0, "X", until=3)
    assert after_h.residual == {0: "X", 1: "X"}


def test_identity_fault_is_silent():
    """Test the identity Pauli fires nothing and flips nothing."""
    circuit = compile_config(make_config(CodeType.surface, Structure.lattice, InitMethod.down_triangle), Basis.z,
                             noisy=False)
    effect = propagate_fault(circuit, 0, "I")
    assert effect.detectors == frozenset()
    assert effect.observable_flip is False


def test_measurement_fault_flips_record():
    """Test an X right before a measurement fires the detector on that record."""
    circuit = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.measure, qubits=(0,), record=0),
    ], qubits=1, detectors=[(0,)])
    assert propagate_fault(circuit, 1, "X").detectors == frozenset({0})
    assert propagate_fault(circuit, 1, "Z").detectors == frozenset()


def test_propagate_fault_rejections():
    """Test bad locations and Paulis raise ValueError."""
    circuit = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.measure, qubits=(0,), record=0),
    ], qubits=1, detectors=[(0,)])

    with pytest.raises(ValueError, match="out of range"):
        propagate_fault(circuit, 7, "X")
    with pytest.raises(ValueError, match="annotation"):
        propagate_fault(circuit, 2, "X")
    with pytest.raises(ValueError, match="factors"):
        propagate_fault(circuit, 0, "XX")
    with pytest.raises(ValueError, match="Invalid Pauli"):
        propagate_fault(circuit, 0, "Q")


def test_propagate_faults_matches_single_calls():
    """Test batched propagation returns the same effects as one-by-one calls."""
    circuit = compile_config(make_config(CodeType.xzzx, Structure.heavy_hex, InitMethod.right_square), Basis.x,
                             noisy=False)
    faults = [(i, "X" * len(inst.qubits)) for i, inst in enumerate(circuit.instructions)
              if inst.kind in (K.reset, K.hadamard, K.cnot, K.cz)][:40]
    batched = propagate_faults(circuit, faults)
    for fault, effect in zip(faults, batched):
        single = propagate_fault(circuit, *fault)
        assert single.detectors == effect.detectors
        assert single.observable_flip == effect.observable_flip


# Test sampling

def test_batch_plan_covers_shots():
    """Test the batch plan splits shots into fixed-size batches."""
    assert batch_plan(10, 4) == [(0, 4), (1, 4), (2, 2)]
    assert batch_plan(64, 64) == [(0, 64)]
    with pytest.raises(ValueError):
        batch_plan(0, 64)


@pytest.mark.parametrize("code,structure,method", ALL_COMBOS)
def test_zero_noise_samples_are_clean(code, structure, method):
    """Test a zero-rate noisy circuit never fires a detector or flips the observable."""
    config = make_config(code, structure, method)
    for basis in (Basis.z, Basis.x):
        circuit = compile_config(config, basis)
        assert circuit.noisy
        for batch in sample(circuit, 200, seed=3, batch_size=128):
            assert not batch.detectors.any()
            assert not batch.observables.any()


def test_sampling_is_deterministic():
    """Test equal seeds and batch plans give bit-identical batches."""
    circuit = compile_config(
        make_config(CodeType.zxxz, Structure.heavy_hex, InitMethod.down_triangle, p2=0.01, eta=10.0), Basis.z,
    )
    first = list(sample(circuit, 300, seed=11, batch_size=128))
    second = list(sample(circuit, 300, seed=11, batch_size=128))
    other = list(sample(circuit, 300, seed=12, batch_size=128))

    assert [b.shots for b in first] == [128, 128, 44]
    for a, b in zip(first, second):
        assert np.array_equal(a.detectors, b.detectors)
        assert np.array_equal(a.observables, b.observables)
    assert any(not np.array_equal(a.detectors, c.detectors) for a, c in zip(first, other))


def test_batch_is_independent_of_plan_position():
    """Test a batch depends only on (seed, batch index, shots)."""
    circuit = compile_config(
        make_config(CodeType.surface, Structure.lattice, InitMethod.right_triangle, p2=0.02), Basis.x,
    )
    streamed = list(sample(circuit, 256, seed=5, batch_size=128))
    direct = sample_batch(circuit, 128, seed=5, batch_index=1)
    assert np.array_equal(streamed[1].detectors, direct.detectors)


def test_certain_readout_flip():
    """Test a readout flip with probability 1 flips every shot."""
    base = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.measure, qubits=(0,), record=0),
    ], qubits=1, detectors=[(0,)])
    base = base.model_copy(update={"instructions": base.instructions + (
        Instruction(kind=K.observable, records=(0,)),
    )})
    noisy = attach_noise(base, NoiseParams(p_double=0.0, p_single=0.0, p_readout=1.0))

    batch = sample_batch(noisy, 100, seed=1)
    assert batch.detectors.all()
    assert batch.observables.all()


def test_certain_dephasing_through_hadamards():
    """Test a Z-only channel with probability 1 propagates through Hadamards."""
    base = small_circuit([
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.hadamard, qubits=(0,)),
        Instruction(kind=K.hadamard, qubits=(0,)),
        Instruction(kind=K.measure, qubits=(0,), record=0),
    ], qubits=1, detectors=[(0,)])
    noisy = attach_noise(base, NoiseParams(p_double=0.0, p_single=1.0, p_readout=0.0, eta="inf"))

    # Z after reset is harmless; Z after each H gives X, Z, then X on readout
    batch = sample_batch(noisy, 70, seed=2)
    assert batch.detectors.all()


def test_postselected_mask():
    """Test the postselection mask keeps only shots with quiet detectors."""
    circuit = compile_config(
        make_config(CodeType.surface, Structure.heavy_hex, InitMethod.down_square, p2=0.02), Basis.z,
    )
    batch = sample_batch(circuit, 500, seed=9)
    stage_one = circuit.detector_indices(1)
    mask = batch.postselected(stage_one)
    assert mask.shape == (500,)
    assert np.array_equal(mask, ~batch.detectors[:, list(stage_one)].any(axis=1))
    assert batch.postselected([]).all()


def test_event_dump_layout(tmp_path):
    """Test the packed event dump and its sidecar."""
    circuit = compile_config(
        make_config(CodeType.xzzx, Structure.lattice, InitMethod.down_triangle, p2=0.05), Basis.z,
    )
    batches = list(sample(circuit, 150, seed=4, batch_size=64))
    path = tmp_path / "events.b8"
    sidecar = write_event_dump(str(path), circuit, batches)

    n_det = len(circuit.detectors)
    assert sidecar["shots"] == 150
    assert sidecar["detectors"] == n_det
    assert sidecar["bytes_per_shot"] == (n_det + 8) // 8
    raw = np.frombuffer(path.read_bytes(), dtype=np.uint8).reshape(150, sidecar["bytes_per_shot"])
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :n_det + 1].astype(bool)
    assert np.array_equal(bits[:64, :n_det], batches[0].detectors)
    assert np.array_equal(bits[:64, n_det], batches[0].observables)
    meta = json.loads((tmp_path / "events.b8.json").read_text())
    assert len(meta["detector_metadata"]) == n_det


# Test blind qubits

def blind_qubits_for(code, structure, method):
    config = make_config(code, structure, method)
    circuits = [compile_config(config, basis, noisy=False) for basis in (Basis.z, Basis.x)]
    return find_blind_qubits(*circuits), circuits


@pytest.mark.parametrize("code,structure,method", ALL_COMBOS)
def test_exactly_one_blind_qubit(code, structure, method):
    """Test every configuration at distance 3 has exactly one blind qubit."""
    blind, _ = blind_qubits_for(code, structure, method)
    assert len(blind) == 1


@pytest.mark.parametrize("code", list(CodeType))
@pytest.mark.parametrize("structure", list(Structure))
def test_blind_qubit_pairing(code, structure):
    """Test down-square shares the right-triangle blind qubit, right-square differs from down-square."""
    down_square, _ = blind_qubits_for(code, structure, InitMethod.down_square)
    right_triangle, _ = blind_qubits_for(code, structure, InitMethod.right_triangle)
    right_square, _ = blind_qubits_for(code, structure, InitMethod.right_square)
    down_triangle, _ = blind_qubits_for(code, structure, InitMethod.down_triangle)

    assert down_square == right_triangle
    assert right_square == down_triangle
    assert right_square != down_square


@pytest.mark.parametrize("code", list(CodeType))
@pytest.mark.parametrize("method", list(InitMethod))
def test_blind_fault_anticommutes_with_preparation(code, method):
    """Test undetected blind-qubit faults anticommute with the qubit's preparation stabilizer."""
    _, circuits = blind_qubits_for(code, Structure.lattice, method)
    layout = build_layout(code, Structure.lattice, 3)
    regions = assign_regions(layout, method, 3, 3)
    for circuit in circuits:
        for qubit, labels in blind_faults(circuit).items():
            prepared = "Z" if regions.init_basis[qubit] == InitBasis.zero else "X"
            for label in labels:
                assert anticommutes({qubit: label}, {qubit: prepared})


# Test flag propagation

def vertical_hub_gate(circuit, layout):
    """Index and hub of the first syndrome-to-hub CNOT in an isolated round."""
    flags = set(layout.flag_qubits)
    for index, inst in enumerate(circuit.instructions):
        if inst.kind == K.cnot and inst.qubits[0] not in flags and inst.qubits[1] in flags \
                and circuit.qubit_roles[inst.qubits[0]].is_syndrome:
            return index, inst.qubits[1]
    raise AssertionError("no routed leg found")


@pytest.mark.parametrize("code,expected", [(CodeType.xzzx, "X"), (CodeType.zxxz, "Z")])
def test_hub_flag_x_lands_on_one_data_qubit(code, expected):
    """Test an X on a vertical-leg hub flag reaches one data qubit with the leg's Pauli type."""
    layout = build_layout(code, Structure.heavy_hex, 3)
    circuit = round_circuit(layout)
    index, hub = vertical_hub_gate(circuit, layout)

    effect = propagate_fault(circuit, index, "IX", until=len(circuit.instructions) - 1)
    assert len(effect.residual) == 1
    assert data_effect_type(effect) == expected
    assert any(circuit.detectors[d].anchor == hub for d in effect.detectors)


@pytest.mark.parametrize("code", list(CodeType))
@pytest.mark.parametrize("flags_per_leg", [2, 3])
def test_mirrored_flags_have_no_violations(code, flags_per_leg):
    """Test mirrored flag chains keep every flag fault on at most one data qubit."""
    layout = build_layout(code, Structure.heavy_hex, 3, flags_per_leg=flags_per_leg)
    assert flag_symmetry_violations(layout) == []


def test_unmirrored_flags_are_caught():
    """Test the unmirrored mutant spreads a flag fault to several data qubits."""
    layout = build_layout(CodeType.xzzx, Structure.heavy_hex, 3)
    violations = flag_symmetry_violations(layout, mirror_flags=False)
    assert violations
    assert all(len(v["data_qubits"]) > 1 for v in violations)


def test_lattice_has_no_flag_faults():
    """Test lattice layouts have nothing to audit."""
    layout = build_layout(CodeType.surface, Structure.lattice, 3)
    assert flag_symmetry_violations(layout) == []


# Test against the reference tableau simulator

ORACLE_CIRCUITS = 50
ORACLE_SHOTS = 300
FRAME_SHOTS = 20000
ALPHA = 0.01 / ORACLE_CIRCUITS


def random_unitary_circuit(rng: random.Random) -> Circuit:
    """Random H/CX/CZ circuit followed by its inverse, then a full readout."""
    n = 4
    ops = [Instruction(kind=K.reset, qubits=(q,)) for q in range(n)]
    plus = [q for q in range(n) if rng.random() < 0.5]
    ops += [Instruction(kind=K.hadamard, qubits=(q,)) for q in plus]
    gates = []
    for _ in range(10):
        choice = rng.random()
        if choice < 0.3:
            gates.append(Instruction(kind=K.hadamard, qubits=(rng.randrange(n),)))
        else:
            a, b = rng.sample(range(n), 2)
            gates.append(Instruction(kind=K.cnot if choice < 0.7 else K.cz, qubits=(a, b)))
    ops += gates + list(reversed(gates))
    ops += [Instruction(kind=K.hadamard, qubits=(q,)) for q in plus]
    ops += [Instruction(kind=K.measure, qubits=(q,), record=q) for q in range(n)]

    detectors = [tuple(sorted(rng.sample(range(n), rng.randint(1, 2)))) for _ in range(3)]
    circuit = small_circuit(ops, n, detectors)
    observable = Instruction(kind=K.observable, records=tuple(sorted(rng.sample(range(n), 2))))
    circuit = circuit.model_copy(update={"instructions": circuit.instructions + (observable,)})
    eta = rng.choice([0.5, 1.0, 10.0, "inf"])
    return attach_noise(circuit, NoiseParams(p_double=0.05, p_single=0.03, p_readout=0.02, eta=eta))


def test_frame_sampler_matches_tableau_oracle():
    """Test detector/observable distributions agree with exact tableau simulation."""
    rng = random.Random(2024)
    for trial in range(ORACLE_CIRCUITS):
        circuit = random_unitary_circuit(rng)

        batch = sample_batch(circuit, FRAME_SHOTS, seed=trial)
        rows = np.concatenate([batch.detectors, batch.observables[:, None]], axis=1)
        frame_counts = Counter(tuple(bool(b) for b in row) for row in rows)

        oracle_counts = Counter()
        for _ in range(ORACLE_SHOTS):
            detectors, observables = run_shot(circuit, rng)
            oracle_counts[tuple(detectors + observables)] += 1

        outcomes = set(frame_counts) | set(oracle_counts)
        observed, expected = [], []
        pooled_observed, pooled_expected = 0, 0.0
        for outcome in outcomes:
            e = ORACLE_SHOTS * frame_counts[outcome] / FRAME_SHOTS
            if e < 5:
                pooled_observed += oracle_counts[outcome]
                pooled_expected += e
            else:
                observed.append(oracle_counts[outcome])
                expected.append(e)
        if pooled_expected >= 5 or not expected:
            observed.append(pooled_observed)
            expected.append(pooled_expected)
        else:
            observed[0] += pooled_observed
            expected[0] += pooled_expected
        if len(expected) < 2:
            continue
        statistic, p_value = chisquare(observed, f_exp=expected)
        assert p_value > ALPHA, f"trial {trial}: chi2={statistic:.2f} over {len(expected)} bins"
