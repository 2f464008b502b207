# Test Matching Decoder Engine
# Edge weights, graph construction, blossom decoding and the brute-force oracle

import math
import random

import networkx as nx
import pytest

from src.engines.circuit_builder import compile_config
from src.engines.matching_decoder import (
    BOUNDARY,
    BRUTE_FORCE_LIMIT,
    SPLIT_LIMIT,
    MatchingDecoder,
    brute_force_decode,
    build_graph,
    decode,
    dump_graph,
    edge_for,
    edge_weight,
    enumerate_mechanisms,
    merge_probabilities,
    single_fault_failures,
    split_signature,
)
from src.schemas.circuit import (
    ChannelDistribution,
    Circuit,
    DetectorClass,
    DetectorInfo,
    Instruction,
    InstructionKind,
)
from src.schemas.layout import Coord, QubitRole
from src.schemas.models import Basis, CodeType, InitMethod, InjectionConfig, NoiseParams, Structure

K = InstructionKind


def repeated_readout_circuit(q: float) -> Circuit:
    """One qubit, one X-only noise location, read twice into two Stage-II detectors."""
    instructions = [
        Instruction(kind=K.reset, qubits=(0,)),
        Instruction(kind=K.noise1, qubits=(0,), channel="single", probability=q),
        Instruction(kind=K.measure, qubits=(0,), record=0),
        Instruction(kind=K.measure, qubits=(0,), record=1),
    ]
    infos = []
    for record in (0, 1):
        infos.append(DetectorInfo(
            index=record, stage=2, detector_class=DetectorClass.final_readout, round=1,
        ))
        instructions.append(Instruction(
            kind=K.detector, records=(record,), stage=2,
            detector_class=DetectorClass.final_readout, round=1,
        ))
    instructions.append(Instruction(kind=K.observable, records=(0,)))
    return Circuit(
        instructions=tuple(instructions),
        qubit_count=1,
        measurement_count=2,
        qubit_coords=(Coord(0, 0),),
        qubit_roles=(QubitRole.data,),
        detectors=tuple(infos),
        observable_basis=Basis.z,
        channels={"single": ChannelDistribution(arity=1, p=q, support=(("X", q),))},
        noisy=True,
    )


def injection_graph(code=CodeType.surface, structure=Structure.lattice, eta=0.5, p2=0.005,
                    method=InitMethod.down_triangle, basis=Basis.z):
    config = InjectionConfig(
        code=code, structure=structure, init_method=method,
        noise=NoiseParams(p_double=p2, eta=eta),
    )
    circuit = compile_config(config, basis)
    return circuit, build_graph(circuit)


# Test edge weights and merging

def test_merge_probabilities():
    """Test two independent 0.1 mechanisms merge to 0.18."""
    assert merge_probabilities(0.1, 0.1) == pytest.approx(0.18)
    assert merge_probabilities(0.0, 0.3) == pytest.approx(0.3)


def test_edge_weight_is_log_likelihood():
    """Test the weight is -ln(q/(1-q)) and vanishes at one half."""
    assert edge_weight(0.01) == pytest.approx(-math.log(0.01 / 0.99))
    assert edge_weight(0.5) == pytest.approx(0.0)
    assert edge_weight(0.9) == edge_weight(0.5)
    with pytest.raises(ValueError, match="must be positive"):
        edge_weight(0.0)


def test_weight_monotonicity():
    """Test a less likely mechanism never gets a lighter edge."""
    qs = [1e-5, 1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5]
    weights = [edge_weight(q) for q in qs]
    assert all(a > b for a, b in zip(weights, weights[1:]))

    light = edge_for(build_graph(repeated_readout_circuit(0.02)), 0, 1)["weight"]
    heavy = edge_for(build_graph(repeated_readout_circuit(0.01)), 0, 1)["weight"]
    assert heavy > light


# Test graph construction

def test_single_location_edge():
    """Test one noise location with a two-detector signature makes a single edge."""
    q = 0.01
    detector_graph = build_graph(repeated_readout_circuit(q))
    edges = detector_graph.edges()
    assert len(edges) == 1
    data = edge_for(detector_graph, 0, 1)
    assert data["probability"] == pytest.approx(q)
    assert data["weight"] == pytest.approx(-math.log(q / (1 - q)))
    assert data["flips_observable"] is True
    assert detector_graph.dropped_mechanisms == 0
    assert detector_graph.total_mass == pytest.approx(q)


def test_build_graph_requires_noise():
    """Test a noiseless circuit is rejected."""
    config = InjectionConfig()
    clean = compile_config(config, Basis.z, noisy=False)
    with pytest.raises(ValueError, match="noise attached"):
        build_graph(clean)


def test_stage_one_detectors_stay_out_of_graph():
    """Test only Stage-II detectors and the boundary are graph nodes."""
    circuit, detector_graph = injection_graph()
    stage_one = set(circuit.detector_indices(1))
    assert stage_one
    assert not stage_one & set(detector_graph.graph.nodes)
    assert set(detector_graph.graph.nodes) == set(circuit.detector_indices(2)) | {BOUNDARY}
    assert detector_graph.postselected_mass > 0


def test_graph_reaches_boundary():
    """Test every detector touched by an edge has a path to the boundary."""
    _, detector_graph = injection_graph(structure=Structure.heavy_hex)
    graph = detector_graph.graph
    for node in graph.nodes:
        if graph.degree(node) > 0:
            assert nx.has_path(graph, node, BOUNDARY)


def horizontal_z_edges(circuit):
    """Edge keys of Z-only mechanisms after the CZ gates of horizontal XZZX legs."""
    stage_one = set(circuit.detector_indices(1))
    keys = set()
    for mechanism in enumerate_mechanisms(circuit):
        gate = circuit.instructions[mechanism.location - 1]
        if gate.kind != K.cz or set(mechanism.label) - {"I", "Z"}:
            continue
        if not 1 <= len(mechanism.detectors) <= 2 or mechanism.detectors & stage_one:
            continue
        nodes = sorted(mechanism.detectors)
        keys.add((nodes[0], nodes[1] if len(nodes) == 2 else BOUNDARY))
    return keys


def test_high_bias_lightens_horizontal_z_edges():
    """Test eta = 100 gives the horizontal-leg Z edges of XZZX lower weights than eta = 0.5."""
    circuit, flat = injection_graph(code=CodeType.xzzx, eta=0.5)
    _, biased = injection_graph(code=CodeType.xzzx, eta=100.0)
    keys = horizontal_z_edges(circuit)
    assert keys

    flat_weights = [edge_for(flat, u, v)["weight"] for u, v in keys]
    biased_weights = [edge_for(biased, u, v)["weight"] for u, v in keys]
    lighter = sum(b < f for b, f in zip(biased_weights, flat_weights))
    assert lighter > len(keys) // 2
    assert sum(biased_weights) < sum(flat_weights)


# Test hyperedge splitting

def test_split_prefers_known_pairs():
    """Test a three-detector signature splits into a known pair and a known boundary edge."""
    edge_flips = {(1, 2): False, (3, BOUNDARY): True, (1, BOUNDARY): False}
    pieces = split_signature(frozenset({1, 2, 3}), True, edge_flips)
    assert pieces == [(frozenset({1, 2}), False), (frozenset({3}), True)]


def test_split_matches_observable_parity():
    """Test the cover whose edge flips reproduce the mechanism flip wins over a smaller one."""
    edge_flips = {(1, 2): True, (3, 4): False, (1, BOUNDARY): False, (2, BOUNDARY): False,
                  (3, BOUNDARY): False, (4, BOUNDARY): False}
    pieces = split_signature(frozenset({1, 2, 3, 4}), False, edge_flips)
    assert sorted(len(piece) for piece, _ in pieces) == [1, 1, 2]
    flip = False
    for _, piece_flip in pieces:
        flip ^= piece_flip
    assert flip is False


def test_split_falls_back_to_fresh_boundary_edges():
    """Test lone detectors without a known edge get their own boundary edge."""
    pieces = split_signature(frozenset({5, 6, 7}), True, {(5, 6): False})
    assert pieces[0] == (frozenset({5, 6}), False)
    assert pieces[1] == (frozenset({7}), True)


def test_split_limit():
    """Test signatures beyond the split limit are left unsplit."""
    detectors = frozenset(range(SPLIT_LIMIT + 1))
    assert split_signature(detectors, False, {(d, BOUNDARY): False for d in detectors}) is None


@pytest.mark.parametrize("code", list(CodeType))
@pytest.mark.parametrize("structure", list(Structure))
@pytest.mark.parametrize("eta", [0.5, 100.0])
def test_dropped_mass_is_small(code, structure, eta):
    """Test mechanisms that fit no edge carry under 1% of the probability mass."""
    _, detector_graph = injection_graph(code=code, structure=structure, eta=eta)
    assert detector_graph.total_mass > 0
    assert detector_graph.dropped_fraction < 0.01


def test_dump_graph_format():
    """Test the dump is one sorted `u v|B weight prob flip` line per edge."""
    _, detector_graph = injection_graph()
    text = dump_graph(detector_graph)
    lines = text.splitlines()
    assert len(lines) == detector_graph.graph.number_of_edges()
    keys = []
    for line in lines:
        u, v, weight, prob, flip = line.split()
        assert flip in ("0", "1")
        assert float(weight) == pytest.approx(edge_weight(float(prob)))
        if v == "B":
            keys.append((int(u), True, 0))
        else:
            assert int(u) < int(v)
            keys.append((int(u), False, int(v)))
    assert keys == sorted(keys)
    assert text == dump_graph(detector_graph)


# Test decoding

def test_empty_syndrome():
    """Test nothing fired means no pairs and no flip."""
    _, detector_graph = injection_graph()
    correction = decode(detector_graph, [])
    assert correction.pairs == ()
    assert correction.flip is False
    assert brute_force_decode(detector_graph, []).pairs == ()


def test_decode_single_location_circuit():
    """Test both detectors of the hand-built circuit pair up and predict the flip."""
    detector_graph = build_graph(repeated_readout_circuit(0.01))
    correction = decode(detector_graph, [1, 0])
    assert correction.pairs == ((0, 1),)
    assert correction.flip is True


def test_decode_rejects_unknown_detector():
    """Test a detector outside the graph raises."""
    detector_graph = build_graph(repeated_readout_circuit(0.01))
    with pytest.raises(ValueError, match="not a node"):
        decode(detector_graph, [7])


def test_decode_rejects_unmatchable_detector():
    """Test a lone detector with no boundary path cannot be matched."""
    detector_graph = build_graph(repeated_readout_circuit(0.01))
    with pytest.raises(ValueError, match="cannot be matched"):
        decode(detector_graph, [0])


def reachable_detectors(detector_graph):
    return sorted(n for n in nx.node_connected_component(detector_graph.graph, BOUNDARY) if n != BOUNDARY)


def test_blossom_matches_brute_force():
    """Test matched weight equals the exhaustive minimum on 200 random d=3 syndromes."""
    _, detector_graph = injection_graph()
    decoder = MatchingDecoder(detector_graph)
    nodes = reachable_detectors(detector_graph)
    rng = random.Random(2024)
    for _ in range(200):
        fired = rng.sample(nodes, rng.randint(1, 12))
        fast = decoder.decode(fired)
        slow = brute_force_decode(detector_graph, fired, decoder=decoder)
        assert fast.weight == pytest.approx(slow.weight, abs=1e-6)
        matched = sorted(u for pair in fast.pairs for u in pair if u != BOUNDARY)
        assert matched == sorted(fired)


def test_brute_force_agrees_on_pairs():
    """Test both decoders agree on every two-detector syndrome of a small neighbourhood."""
    _, detector_graph = injection_graph()
    decoder = MatchingDecoder(detector_graph)
    nodes = reachable_detectors(detector_graph)[:10]
    for i, u in enumerate(nodes):
        for v in nodes[i + 1:]:
            fast = decoder.decode([u, v])
            slow = brute_force_decode(detector_graph, [u, v], decoder=decoder)
            assert fast.weight == pytest.approx(slow.weight, abs=1e-6)


def test_single_detector_goes_to_boundary():
    """Test a lone fired detector is matched to the boundary along its lightest path."""
    _, detector_graph = injection_graph()
    decoder = MatchingDecoder(detector_graph)
    node = reachable_detectors(detector_graph)[0]
    correction = decoder.decode([node])
    assert correction.pairs == ((node, BOUNDARY),)
    assert correction.weight == pytest.approx(decoder.distance(node, BOUNDARY))


def test_brute_force_limit():
    """Test the oracle refuses more than its limit of fired detectors."""
    _, detector_graph = injection_graph()
    nodes = reachable_detectors(detector_graph)[:BRUTE_FORCE_LIMIT + 1]
    with pytest.raises(ValueError, match="at most"):
        brute_force_decode(detector_graph, nodes)


def test_decode_is_memoised():
    """Test repeated syndromes return the cached correction."""
    _, detector_graph = injection_graph()
    decoder = MatchingDecoder(detector_graph)
    nodes = reachable_detectors(detector_graph)[:4]
    assert decoder.decode(nodes) is decoder.decode(list(reversed(nodes)))


@pytest.mark.parametrize("code", list(CodeType))
@pytest.mark.parametrize("basis", list(Basis))
def test_single_faults_are_corrected(code, basis):
    """Test every retained single Stage-II fault decodes to its own observable effect at d=3."""
    circuit, detector_graph = injection_graph(code=code, basis=basis)
    assert single_fault_failures(circuit, detector_graph) == []
