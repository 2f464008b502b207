# hexinject - Invariant Audit
# Aggregated pass/fail checks behind `hexinject verify`

import random

import networkx as nx
import numpy as np

from src.core.logging.logger import log_engine_failure, setup_logger
from src.engines.circuit_builder import circuits_mirror_equivalent, compile_config
from src.engines.code_layout import (
    build_layout,
    commutation_violations,
    max_interaction_degree,
    stabilizer_rank,
)
from src.engines.matching_decoder import (
    BOUNDARY,
    MatchingDecoder,
    brute_force_decode,
    build_graph,
    single_fault_failures,
)
from src.engines.noise_model import depolarizing_channel, single_qubit_channel, two_qubit_channel
from src.engines.pauli_sim import find_blind_qubits, flag_symmetry_violations, sample_batch
from src.schemas.models import (
    DEFAULT_ETAS,
    INFINITE_BIAS,
    AuditReport,
    Basis,
    CodeType,
    InitMethod,
    InjectionConfig,
    NoiseParams,
    Structure,
)

logger = setup_logger(__name__)

# Rates used for the decoder checks when the configuration itself is noiseless
AUDIT_NOISE = 0.005
ORACLE_TRIALS = 200
ORACLE_MAX_FIRED = 12
DETERMINISM_SHOTS = 256
DROPPED_MASS_LIMIT = 0.01


def _check_channels(report: AuditReport, noise: NoiseParams) -> None:
    worst = 0.0
    for eta in list(DEFAULT_ETAS) + [INFINITE_BIAS]:
        for p in (noise.p_single, noise.p_double, AUDIT_NOISE):
            worst = max(
                worst,
                abs(single_qubit_channel(p, eta).total() - p),
                abs(two_qubit_channel(p, eta).total() - p),
            )
    report.add("channel_normalization", worst < 1e-12, f"max deviation {worst:.3e}")

    p = noise.p_double or AUDIT_NOISE
    identical = (
        single_qubit_channel(p, 0.5).support == depolarizing_channel(p, 1).support
        and two_qubit_channel(p, 0.5).support == depolarizing_channel(p, 2).support
    )
    report.add("channel_depolarizing_limit", identical, f"p={p}")


def _check_layouts(report: AuditReport, config: InjectionConfig) -> None:
    limit = 3 if config.structure == Structure.heavy_hex else 4
    for distance in sorted({config.d1, config.d2}):
        layout = build_layout(config.code, config.structure, distance, config.flags_per_leg)
        violations = commutation_violations(layout)
        report.add(f"layout_commutation_d{distance}", not violations, f"{len(violations)} anticommuting pairs")
        rank = stabilizer_rank(layout)
        report.add(
            f"layout_rank_d{distance}",
            rank == len(layout.stabilizers),
            f"rank {rank} of {len(layout.stabilizers)} stabilizers",
        )
        degree = max_interaction_degree(layout)
        report.add(f"layout_degree_d{distance}", degree <= limit, f"max degree {degree}, limit {limit}")


def _blind(config: InjectionConfig, method: InitMethod) -> set:
    variant = config.model_copy(update={"init_method": method, "d2": config.d1})
    return find_blind_qubits(*(compile_config(variant, basis, noisy=False) for basis in Basis))


def _check_blind_qubits(report: AuditReport, config: InjectionConfig) -> None:
    blind = {method: _blind(config, method) for method in InitMethod}
    own = blind[config.init_method]
    report.add("blind_qubit_count", len(own) == 1, f"blind qubits {sorted(own)}")
    paired = (
        blind[InitMethod.down_square] == blind[InitMethod.right_triangle]
        and blind[InitMethod.right_square] == blind[InitMethod.down_triangle]
    )
    report.add(
        "blind_qubit_pairing",
        paired,
        "; ".join(f"{method.value}={sorted(qubits)}" for method, qubits in blind.items()),
    )


def _check_lattice_symmetry(report: AuditReport, config: InjectionConfig) -> None:
    pairs = [
        (InitMethod.right_triangle, InitMethod.down_triangle),
        (InitMethod.right_square, InitMethod.down_square),
    ]
    base = config.model_copy(update={"structure": Structure.lattice})
    mismatched = []
    for right, down in pairs:
        for basis in Basis:
            xzzx = compile_config(base.model_copy(update={"code": CodeType.xzzx, "init_method": right}), basis, noisy=False)
            zxxz = compile_config(base.model_copy(update={"code": CodeType.zxxz, "init_method": down}), basis, noisy=False)
            if not circuits_mirror_equivalent(xzzx, zxxz):
                mismatched.append(f"{right.value}/{down.value}/{basis.value}")
    report.add("lattice_symmetry", not mismatched, ", ".join(mismatched) or "xzzx right == zxxz down")


def _check_flag_symmetry(report: AuditReport, config: InjectionConfig, mirror_flags: bool) -> None:
    layout = build_layout(config.code, config.structure, config.d2, config.flags_per_leg)
    violations = flag_symmetry_violations(layout, mirror_flags=mirror_flags)
    report.add("flag_symmetry", not violations, f"{len(violations)} flag faults spread to several data qubits")


def _check_noiseless(report: AuditReport, config: InjectionConfig, mirror_flags: bool) -> None:
    dirty = []
    for basis in Basis:
        circuit = compile_config(config, basis, noisy=False, mirror_flags=mirror_flags)
        batch = sample_batch(circuit, DETERMINISM_SHOTS, config.seed)
        if batch.detectors.any() or batch.observables.any():
            dirty.append(basis.value)
    report.add("noiseless_determinism", not dirty, f"dirty bases: {dirty}" if dirty else "all shots clean")


def _check_decoder(report: AuditReport, config: InjectionConfig, mirror_flags: bool) -> None:
    noise = config.noise
    if noise.is_noiseless:
        noise = NoiseParams(p_double=AUDIT_NOISE, eta=noise.eta)
    noisy = config.model_copy(update={"noise": noise})
    circuit = compile_config(noisy, Basis.z, mirror_flags=mirror_flags)
    detector_graph = build_graph(circuit)
    decoder = MatchingDecoder(detector_graph)

    graph = detector_graph.graph
    stranded = [n for n in graph.nodes if n != BOUNDARY and graph.degree(n) and not nx.has_path(graph, n, BOUNDARY)]
    report.add("graph_reaches_boundary", not stranded, f"{len(stranded)} detectors cut off from the boundary")

    report.add(
        "dropped_mass",
        detector_graph.dropped_fraction < DROPPED_MASS_LIMIT,
        f"dropped fraction {detector_graph.dropped_fraction:.3e} ({detector_graph.dropped_mechanisms} mechanisms)",
    )

    nodes = sorted(n for n in nx.node_connected_component(graph, BOUNDARY) if n != BOUNDARY)
    rng = random.Random(config.seed)
    disagreements = 0
    trials = ORACLE_TRIALS if nodes else 0
    for _ in range(trials):
        fired = rng.sample(nodes, rng.randint(1, min(ORACLE_MAX_FIRED, len(nodes))))
        fast = decoder.decode(fired)
        slow = brute_force_decode(detector_graph, fired, decoder=decoder)
        if not np.isclose(fast.weight, slow.weight, rtol=0.0, atol=1e-6):
            disagreements += 1
    report.add("decoder_oracle", disagreements == 0, f"{disagreements} of {trials} syndromes disagree")

    failures = single_fault_failures(circuit, detector_graph, decoder)
    report.add("single_fault_correction", not failures, f"{len(failures)} single faults decode to a logical error")


def verify(config: InjectionConfig, mirror_flags: bool = True) -> AuditReport:
    """
    Audit every structural, sampling and decoding invariant for one configuration.

    A check that raises is recorded as failed with the error text, so the
    report always lists every check.

    Args:
        config: Configuration to audit
        mirror_flags: False audits the unmirrored flag schedule

    Returns:
        AuditReport; report.passed is False when any check failed
    """
    report = AuditReport()
    checks = [
        ("channels", lambda: _check_channels(report, config.noise)),
        ("layouts", lambda: _check_layouts(report, config)),
        ("blind_qubits", lambda: _check_blind_qubits(report, config)),
        ("lattice_symmetry", lambda: _check_lattice_symmetry(report, config)),
        ("flag_symmetry", lambda: _check_flag_symmetry(report, config, mirror_flags)),
        ("noiseless", lambda: _check_noiseless(report, config, mirror_flags)),
        ("decoder", lambda: _check_decoder(report, config, mirror_flags)),
    ]
    for name, check in checks:
        try:
            check()
        except Exception as e:
            log_engine_failure("verify", e, {"check": name, "row_key": config.row_key()})
            report.add(name, False, f"{type(e).__name__}: {e}")

    failed = [check.name for check in report.checks if not check.passed]
    logger.info(
        "Audit finished",
        extra={"context": {"row_key": config.row_key(), "checks": len(report.checks), "failed": failed}},
    )
    return report

