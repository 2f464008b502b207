# hexinject - Experiment Runner
# Shot campaigns for one configuration: sample, post-select, decode, estimate

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.core.config import load_settings
from src.core.logging.logger import log_run_event, setup_logger
from src.engines.circuit_builder import compile_config
from src.engines.matching_decoder import MatchingDecoder, build_graph
from src.engines.noise_model import attach_noise
from src.engines.pauli_sim import ShotBatch, batch_plan, sample_batch, write_event_dump
from src.schemas.circuit import ChannelDistribution, Circuit
from src.schemas.models import Basis, BasisOutcome, ExperimentResult, InjectionConfig, RunStatus

logger = setup_logger(__name__)


def derive_seed(master_seed: int, key: str) -> int:
    """
    Deterministic 63-bit seed for a (master seed, key) pair.

    The key is hashed into the spawn key of a numpy SeedSequence, so distinct
    rows of a sweep get independent streams.
    """
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    spawn_key = tuple(int(word) for word in np.frombuffer(digest, dtype="<u4"))
    high, low = np.random.SeedSequence(entropy=master_seed, spawn_key=spawn_key).generate_state(2, dtype=np.uint32)
    return ((int(high) << 32) | int(low)) >> 1


def combine_rates(ex: Optional[float], ez: Optional[float]) -> Optional[float]:
    """E_total = 1 - (1 - E_X)(1 - E_Z); a basis that was not run counts as zero."""
    if ex is None and ez is None:
        return None
    return 1.0 - (1.0 - (ex or 0.0)) * (1.0 - (ez or 0.0))


def binomial_std_error(rate: float, n: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / n) if n > 0 else float("nan")


def compile_noisy(
    config: InjectionConfig,
    basis: Basis,
    channels: Optional[Dict[str, ChannelDistribution]] = None,
) -> Circuit:
    """Noisy circuit of one readout basis, optionally with hand-built channel tables."""
    if channels is None:
        return compile_config(config, basis)
    return attach_noise(compile_config(config, basis, noisy=False), config.noise, channels=channels)


def _dump_path(path: str, basis: Basis, bases: Tuple[Basis, ...]) -> str:
    if len(bases) == 1:
        return path
    target = Path(path)
    return str(target.with_name(f"{target.stem}.{basis.value}{target.suffix}"))


def run_basis(
    config: InjectionConfig,
    basis: Basis,
    channels: Optional[Dict[str, ChannelDistribution]] = None,
    batch_size: Optional[int] = None,
    workers: Optional[int] = None,
    dump_events: Optional[str] = None,
) -> Tuple[BasisOutcome, float]:
    """
    Sample, post-select and decode one readout basis.

    A shot is accepted when no Stage-I detector fired. Accepted shots are
    decoded on their Stage-II detectors and count as a logical error when
    the prediction disagrees with the observable record.

    Returns:
        The basis outcome and the dropped-mechanism fraction of its graph
    """
    circuit = compile_noisy(config, basis, channels)
    detector_graph = build_graph(circuit)
    decoder = MatchingDecoder(detector_graph)
    stage_one = list(circuit.detector_indices(1))
    stage_two = list(circuit.detector_indices(2))
    seed = derive_seed(config.seed, basis.value)
    plan = batch_plan(config.shots, batch_size)
    workers = workers or load_settings().workers

    accepted = 0
    errors = 0
    kept: List[ShotBatch] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        batches = pool.map(lambda item: sample_batch(circuit, item[1], seed, item[0]), plan)
        for batch in batches:
            mask = batch.postselected(stage_one)
            n_accepted = int(mask.sum())
            accepted += n_accepted
            if n_accepted:
                syndromes = batch.detectors[mask][:, stage_two]
                predictions = decoder.predict(syndromes, stage_two)
                errors += int(np.count_nonzero(batch.observables[mask] ^ predictions))
            if dump_events:
                kept.append(batch)

    if dump_events:
        write_event_dump(_dump_path(dump_events, basis, config.bases), circuit, kept)

    rate = errors / accepted if accepted else None
    outcome = BasisOutcome(
        basis=basis,
        shots=config.shots,
        accepted=accepted,
        logical_errors=errors,
        rate=rate,
        std_error=binomial_std_error(rate, accepted) if rate is not None else None,
    )
    logger.debug(
        "Basis finished",
        extra={"context": {"basis": basis.value, "accepted": accepted, "errors": errors, "seed": seed}},
    )
    return outcome, detector_graph.dropped_fraction


def run(
    config: InjectionConfig,
    channels: Optional[Dict[str, ChannelDistribution]] = None,
    batch_size: Optional[int] = None,
    workers: Optional[int] = None,
    dump_events: Optional[str] = None,
) -> ExperimentResult:
    """
    Run every requested readout basis of one configuration.

    E_X comes from the Z-basis run (a logical X flips the Z parity) and
    E_Z from the X-basis run. A basis with no accepted shot makes the whole
    result a no-acceptance result instead of raising.

    Args:
        config: Configuration to run
        channels: Channel tables replacing the ones derived from config.noise
        batch_size: Shots per batch; defaults to HEXINJECT_BATCH_SIZE
        workers: Concurrent batches; defaults to HEXINJECT_WORKERS
        dump_events: Optional path for a packed detection-event dump

    Returns:
        ExperimentResult with per-basis outcomes and combined estimates
    """
    started = time.perf_counter()
    outcomes: Dict[str, BasisOutcome] = {}
    dropped = 0.0
    for basis in config.bases:
        outcome, dropped_fraction = run_basis(config, basis, channels, batch_size, workers, dump_events)
        outcomes[basis.value] = outcome
        dropped = max(dropped, dropped_fraction)

    z = outcomes.get(Basis.z.value)
    x = outcomes.get(Basis.x.value)
    no_acceptance = any(outcome.accepted == 0 for outcome in outcomes.values())
    total_shots = sum(outcome.shots for outcome in outcomes.values())
    total_accepted = sum(outcome.accepted for outcome in outcomes.values())

    ex = z.rate if z else None
    ez = x.rate if x else None
    result = ExperimentResult(
        config=config,
        status=RunStatus.no_acceptance if no_acceptance else RunStatus.completed,
        outcomes=outcomes,
        ex=ex,
        ex_se=z.std_error if z else None,
        ez=ez,
        ez_se=x.std_error if x else None,
        etotal=None if no_acceptance else combine_rates(ex, ez),
        acceptance_rate=total_accepted / total_shots if total_shots else 0.0,
        dropped_mass=dropped,
        wall_time_s=time.perf_counter() - started,
    )
    log_run_event(logger, config.row_key(), result.status.value, {
        "acceptance_rate": result.acceptance_rate,
        "ex": result.ex,
        "ez": result.ez,
        "etotal": result.etotal,
        "dropped_mass": dropped,
        "wall_time_s": result.wall_time_s,
    })
    return result
