"""
hexinject - Command-Line Interface
run | sweep | trend | verify | dump-layout | dump-circuit | dump-graph
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from src.core.config import DESK_SHOTS, FULL_SCALE_SHOTS
from src.core.logging.logger import log_engine_failure, log_event, setup_logger
from src.engines.circuit_builder import compile_config, dump_circuit
from src.engines.code_layout import build_layout, dump_layout
from src.engines.experiment_runner import FAMILIES, TREND_SHOTS, run, sweep, trends, verify, write_table
from src.engines.matching_decoder import build_graph, dump_graph
from src.schemas.models import (
    DEFAULT_D2S,
    DEFAULT_ETAS,
    DEFAULT_P2S,
    Basis,
    CodeType,
    InitMethod,
    InjectionConfig,
    NoiseParams,
    RunStatus,
    Structure,
    SweepGrid,
)

logger = setup_logger("hexinject.cli")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVARIANT = 2
EXIT_NO_ACCEPTANCE = 3

# Flags a --config file may override, by argparse destination
CONFIG_KEYS = {
    "code", "structure", "d1", "d2", "init", "eta", "p2", "p1", "p_readout",
    "shots", "seed", "basis", "flags_per_leg", "full_scale", "noiseless",
    "batch_size", "workers", "out", "dump_events",
}


class CliError(Exception):
    """Usage error reported with exit status 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which is reserved for invariant failures
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _add_config_flags(parser: argparse.ArgumentParser, multi: bool = False) -> None:
    many = " (comma-separated list)" if multi else ""
    parser.add_argument("--code", default=None if multi else CodeType.surface.value,
                        help=f"surface, xzzx or zxxz{many}")
    parser.add_argument("--structure", default=None if multi else Structure.lattice.value,
                        help=f"lattice or heavy-hex{many}")
    parser.add_argument("--d1", type=int, default=3, help="Injection patch distance")
    parser.add_argument("--d2", default=None if multi else "3", help=f"Extended patch distance{many}")
    parser.add_argument("--init", default=None if multi else InitMethod.down_triangle.value,
                        help=f"right-triangle, down-triangle, right-square or down-square{many}")
    parser.add_argument("--eta", default=None if multi else "0.5", help=f"Z bias, a number >= 0.5 or inf{many}")
    parser.add_argument("--p2", default=None if multi else "0.005", help=f"Two-qubit error rate{many}")
    parser.add_argument("--p1", type=float, default=None, help="Single-qubit error rate (default p2/20)")
    parser.add_argument("--p-readout", type=float, default=None, help="Readout flip rate (default p2)")
    parser.add_argument("--shots", type=int, default=None, help=f"Shots per basis (default {DESK_SHOTS})")
    parser.add_argument("--full-scale", action="store_true", help=f"Use {FULL_SCALE_SHOTS} shots per basis")
    parser.add_argument("--seed", type=int, default=0, help="Master seed")
    parser.add_argument("--basis", default="both", choices=["z", "x", "both"], help="Readout bases to run")
    parser.add_argument("--flags-per-leg", type=int, default=2, choices=[2, 3], help="Heavy-hex flags per vertical leg")
    parser.add_argument("--noiseless", action="store_true", help="Set every error rate to zero")
    parser.add_argument("--batch-size", type=int, default=None, help="Shots per sampling batch")
    parser.add_argument("--workers", type=int, default=None, help="Concurrent batches or sweep rows")
    parser.add_argument("--config", default=None, help="JSON file whose keys override the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hexinject", description="Magic-state injection simulator")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_parser = commands.add_parser("run", help="Run one configuration")
    _add_config_flags(run_parser)
    run_parser.add_argument("--out", default=None, help="Write the result row as CSV")
    run_parser.add_argument("--dump-events", default=None, help="Write packed detection events")

    sweep_parser = commands.add_parser("sweep", help="Run a resumable parameter grid")
    _add_config_flags(sweep_parser, multi=True)
    sweep_parser.add_argument("--out", required=True, help="CSV table to create or resume")

    trend_parser = commands.add_parser("trend", help="Run a preset family and check its 3-sigma trends")
    trend_parser.add_argument("family", choices=sorted(FAMILIES), help="Preset sweep family")
    trend_parser.add_argument("--out", required=True, help="CSV table to create or resume")
    trend_parser.add_argument("--shots", type=int, default=TREND_SHOTS, help=f"Shots per basis (default {TREND_SHOTS})")
    trend_parser.add_argument("--seed", type=int, default=0, help="Master seed")
    trend_parser.add_argument("--batch-size", type=int, default=None, help="Shots per sampling batch")
    trend_parser.add_argument("--workers", type=int, default=None, help="Concurrent sweep rows")
    trend_parser.add_argument("--config", default=None, help="JSON file whose keys override the flags")

    verify_parser = commands.add_parser("verify", help="Audit the invariants of one configuration")
    _add_config_flags(verify_parser)
    verify_parser.add_argument("--unmirrored-flags", action="store_true",
                               help="Audit the unmirrored flag schedule (expected to fail)")

    layout_parser = commands.add_parser("dump-layout", help="Print the extended patch layout")
    _add_config_flags(layout_parser)

    circuit_parser = commands.add_parser("dump-circuit", help="Print the compiled circuit")
    _add_config_flags(circuit_parser)

    graph_parser = commands.add_parser("dump-graph", help="Print the Stage-II detector graph")
    _add_config_flags(graph_parser)
    return parser


def apply_config_file(args: argparse.Namespace) -> argparse.Namespace:
    """Override parsed flags with the keys of the --config JSON file."""
    if not args.config:
        return args
    path = Path(args.config)
    if not path.exists():
        raise CliError(f"Missing config file: {path}")
    with path.open("r", encoding="utf-8") as handle:
        overrides = json.load(handle)
    if not isinstance(overrides, dict):
        raise CliError(f"Config file {path} must hold a JSON object")
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest not in CONFIG_KEYS:
            raise CliError(f"Unknown config key {key!r} in {path}")
        setattr(args, dest, value)
    return args


def _values(value: Any, default: Sequence[Any]) -> List[str]:
    if value is None:
        return [str(v) for v in default]
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip()]


def _single(value: Any, name: str) -> str:
    values = _values(value, [])
    if len(values) != 1:
        raise CliError(f"--{name} takes one value here, got {values}")
    return values[0]


def _bases(value: str) -> tuple:
    return (Basis.z, Basis.x) if value == "both" else (Basis(value),)


def _shots(args: argparse.Namespace) -> int:
    if args.full_scale:
        return FULL_SCALE_SHOTS
    return int(args.shots) if args.shots is not None else DESK_SHOTS


def _noise(args: argparse.Namespace, p2: float, eta: Any) -> NoiseParams:
    if args.noiseless:
        return NoiseParams(p_double=0.0, p_single=0.0, p_readout=0.0, eta=eta)
    return NoiseParams(p_double=p2, p_single=args.p1, p_readout=args.p_readout, eta=eta)


def config_from_args(args: argparse.Namespace) -> InjectionConfig:
    return InjectionConfig(
        code=CodeType(_single(args.code, "code")),
        structure=Structure(_single(args.structure, "structure")),
        d1=int(args.d1),
        d2=int(_single(args.d2, "d2")),
        init_method=InitMethod(_single(args.init, "init")),
        noise=_noise(args, float(_single(args.p2, "p2")), _single(args.eta, "eta")),
        shots=_shots(args),
        seed=int(args.seed),
        bases=_bases(args.basis),
        flags_per_leg=int(args.flags_per_leg),
    )


def grid_from_args(args: argparse.Namespace) -> SweepGrid:
    p2s = [0.0] if args.noiseless else [float(p) for p in _values(args.p2, DEFAULT_P2S)]
    return SweepGrid(
        codes=[CodeType(v) for v in _values(args.code, [c.value for c in CodeType])],
        structures=[Structure(v) for v in _values(args.structure, [s.value for s in Structure])],
        methods=[InitMethod(v) for v in _values(args.init, [m.value for m in InitMethod])],
        etas=_values(args.eta, DEFAULT_ETAS),
        p2s=p2s,
        d2s=[int(d) for d in _values(args.d2, DEFAULT_D2S)],
        d1=int(args.d1),
        shots=_shots(args),
        seed=int(args.seed),
        bases=_bases(args.basis),
        flags_per_leg=int(args.flags_per_leg),
    )


def _print_json(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, default=str))


def cmd_run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    result = run(config, batch_size=args.batch_size, workers=args.workers, dump_events=args.dump_events)
    if args.out:
        write_table(Path(args.out), {config.row_key(): result.csv_row()})
    _print_json(result.model_dump(mode="json"))
    return EXIT_NO_ACCEPTANCE if result.status == RunStatus.no_acceptance else EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    summary = sweep(grid_from_args(args), args.out, workers=args.workers, batch_size=args.batch_size)
    _print_json(summary.model_dump(mode="json"))
    if summary.failed:
        return EXIT_ERROR
    return EXIT_NO_ACCEPTANCE if summary.no_acceptance else EXIT_OK


def cmd_trend(args: argparse.Namespace) -> int:
    report = trends(args.family, args.out, shots=args.shots, seed=args.seed,
                    workers=args.workers, batch_size=args.batch_size)
    payload = report.model_dump(mode="json")
    payload["passed"] = report.passed
    _print_json(payload)
    return EXIT_OK if report.passed else EXIT_INVARIANT


def cmd_verify(args: argparse.Namespace) -> int:
    report = verify(config_from_args(args), mirror_flags=not args.unmirrored_flags)
    payload = report.model_dump(mode="json")
    payload["passed"] = report.passed
    _print_json(payload)
    return EXIT_OK if report.passed else EXIT_INVARIANT


def cmd_dump_layout(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    sys.stdout.write(dump_layout(build_layout(config.code, config.structure, config.d2, config.flags_per_leg)))
    return EXIT_OK


def _dump_basis(args: argparse.Namespace) -> Basis:
    if args.basis == "both":
        return Basis.z
    return Basis(args.basis)


def cmd_dump_circuit(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    sys.stdout.write(dump_circuit(compile_config(config, _dump_basis(args), noisy=not args.noiseless)))
    return EXIT_OK


def cmd_dump_graph(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    sys.stdout.write(dump_graph(build_graph(compile_config(config, _dump_basis(args)))))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "trend": cmd_trend,
    "verify": cmd_verify,
    "dump-layout": cmd_dump_layout,
    "dump-circuit": cmd_dump_circuit,
    "dump-graph": cmd_dump_graph,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the hexinject command.

    Exit codes: 0 ok, 1 usage or runtime error, 2 failed invariant audit or trend,
    3 a run or sweep row accepted no shot.
    """
    args = build_parser().parse_args(argv)
    try:
        args = apply_config_file(args)
        log_event("INFO", f"Running {args.command}", context={"command": args.command}, module_name="hexinject.cli")
        return COMMANDS[args.command](args)
    except (CliError, ValueError, OSError) as e:
        log_engine_failure("cli", e, {"command": args.command})
        print(f"hexinject {args.command}: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
