"""Command-line entry point: ``mimo-gara run|sweep|default-config``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import InvalidConfigError, InvalidInputError, SimulationError
from .harness import Architecture, ExperimentSpec, SweepAxis, emit_report, run_experiment
from .metrics import Method
from .scenario import ScenarioConfig, load_config, save_config


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON scenario file (defaults to the built-in scenario)")
    parser.add_argument("--method", default="ga,eq", help="comma list from ga,eq,pso (default: ga,eq)")
    parser.add_argument("--arch", default="hp", help="comma list from hp,fdp (default: hp)")
    parser.add_argument("--realizations", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, required=True)
    parser.add_argument("--format", choices=("csv", "json"), help="inferred from --out when omitted")
    parser.add_argument("--trace-fitness", type=Path, metavar="DIR",
                        help="write per-generation GA best-fitness traces to DIR")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mimo-gara",
        description="Hybrid-precoded MU-MIMO-OFDM resource allocation experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="evaluate a single operating point"))
    sweep = sub.add_parser("sweep", help="evaluate a sweep over P_T (dBm), C or K")
    _add_common(sweep)
    sweep.add_argument("--axis", required=True, choices=("pt", "c", "k"))
    sweep.add_argument("--values", required=True, help="comma list of sweep values")
    dump = sub.add_parser("default-config", help="write the default scenario as JSON")
    dump.add_argument("--out", type=Path, required=True)
    return parser


def _spec_from_args(args) -> ExperimentSpec:
    scenario = load_config(args.config) if args.config else ScenarioConfig()
    try:
        methods = [Method(m.upper()) for m in _csv_list(args.method)]
        archs = [Architecture(a.upper()) for a in _csv_list(args.arch)]
    except ValueError as exc:
        raise InvalidConfigError(str(exc)) from exc
    kwargs = {}
    if args.command == "sweep":
        kwargs["sweep_axis"] = SweepAxis.parse(args.axis)
        try:
            kwargs["sweep_values"] = tuple(float(v) for v in _csv_list(args.values))
        except ValueError as exc:
            raise InvalidConfigError(f"bad sweep values {args.values!r}") from exc
    return ExperimentSpec(
        scenario=scenario,
        methods=tuple((m, a) for a in archs for m in methods),
        realizations=args.realizations,
        master_seed=args.seed,
        trace_dir=args.trace_fitness,
        workers=args.workers,
        **kwargs,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "default-config":
            save_config(ScenarioConfig(), args.out)
            return 0
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        spec = _spec_from_args(args)
        fmt = args.format or ("json" if args.out.suffix == ".json" else "csv")
        emit_report(run_experiment(spec), fmt, args.out)
    except (InvalidConfigError, InvalidInputError, SimulationError, OSError, ValueError) as exc:
        print(f"mimo-gara: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
