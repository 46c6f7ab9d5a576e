#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Command Router for sicbench
Parses the command line, dispatches to the subcommand handlers and renders
their output as JSON or CSV
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from config.config import MLE_MAX_ITER, MLE_TOL, get_default_seed, setup_logging
from sicbench.exceptions import ConfigError, SicBenchError
from sicbench.experiment_runner import SCHEMES, resolve_state, run_bench, run_experiment, scheme_pom, simulate_counts
from sicbench.file_io import (
    counts_to_frame,
    dumps_json,
    emit,
    frame_to_csv,
    load_circuit,
    load_counts,
    load_json,
    load_state,
    matrix_to_frame,
    matrix_to_rows,
    reconstruction_to_record,
    record_to_frame,
)
from sicbench.optical_bench import (
    BENCH_BUILDERS,
    circuit_unitary,
    detector_kraus,
    perturb_phases,
    port_kraus,
)
from sicbench.random_streams import normalize_seed, spawn_seeds
from sicbench.report_generator import ReportGenerator
from sicbench.schemas import StateSourceModel
from sicbench.tomography import CountRecord, MleOptions, ReconstructionMethod, outcome_distribution, reconstruct

# Configure logging
logger = logging.getLogger(__name__)

METHODS = [m.value for m in ReconstructionMethod]


@dataclass
class CommandOutput:
    """What a handler produced: a JSON payload, its CSV table and a verdict"""
    payload: Dict[str, Any]
    frame: Optional[pd.DataFrame] = None
    ok: bool = True


def _probability_frame(labels: List[str], probabilities) -> pd.DataFrame:
    rows = []
    for label, p in zip(labels, probabilities):
        port, result = label.split(",")
        rows.append({'port': int(port), 'result': int(result), 'probability': float(p)})
    return pd.DataFrame(rows, columns=['port', 'result', 'probability'])


def _state_source(args) -> StateSourceModel:
    if args.state:
        return StateSourceModel(source="file", path=args.state)
    if args.random_mixed:
        return StateSourceModel(source="random-mixed", dim=args.dim)
    return StateSourceModel(source="random-pure", dim=args.dim)


def _align_counts(record: CountRecord, labels: List[str], pom_id: str) -> CountRecord:
    """Reorder counts to the POM's effect order; a foreign POM id or unknown or missing labels are an error"""
    if record.pom_id and record.pom_id != pom_id:
        raise ConfigError(f"counts were recorded with POM {record.pom_id}, not {pom_id}",
                          ["pick the --scheme and --dim the counts were simulated with"])
    mapping = record.as_mapping()
    unknown = sorted(set(mapping) - set(labels))
    missing = [label for label in labels if label not in mapping]
    if unknown or missing:
        errors = [f"unknown outcome {label}" for label in unknown] + [f"missing outcome {label}" for label in missing]
        raise ConfigError(f"counts do not fit POM {pom_id}", errors)
    return CountRecord(pom_id, list(labels), np.array([mapping[label] for label in labels]))


def handle_validate(args) -> CommandOutput:
    generator = ReportGenerator(seed=args.seed)
    report = generator.generate_validation_report()
    return CommandOutput(report, generator.validation_frame(report), ok=report['passed'])


def handle_probs(args) -> CommandOutput:
    rho = load_state(args.state)
    pom = scheme_pom(args.scheme, rho.dim)
    probabilities = [float(p) for p in outcome_distribution(rho, pom)]
    payload = {
        'pom': pom.name,
        'scheme': args.scheme,
        'probabilities': dict(zip(pom.labels, probabilities)),
    }
    return CommandOutput(payload, _probability_frame(pom.labels, probabilities))


def handle_simulate(args) -> CommandOutput:
    state_seed, sample_seed = spawn_seeds(args.seed, 2)
    rho = resolve_state(_state_source(args), state_seed)
    counts = simulate_counts(rho, args.scheme, args.shots, sample_seed)
    payload = {'scheme': args.scheme, 'seed': args.seed, **counts.to_dict()}
    return CommandOutput(payload, counts_to_frame(counts))


def handle_reconstruct(args) -> CommandOutput:
    record = load_counts(args.counts)
    dim = args.dim or (4 if len(record.labels) == 16 else 2)
    pom = scheme_pom(args.scheme, dim)
    counts = _align_counts(record, pom.labels, pom.name)
    truth = load_state(args.truth) if args.truth else None
    opts = MleOptions(max_iter=args.max_iter, tol=args.tol)
    result = reconstruct(counts, pom, args.method, opts, truth=truth)
    payload = reconstruction_to_record(result)
    return CommandOutput(payload, record_to_frame(payload))


def handle_experiment(args) -> CommandOutput:
    payload = run_experiment(load_json(args.config)).to_dict()
    return CommandOutput(payload, record_to_frame(payload))


def handle_bench(args) -> CommandOutput:
    mle = {'max_iter': args.max_iter, 'tol': args.tol}
    result = run_bench(args.trials, args.shots, args.seed, scheme=args.scheme, dim=args.dim,
                       methods=args.methods, state_source=args.state_source, mle=mle, jobs=args.jobs)
    return CommandOutput(result, ReportGenerator(seed=args.seed).bench_frame(result))


def handle_dump_circuit(args) -> CommandOutput:
    circuit = load_circuit(args.circuit) if args.circuit else BENCH_BUILDERS[args.bench]()
    if args.perturb:
        circuit = perturb_phases(circuit, args.perturb, args.seed)
    unitary = circuit_unitary(circuit)
    kraus = port_kraus(circuit) if circuit.ports else detector_kraus(circuit)
    payload = {
        'circuit': circuit.to_dict(),
        'unitary': matrix_to_rows(unitary),
        'kraus': {k.port: matrix_to_rows(k.matrix) for k in kraus},
    }
    frames = [matrix_to_frame(unitary, "unitary")] + [matrix_to_frame(k.matrix, f"kraus {k.port}") for k in kraus]
    return CommandOutput(payload, pd.concat(frames, ignore_index=True))


HANDLERS: Dict[str, Callable[[Any], CommandOutput]] = {
    'validate': handle_validate,
    'probs': handle_probs,
    'simulate': handle_simulate,
    'reconstruct': handle_reconstruct,
    'experiment': handle_experiment,
    'bench': handle_bench,
    'dump-circuit': handle_dump_circuit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sicbench", description="sicbench - two-qubit SIC measurement toolkit")
    parser.add_argument("--seed", type=str, default=None, help="RNG seed (default: SICBENCH_SEED or built-in)")
    parser.add_argument("--output", type=str, default=None, help="Write output to this file instead of stdout")
    parser.add_argument("--format", choices=["json", "csv"], default="json", help="Output format")
    parser.add_argument("--log-level", type=str, default=None, help="Log level")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", help="Run the invariant suite")

    probs = sub.add_parser("probs", help="Outcome probabilities of a state")
    probs.add_argument("--state", required=True, help="State file (JSON)")
    probs.add_argument("--scheme", choices=SCHEMES, default="direct")

    simulate = sub.add_parser("simulate", help="Sample detection counts")
    source = simulate.add_mutually_exclusive_group()
    source.add_argument("--state", help="State file (JSON)")
    source.add_argument("--random-pure", action="store_true", help="Random pure state (default)")
    source.add_argument("--random-mixed", action="store_true", help="Random mixed state")
    simulate.add_argument("--scheme", choices=SCHEMES, default="direct")
    simulate.add_argument("--shots", type=int, required=True)
    simulate.add_argument("--dim", type=int, choices=[2, 4], default=4)

    rec = sub.add_parser("reconstruct", help="Reconstruct a state from counts")
    rec.add_argument("--counts", required=True, help="Counts file (CSV or JSON)")
    rec.add_argument("--scheme", choices=SCHEMES, default="direct")
    rec.add_argument("--dim", type=int, choices=[2, 4], default=None)
    rec.add_argument("--method", choices=METHODS, default="linear-projected")
    rec.add_argument("--truth", default=None, help="True state file for fidelity")
    rec.add_argument("--max-iter", type=int, default=MLE_MAX_ITER)
    rec.add_argument("--tol", type=float, default=MLE_TOL)

    experiment = sub.add_parser("experiment", help="Run an experiment configuration")
    experiment.add_argument("--config", required=True, help="Experiment configuration (JSON)")

    bench = sub.add_parser("bench", help="Fidelity statistics over repeated trials")
    bench.add_argument("--trials", type=int, required=True)
    bench.add_argument("--shots", type=int, required=True)
    bench.add_argument("--scheme", choices=SCHEMES, default="direct")
    bench.add_argument("--dim", type=int, choices=[2, 4], default=4)
    bench.add_argument("--methods", nargs="+", choices=METHODS, default=["linear-projected", "mle"])
    bench.add_argument("--state-source", choices=["random-pure", "random-mixed"], default="random-pure")
    bench.add_argument("--jobs", type=int, default=1, help="Concurrent trials")
    bench.add_argument("--max-iter", type=int, default=MLE_MAX_ITER)
    bench.add_argument("--tol", type=float, default=MLE_TOL)

    dump = sub.add_parser("dump-circuit", help="Compiled unitary and Kraus matrices of a bench")
    target = dump.add_mutually_exclusive_group(required=True)
    target.add_argument("--bench", choices=sorted(BENCH_BUILDERS))
    target.add_argument("--circuit", help="Circuit description file (JSON)")
    dump.add_argument("--perturb", type=float, default=0.0, metavar="SIGMA", help="Phase drift in radians")
    return parser


def _resolve_seed(raw: Optional[str]) -> int:
    if raw is not None:
        return normalize_seed(raw)
    try:
        return get_default_seed()
    except ValueError as e:
        raise ConfigError("invalid environment", [str(e)])


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command

    Returns:
        0 on success, 1 on a failed check or a runtime error; argparse exits
        with 2 on usage errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        setup_logging(args.log_level)
    except ValueError as e:
        parser.error(str(e))

    try:
        args.seed = _resolve_seed(args.seed)
        output = HANDLERS[args.command](args)
        if args.format == "csv" and output.frame is not None:
            text = frame_to_csv(output.frame)
        else:
            text = dumps_json(output.payload)
        emit(text, args.output)
    except (SicBenchError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1

    if not output.ok:
        logger.error(f"{args.command}: one or more checks failed")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
