#!/usr/bin/env python3
"""
sicbench Experiment Runner

This module runs end-to-end tomography experiments: resolve the true state,
build the measurement for the chosen scheme, confirm that the direct,
two-step and optical realizations give the same outcome distribution,
sample detection counts and reconstruct the state with each requested
method. It also runs repeated trials for fidelity statistics.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .exceptions import SchemeMismatchError
from .file_io import (
    load_state,
    matrix_to_rows,
    reconstruction_to_record,
)
from .optical_bench import full_bench_pom, tetrahedron_bench_pom
from .quantum_core import DensityMatrix, POM, random_mixed_state, random_pure_state
from .random_streams import make_generator, spawn_seeds
from .schemas import ExperimentConfigModel, StateSourceModel, parse_model
from .sic_structures import sic_pom
from .successive_measurement import (
    compose_two_step,
    match_effects,
    sample_sequential,
    two_step_scheme_d2,
    two_step_scheme_d4,
)
from .tomography import (
    CountRecord,
    MleOptions,
    ReconstructionResult,
    outcome_distribution,
    reconstruct,
    sample_counts,
)

# Configure logging
logger = logging.getLogger(__name__)

SCHEMES = ("direct", "two-step", "optical")
SCHEME_AGREEMENT_TOL = 1e-10


def two_step_scheme(dim: int):
    return two_step_scheme_d4() if dim == 4 else two_step_scheme_d2()


def scheme_pom(scheme: str, dim: int) -> POM:
    """
    Measurement realized by a scheme

    Args:
        scheme: direct, two-step or optical
        dim: 2 or 4

    Returns:
        direct: the SIC POM with (matrix, column) labels in dimension 4;
        two-step: the composed POM with (port, result) labels;
        optical: the detector POM of the simulated bench
    """
    if dim not in (2, 4):
        raise ValueError(f"experiments support dimensions 2 and 4, got {dim}")
    if scheme == "direct":
        return sic_pom(dim)
    if scheme == "two-step":
        return compose_two_step(two_step_scheme(dim))
    if scheme == "optical":
        return full_bench_pom() if dim == 4 else tetrahedron_bench_pom()
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def scheme_agreement(rho: DensityMatrix) -> Dict[str, float]:
    """
    Max probability difference of each scheme against the direct SIC POM,
    after matching effects by projector distance

    Raises:
        SchemeMismatchError: effects cannot be matched or distributions differ
    """
    direct = scheme_pom("direct", rho.dim)
    p_direct = outcome_distribution(rho, direct)
    index = {label: j for j, label in enumerate(direct.labels)}
    result = {}
    for scheme in SCHEMES:
        pom = scheme_pom(scheme, rho.dim)
        match = match_effects(pom, direct, SCHEME_AGREEMENT_TOL)
        if not match.passed:
            raise SchemeMismatchError(f"{scheme} POM does not match the SIC POM "
                                      f"(unmatched={match.unmatched}, duplicated={match.duplicated})")
        p = outcome_distribution(rho, pom)
        labels = pom.labels
        diff = max(abs(p[labels.index(label)] - p_direct[index[ref]]) for label, ref, _ in match.pairs)
        if diff > SCHEME_AGREEMENT_TOL:
            raise SchemeMismatchError(f"{scheme} distribution differs from the direct one by {diff:.3e}")
        result[scheme] = float(diff)
    return result


def resolve_state(source: StateSourceModel, seed: int) -> DensityMatrix:
    """True state of an experiment; random states draw from ``seed``"""
    if source.source == "file":
        return load_state(source.path)
    rng = make_generator(seed)
    if source.source == "random-pure":
        return random_pure_state(source.dim, rng).to_density()
    return random_mixed_state(source.dim, rng)


def simulate_counts(rho: DensityMatrix, scheme: str, shots: int, seed) -> CountRecord:
    """
    Detection counts for one scheme

    direct and optical draw one multinomial over the POM; two-step samples
    the sequential cascade through the post-measurement states.
    """
    pom = scheme_pom(scheme, rho.dim)
    if scheme == "two-step":
        counts = sample_sequential(rho, two_step_scheme(rho.dim), shots, seed)
        return CountRecord(pom.name, [str(label) for label in counts], np.array(list(counts.values())))
    return sample_counts(outcome_distribution(rho, pom), shots, seed, labels=pom.labels, pom_id=pom.name)


@dataclass
class ExperimentReport:
    """Everything one experiment produced, in a fixed order"""
    config: Dict[str, Any]
    true_state: DensityMatrix
    pom_id: str
    labels: List[str]
    probabilities: np.ndarray
    scheme_agreement: Dict[str, float]
    counts: CountRecord
    results: List[ReconstructionResult] = field(default_factory=list)

    def result(self, method: str) -> ReconstructionResult:
        for item in self.results:
            if item.method.value == method:
                return item
        raise KeyError(method)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'config': self.config,
            'true_state': matrix_to_rows(self.true_state.matrix),
            'pom': self.pom_id,
            'probabilities': {label: float(p) for label, p in zip(self.labels, self.probabilities)},
            'scheme_agreement': self.scheme_agreement,
            'counts': self.counts.to_dict(),
            'reconstructions': [reconstruction_to_record(r) for r in self.results],
        }


def run_experiment(cfg: Union[ExperimentConfigModel, Dict[str, Any]]) -> ExperimentReport:
    """
    Deterministic end-to-end experiment

    Args:
        cfg: Parsed configuration or a raw dictionary (validated here)

    Returns:
        ExperimentReport
    """
    if not isinstance(cfg, ExperimentConfigModel):
        cfg = parse_model(ExperimentConfigModel, cfg, "experiment configuration")
    state_seed, sample_seed = spawn_seeds(cfg.seed, 2)
    rho = resolve_state(cfg.state, state_seed)
    logger.info(f"experiment: scheme={cfg.scheme} dim={rho.dim} shots={cfg.shots} seed={cfg.seed}")

    agreement = scheme_agreement(rho)
    pom = scheme_pom(cfg.scheme, rho.dim)
    probabilities = outcome_distribution(rho, pom)
    counts = simulate_counts(rho, cfg.scheme, cfg.shots, sample_seed)

    opts = MleOptions(max_iter=cfg.mle.max_iter, tol=cfg.mle.tol)
    results = []
    if cfg.shots > 0:
        for method in cfg.methods:
            results.append(reconstruct(counts, pom, method, opts, truth=rho, record_timing=cfg.record_timing))
    else:
        logger.warning("no shots requested; skipping reconstruction")

    return ExperimentReport(
        config=cfg.model_dump(mode="json"),
        true_state=rho,
        pom_id=pom.name,
        labels=pom.labels,
        probabilities=probabilities,
        scheme_agreement=agreement,
        counts=counts,
        results=results,
    )


def _trial(args) -> Dict[str, Optional[float]]:
    config, trial_seed = args
    report = run_experiment({**config, 'seed': trial_seed})
    return {r.method.value: r.fidelity for r in report.results}


def run_bench(trials: int, shots: int, seed: int, scheme: str = "direct", dim: int = 4,
              methods: Sequence[str] = ("linear-projected", "mle"), state_source: str = "random-pure",
              mle: Optional[Dict[str, Any]] = None, jobs: int = 1) -> Dict[str, Any]:
    """
    Repeated experiments on fresh random states

    Trial i uses the i-th seed spawned from ``seed``, so results do not depend
    on ``jobs``.

    Returns:
        Per-method fidelity statistics (median, quartiles, mean, min, max)
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive, got {trials}")
    config = {
        'state': {'source': state_source, 'dim': dim},
        'scheme': scheme,
        'shots': shots,
        'methods': list(methods),
    }
    if mle:
        config['mle'] = dict(mle)
    seeds = spawn_seeds(seed, trials)
    logger.info(f"bench: {trials} trials x {shots} shots, scheme={scheme}, jobs={jobs}")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rows = list(pool.map(_trial, [(config, s) for s in seeds]))

    frame = pd.DataFrame(rows, columns=list(methods))
    summary = {}
    for method in methods:
        values = frame[method].dropna().astype(float)
        summary[method] = {
            'trials': int(values.size),
            'median': float(values.median()) if values.size else None,
            'q1': float(values.quantile(0.25)) if values.size else None,
            'q3': float(values.quantile(0.75)) if values.size else None,
            'mean': float(values.mean()) if values.size else None,
            'min': float(values.min()) if values.size else None,
            'max': float(values.max()) if values.size else None,
        }
    return {
        'trials': trials,
        'shots': shots,
        'scheme': scheme,
        'dim': dim,
        'seed': seed,
        'fidelity': summary,
    }
