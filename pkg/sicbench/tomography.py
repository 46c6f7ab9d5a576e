#!/usr/bin/env python3
"""
sicbench Tomography

This module turns POM probabilities into detection data and data back into
states. It provides multinomial sampling, linear inversion through the SIC
reconstruction formula (checked against a generic least-squares inversion),
projection onto the physical state set, and iterative maximum-likelihood
estimation with the R rho R map.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigh

from config.config import MLE_MAX_ITER, MLE_TOL, PROBABILITY_CLAMP, PSD_TOL
from .exceptions import NegativeProbabilityError, NonSicPomError
from .quantum_core import (
    DensityMatrix,
    POM,
    born_probabilities,
    hermitize,
    state_fidelity,
    trace_distance,
)
from .random_streams import multinomial_counts
from .sic_structures import validate_sic

# Configure logging
logger = logging.getLogger(__name__)

SIC_CHECK_TOL = 1e-10
DISTRIBUTION_TOL = 1e-9
LIKELIHOOD_SLACK = 1e-12


class ReconstructionMethod(Enum):
    """Supported estimators"""
    LINEAR = "linear"
    LINEAR_PROJECTED = "linear-projected"
    MLE = "mle"


@dataclass
class CountRecord:
    """Detection counts per outcome label for one POM"""
    pom_id: str
    labels: List[str]
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.labels),):
            raise ValueError(f"{len(self.labels)} labels but counts of shape {self.counts.shape}")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> np.ndarray:
        if self.shots == 0:
            raise ValueError("frequencies of an empty record are undefined")
        return self.counts / self.shots

    def as_mapping(self) -> Dict[str, int]:
        return {label: int(c) for label, c in zip(self.labels, self.counts)}

    def to_dict(self) -> Dict[str, Any]:
        return {'pom': self.pom_id, 'shots': self.shots, 'counts': self.as_mapping()}


@dataclass
class MleOptions:
    """Stopping parameters of the R rho R iteration"""
    max_iter: int = MLE_MAX_ITER
    tol: float = MLE_TOL
    record_history: bool = False
    # off: only max |p - f| < tol or max_iter end the iteration
    stop_on_likelihood: bool = True


@dataclass
class ReconstructionResult:
    """Estimate plus convergence diagnostics and optional metrics against a known state"""
    method: ReconstructionMethod
    estimate: np.ndarray
    min_eigenvalue: float
    max_probability_deviation: float
    iterations: int = 0
    converged: bool = True
    log_likelihood_delta: Optional[float] = None
    diluted_steps: int = 0
    fidelity: Optional[float] = None
    trace_distance: Optional[float] = None
    elapsed_ms: Optional[float] = None
    log_likelihoods: List[float] = field(default_factory=list)

    @property
    def is_physical(self) -> bool:
        return self.min_eigenvalue >= -PSD_TOL


def outcome_distribution(rho: DensityMatrix, pom: POM) -> np.ndarray:
    """Born probabilities of every effect; sums to 1 within 1e-10"""
    p = born_probabilities(rho, pom)
    total = float(p.sum())
    if abs(total - 1.0) > 1e-10:
        raise NegativeProbabilityError(f"outcome probabilities sum to {total:.15g}")
    return p


def sample_counts(dist: Sequence[float], shots: int, rng_seed, labels: Optional[Sequence[str]] = None,
                  pom_id: str = "", batch_shots: Optional[int] = None) -> CountRecord:
    """
    Multinomial draw over a probability vector

    Args:
        dist: Probabilities summing to 1 within 1e-9
        shots: Number of shots (>= 0)
        rng_seed: Non-negative integer seed
        labels: Outcome labels; defaults to "1".."n"
        pom_id: Identifier copied into the record
        batch_shots: Override of the configured batch size

    Returns:
        CountRecord whose counts sum to shots
    """
    p = np.asarray(dist, dtype=float)
    if np.any(p < -PROBABILITY_CLAMP):
        raise NegativeProbabilityError(f"probability {p.min():.3e} is below the clamp tolerance")
    if abs(float(p.sum()) - 1.0) > DISTRIBUTION_TOL:
        raise ValueError(f"distribution sums to {p.sum():.15g}, not 1")
    if shots < 0:
        raise ValueError(f"shots must be non-negative, got {shots}")
    counts = multinomial_counts(np.clip(p, 0.0, None), shots, rng_seed, batch_shots)
    names = list(labels) if labels is not None else [str(j + 1) for j in range(len(p))]
    return CountRecord(pom_id, names, counts)


def _require_sic(pom: POM):
    report = validate_sic(pom, SIC_CHECK_TOL)
    if not report.passed:
        failed = ", ".join(check.name for check in report.failed_checks())
        raise NonSicPomError(f"POM {pom.name!r} is not a SIC POM (failed: {failed})")


def linear_inversion(freqs: Sequence[float], sic: POM, dim: Optional[int] = None) -> np.ndarray:
    """
    SIC reconstruction rho = sum_j ((d+1) f_j - 1/d) Pi_j with Pi_j = d E_j

    Args:
        freqs: Outcome frequencies, one per effect
        sic: SIC POM
        dim: Expected dimension; defaults to the POM's

    Returns:
        Hermitian unit-trace matrix, not necessarily positive
    """
    d = sic.dim if dim is None else dim
    if d != sic.dim:
        raise ValueError(f"dimension {d} does not match the POM dimension {sic.dim}")
    f = np.asarray(freqs, dtype=float)
    if f.shape != (d * d,):
        raise ValueError(f"expected {d * d} frequencies, got {f.shape}")
    _require_sic(sic)
    weights = (d + 1) * f - 1.0 / d
    return hermitize(np.einsum("j,jab->ab", weights, d * sic.stacked()))


def least_squares_inversion(freqs: Sequence[float], pom: POM) -> np.ndarray:
    """
    Least-squares solution of p_j = tr(E_j rho) for any informationally complete POM

    Each row of the probability map is conj(vec(E_j)), since tr(E rho) = vec(E^T) . vec(rho)
    and E is Hermitian.
    """
    f = np.asarray(freqs, dtype=float)
    d = pom.dim
    design = pom.stacked().conj().reshape(len(pom), d * d)
    solution, _, rank, _ = np.linalg.lstsq(design, f.astype(complex), rcond=None)
    if rank < d * d:
        logger.warning(f"probability map has rank {rank} < {d * d}; POM is not informationally complete")
    return hermitize(solution.reshape(d, d))


def project_to_physical(h: np.ndarray) -> DensityMatrix:
    """
    Closest density matrix in Frobenius norm to a Hermitian unit-trace matrix

    Eigenvalues are projected onto the probability simplex by walking up from
    the most negative one and spreading the accumulated deficit evenly over
    the ones that remain.
    """
    m = hermitize(np.asarray(h, dtype=complex))
    m = m / np.real(np.trace(m))
    eigvals, eigvecs = eigh(m)
    if eigvals[0] >= 0:
        projected = eigvals
    else:
        values = eigvals[::-1].copy()
        i = len(values)
        accumulator = 0.0
        while i > 0 and values[i - 1] + accumulator / float(i) < 0:
            accumulator += values[i - 1]
            i -= 1
        new = np.zeros_like(values)
        new[:i] = values[:i] + accumulator / float(i)
        projected = new[::-1]
    rho = (eigvecs * projected) @ eigvecs.conj().T
    return DensityMatrix(hermitize(rho / np.sum(projected)))


def _log_likelihood(f: np.ndarray, p: np.ndarray, mask: np.ndarray) -> float:
    return float(np.sum(f[mask] * np.log(np.maximum(p[mask], 1e-300))))


def mle_from_frequencies(freqs: Sequence[float], pom: POM,
                         opts: Optional[MleOptions] = None) -> ReconstructionResult:
    """
    Iterative maximum-likelihood estimate rho <- N(R rho R)

    R = sum_j (f_j / p_j) E_j over outcomes with f_j > 0. The iteration starts
    at I/d and stops when max_j |p_j - f_j| < tol, when the log-likelihood
    gain falls below tol (unless opts.stop_on_likelihood is off), or at
    max_iter (flagged as not converged). A step that would lower the
    log-likelihood by more than 1e-12 is replaced by the diluted map with
    (I + eps R) / (1 + eps), eps halved from 1.

    Args:
        freqs: Observed frequencies, summing to 1
        pom: Measurement
        opts: Stopping parameters

    Returns:
        ReconstructionResult with method MLE
    """
    opts = opts or MleOptions()
    f = np.asarray(freqs, dtype=float)
    effects = pom.stacked()
    d = pom.dim
    if f.shape != (len(pom),):
        raise ValueError(f"expected {len(pom)} frequencies, got {f.shape}")
    mask = f > 0
    identity = np.eye(d, dtype=complex)

    def probabilities(rho: np.ndarray) -> np.ndarray:
        return np.real(np.einsum("jab,ba->j", effects, rho))

    rho = identity / d
    p = probabilities(rho)
    log_l = _log_likelihood(f, p, mask)
    history = [log_l] if opts.record_history else []
    delta_l: Optional[float] = None
    diluted = 0
    converged = False
    iterations = 0

    while iterations < opts.max_iter:
        if np.max(np.abs(p - f)) < opts.tol:
            converged = True
            break
        r = np.einsum("j,jab->ab", f[mask] / np.maximum(p[mask], 1e-300), effects[mask])
        candidate = hermitize(r @ rho @ r)
        candidate /= np.real(np.trace(candidate))
        p_new = probabilities(candidate)
        log_new = _log_likelihood(f, p_new, mask)
        if log_new < log_l - LIKELIHOOD_SLACK:
            epsilon = 1.0
            while log_new < log_l - LIKELIHOOD_SLACK and epsilon > 1e-12:
                epsilon /= 2
                step = (identity + epsilon * r) / (1 + epsilon)
                candidate = hermitize(step @ rho @ step)
                candidate /= np.real(np.trace(candidate))
                p_new = probabilities(candidate)
                log_new = _log_likelihood(f, p_new, mask)
            diluted += 1
        iterations += 1
        delta_l = log_new - log_l
        rho, p, log_l = candidate, p_new, log_new
        if opts.record_history:
            history.append(log_l)
        if iterations % 1000 == 0:
            logger.debug(f"mle iteration {iterations}: log-likelihood {log_l:.12g}")
        if opts.stop_on_likelihood and delta_l < opts.tol:
            converged = True
            break

    if not converged:
        logger.warning(f"mle did not converge within {opts.max_iter} iterations")
    if diluted:
        logger.warning(f"mle used the diluted map on {diluted} step(s)")
    logger.info(f"mle finished after {iterations} iterations (converged={converged})")

    estimate = DensityMatrix(rho)
    return ReconstructionResult(
        method=ReconstructionMethod.MLE,
        estimate=estimate.matrix,
        min_eigenvalue=float(estimate.eigenvalues()[0]),
        max_probability_deviation=float(np.max(np.abs(p - f))),
        iterations=iterations,
        converged=converged,
        log_likelihood_delta=delta_l,
        diluted_steps=diluted,
        log_likelihoods=history,
    )


def mle_reconstruct(counts: CountRecord, pom: POM, opts: Optional[MleOptions] = None) -> ReconstructionResult:
    """Maximum-likelihood estimate from a count record (shots must be positive)"""
    if counts.shots <= 0:
        raise ValueError("maximum-likelihood reconstruction needs at least one shot")
    return mle_from_frequencies(counts.frequencies(), pom, opts)


def _attach_metrics(result: ReconstructionResult, truth: Optional[DensityMatrix]) -> ReconstructionResult:
    if truth is None:
        return result
    result.trace_distance = trace_distance(result.estimate, truth)
    if result.is_physical:
        try:
            result.fidelity = state_fidelity(truth, result.estimate)
        except ValueError:
            result.fidelity = None
    return result


def reconstruct(counts: CountRecord, pom: POM, method: Union[ReconstructionMethod, str],
                opts: Optional[MleOptions] = None, truth: Optional[DensityMatrix] = None,
                record_timing: bool = False) -> ReconstructionResult:
    """
    Run one estimator on a count record

    Args:
        counts: Detection counts
        pom: Measurement the counts came from
        method: linear, linear-projected or mle
        opts: MLE options
        truth: Known state for fidelity and trace distance
        record_timing: Store wall-clock milliseconds in the result

    Returns:
        ReconstructionResult
    """
    method = ReconstructionMethod(method)
    started = time.perf_counter()
    if method is ReconstructionMethod.MLE:
        result = mle_reconstruct(counts, pom, opts)
    else:
        freqs = counts.frequencies()
        linear = linear_inversion(freqs, pom)
        if method is ReconstructionMethod.LINEAR_PROJECTED:
            estimate = project_to_physical(linear).matrix
        else:
            estimate = linear
        p = np.real(np.einsum("jab,ba->j", pom.stacked(), estimate))
        result = ReconstructionResult(
            method=method,
            estimate=estimate,
            min_eigenvalue=float(np.linalg.eigvalsh(estimate)[0]),
            max_probability_deviation=float(np.max(np.abs(p - freqs))),
        )
    if record_timing:
        result.elapsed_ms = (time.perf_counter() - started) * 1000.0
    return _attach_metrics(result, truth)
