#!/usr/bin/env python3
"""
sicbench Successive Measurement

This module implements a SIC POM as two measurements in sequence: a first
measurement with diagonal, full-rank Kraus operators, followed by a
projective measurement in a basis chosen by the first outcome. It composes
the pair into a single POM, matches that POM against the fiducial set, and
samples the cascade shot by shot.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.config import IMPOSSIBLE_OUTCOME
from .exceptions import DimensionMismatchError, InvalidKrausSetError, InvalidPomError, ImpossibleOutcomeError
from .quantum_core import DensityMatrix, Effect, POM, clamp_probability, post_measurement_state
from .random_streams import run_batched
from .sic_structures import CHI, N_SIC, FiducialSet, mub_unitary
from .validation import ValidationReport

# Configure logging
logger = logging.getLogger(__name__)

KRAUS_TOL = 1e-12

# Tetrahedron beam-splitter amplitudes: t1 = r2, t2 = r1
TETRA_T1 = float(np.sqrt(0.5 - 1.0 / np.sqrt(12.0)))
TETRA_T2 = float(np.sqrt(0.5 + 1.0 / np.sqrt(12.0)))


@dataclass(frozen=True, order=True)
class OutcomeLabel:
    """Overall outcome (port n, result m), both 1-based"""
    port: int
    result: int

    def __str__(self) -> str:
        return f"{self.port},{self.result}"

    @classmethod
    def parse(cls, text: str) -> "OutcomeLabel":
        try:
            port, result = (int(part) for part in str(text).split(","))
        except ValueError:
            raise ValueError(f"outcome label must look like 'port,result', got {text!r}")
        if port < 1 or result < 1:
            raise ValueError(f"outcome label indices are 1-based, got {text!r}")
        return cls(port, result)


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Kraus operators of one measurement; completeness sum A^dagger A = I"""
    operators: Tuple[np.ndarray, ...]
    tol: float = KRAUS_TOL

    def __post_init__(self):
        ops = tuple(np.array(op, dtype=complex) for op in self.operators)
        if not ops:
            raise InvalidKrausSetError("a Kraus set needs at least one operator")
        shapes = {op.shape for op in ops}
        if len(shapes) != 1 or any(len(s) != 2 for s in shapes):
            raise DimensionMismatchError(f"Kraus operators have inconsistent shapes {sorted(shapes)}")
        for op in ops:
            op.flags.writeable = False
        object.__setattr__(self, "operators", ops)
        residual = self.completeness_residual()
        if residual > self.tol:
            raise InvalidKrausSetError(f"sum of A^dagger A deviates from identity by {residual:.3e}")

    @property
    def dim(self) -> int:
        return self.operators[0].shape[1]

    def __len__(self) -> int:
        return len(self.operators)

    def effects(self) -> List[np.ndarray]:
        return [op.conj().T @ op for op in self.operators]

    def completeness_residual(self) -> float:
        total = np.sum(self.effects(), axis=0)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def rotated(self, unitaries: Sequence[np.ndarray]) -> "KrausSet":
        """U_k A_k for each k; the effects are unchanged"""
        if len(unitaries) != len(self.operators):
            raise DimensionMismatchError("one unitary per Kraus operator is required")
        return KrausSet(tuple(np.asarray(u) @ op for u, op in zip(unitaries, self.operators)), self.tol)


@dataclass(frozen=True, eq=False)
class TwoStepScheme:
    """
    First-stage Kraus set plus one conditional basis per first-stage outcome

    Each conditional basis is a unitary matrix whose columns are the basis kets.
    """
    first: KrausSet
    conditional_bases: Tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        bases = tuple(np.array(b, dtype=complex) for b in self.conditional_bases)
        if len(bases) != len(self.first):
            raise DimensionMismatchError(
                f"{len(self.first)} first-stage outcomes but {len(bases)} conditional bases")
        out_dim = self.first.operators[0].shape[0]
        for k, basis in enumerate(bases, start=1):
            if basis.shape != (out_dim, out_dim):
                raise DimensionMismatchError(f"conditional basis {k} has shape {basis.shape}, expected {(out_dim, out_dim)}")
            residual = float(np.max(np.abs(basis.conj().T @ basis - np.eye(out_dim))))
            if residual > KRAUS_TOL:
                raise InvalidPomError(f"conditional basis {k} is not orthonormal (residual {residual:.3e})")
            basis.flags.writeable = False
        object.__setattr__(self, "conditional_bases", bases)

    @property
    def dim(self) -> int:
        return self.first.dim

    def labels(self) -> List[OutcomeLabel]:
        """Lexicographic (port, result) order"""
        return [OutcomeLabel(n + 1, m + 1)
                for n in range(len(self.first))
                for m in range(self.conditional_bases[n].shape[1])]


def kraus_first_stage_d4() -> KrausSet:
    """A_k = diag(1,..,chi,..,1)/N with chi in position k"""
    operators = []
    for k in range(4):
        diagonal = np.ones(4)
        diagonal[k] = CHI
        operators.append(np.diag(diagonal / N_SIC))
    return KrausSet(tuple(operators))


def kraus_first_stage_d2() -> KrausSet:
    """A_1 = diag(t1, t2), A_2 = diag(r1, r2) of the tetrahedron stage"""
    return KrausSet((np.diag([TETRA_T1, TETRA_T2]), np.diag([TETRA_T2, TETRA_T1])))


def two_step_scheme_d4() -> TwoStepScheme:
    return TwoStepScheme(kraus_first_stage_d4(), tuple(mub_unitary(k) for k in range(1, 5)), name="two-step-4")


def two_step_scheme_d2() -> TwoStepScheme:
    """Port 1 measured in the sigma_1 eigenbasis, port 2 in the sigma_2 eigenbasis"""
    sigma_1_basis = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    sigma_2_basis = np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2)
    return TwoStepScheme(kraus_first_stage_d2(), (sigma_1_basis, sigma_2_basis), name="two-step-2")


def compose_two_step(scheme: TwoStepScheme) -> POM:
    """
    Single POM equivalent to the two-step scheme

    Args:
        scheme: First-stage Kraus set and conditional bases

    Returns:
        POM with effects A_n^dagger |b_m><b_m| A_n labeled "n,m"
    """
    effects = []
    for n, (op, basis) in enumerate(zip(scheme.first.operators, scheme.conditional_bases), start=1):
        for m in range(basis.shape[1]):
            w = op.conj().T @ basis[:, m]
            effects.append(Effect(np.outer(w, w.conj()), str(OutcomeLabel(n, m + 1))))
    return POM(tuple(effects), name=scheme.name or "two-step")


@dataclass
class MatchReport:
    """Result of matching the effects of one POM onto those of a reference"""
    pairs: List[Tuple[str, str, float]] = field(default_factory=list)
    unmatched: List[str] = field(default_factory=list)
    duplicated: List[str] = field(default_factory=list)
    tol: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.unmatched and not self.duplicated and bool(self.pairs)

    @property
    def max_distance(self) -> float:
        return max((d for _, _, d in self.pairs), default=float("inf"))

    def mapping(self) -> Dict[str, str]:
        return {label: ref for label, ref, _ in self.pairs}

    def port_to_matrix(self) -> Dict[int, Optional[int]]:
        """
        Which fiducial matrix each first-stage port maps onto

        A port maps to None when its effects land on more than one matrix.
        """
        groups: Dict[int, set] = {}
        for label, ref, _ in self.pairs:
            port = OutcomeLabel.parse(label).port
            matrix = OutcomeLabel.parse(ref).port
            groups.setdefault(port, set()).add(matrix)
        return {port: (next(iter(ms)) if len(ms) == 1 else None) for port, ms in sorted(groups.items())}

    def to_report(self, subject: str) -> ValidationReport:
        report = ValidationReport(subject=subject)
        report.add("all effects matched once", len(self.unmatched) + len(self.duplicated), 0,
                   detail=f"unmatched={self.unmatched} duplicated={self.duplicated}")
        report.add("max projector distance", self.max_distance, self.tol)
        report.data['mapping'] = self.mapping()
        return report


def _normalized_stack(pom: POM) -> np.ndarray:
    stacked = pom.stacked()
    traces = np.real(np.einsum("jaa->j", stacked))
    return stacked / traces[:, None, None]


def match_effects(pom: POM, reference: POM, tol: float) -> MatchReport:
    """
    Match each effect of ``pom`` to the unique reference effect whose
    trace-normalized operator lies within ``tol`` in Frobenius norm
    """
    report = MatchReport(tol=tol)
    if pom.dim != reference.dim:
        report.unmatched = pom.labels
        return report
    a = _normalized_stack(pom)
    b = _normalized_stack(reference)
    distances = np.linalg.norm((a[:, None, :, :] - b[None, :, :, :]).reshape(len(pom), len(reference), -1), axis=2)
    used: Dict[int, str] = {}
    for i, label in enumerate(pom.labels):
        candidates = np.flatnonzero(distances[i] < tol)
        if len(candidates) != 1:
            report.unmatched.append(label)
            continue
        j = int(candidates[0])
        if j in used:
            report.duplicated.append(label)
            continue
        used[j] = label
        report.pairs.append((label, reference.labels[j], float(distances[i, j])))
    if len(pom) != len(reference):
        report.unmatched.extend(reference.labels[j] for j in range(len(reference)) if j not in used)
    return report


def match_to_sic(pom16: POM, fid: FiducialSet, tol: float = 1e-12) -> MatchReport:
    """Match a 16-outcome POM onto the fiducial projectors"""
    reference = POM(tuple(Effect(ket.projector() / 4, f"{m},{c}") for (m, c), ket in fid), name="fiducials")
    report = match_effects(pom16, reference, tol)
    logger.info(f"match_to_sic: passed={report.passed} max distance={report.max_distance:.3e}")
    return report


def chain_probability(rho: DensityMatrix, scheme: TwoStepScheme, n: int, m: int) -> float:
    """Sequential Born chain p(n) p(m|n) through the post-measurement state"""
    try:
        post, p_port = post_measurement_state(rho, scheme.first.operators[n - 1])
    except ImpossibleOutcomeError:
        return 0.0
    b = scheme.conditional_bases[n - 1][:, m - 1]
    p_result = clamp_probability(float(np.real(np.vdot(b, post.matrix @ b))))
    return p_port * p_result


def sample_sequential(rho: DensityMatrix, scheme: TwoStepScheme, shots: int, rng_seed,
                      batch_shots: Optional[int] = None) -> Dict[OutcomeLabel, int]:
    """
    Sample the two-stage cascade

    Each batch draws the port counts from p(n) = tr(rho A_n^dagger A_n), then for
    each port draws the results from the renormalized post-measurement state.

    Args:
        rho: Input state
        scheme: Two-step scheme
        shots: Number of shots (>= 0)
        rng_seed: Non-negative integer seed
        batch_shots: Override of the configured batch size

    Returns:
        Counts keyed by OutcomeLabel in lexicographic order
    """
    if shots < 0:
        raise ValueError(f"shots must be non-negative, got {shots}")
    if rho.dim != scheme.dim:
        raise DimensionMismatchError(f"state dimension {rho.dim} does not match scheme dimension {scheme.dim}")

    n_ports = len(scheme.first)
    port_probs = np.zeros(n_ports)
    conditional: List[Optional[np.ndarray]] = []
    for n, op in enumerate(scheme.first.operators):
        try:
            post, p = post_measurement_state(rho, op)
        except ImpossibleOutcomeError:
            conditional.append(None)
            continue
        if p <= IMPOSSIBLE_OUTCOME:
            conditional.append(None)
            continue
        port_probs[n] = p
        basis = scheme.conditional_bases[n]
        probs = np.array([clamp_probability(float(np.real(np.vdot(basis[:, m], post.matrix @ basis[:, m]))))
                          for m in range(basis.shape[1])])
        conditional.append(probs / probs.sum())
    port_probs = port_probs / port_probs.sum()
    widths = [b.shape[1] for b in scheme.conditional_bases]
    offsets = np.concatenate([[0], np.cumsum(widths)])

    def draw(rng: np.random.Generator, size: int) -> np.ndarray:
        out = np.zeros(offsets[-1], dtype=np.int64)
        per_port = rng.multinomial(size, port_probs)
        for n, count in enumerate(per_port):
            if count == 0 or conditional[n] is None:
                continue
            out[offsets[n]:offsets[n + 1]] = rng.multinomial(count, conditional[n])
        return out

    counts = run_batched(rng_seed, shots, draw, int(offsets[-1]), batch_shots)
    logger.debug(f"sample_sequential: {shots} shots over {n_ports} ports")
    return {label: int(c) for label, c in zip(scheme.labels(), counts)}
