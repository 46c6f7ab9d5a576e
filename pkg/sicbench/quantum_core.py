#!/usr/bin/env python3
"""
sicbench Quantum Core

This module holds the numeric substrate of the package: immutable kets,
density matrices, effects and POMs over the small operator dimensions the
benches use, and the measurement calculus built on them (Born rule,
post-measurement update, fidelities and distances).

Two-qubit basis ordering is (|v,L>, |v,R>, |h,L>, |h,R>): polarization is the
first tensor factor, path the second.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg as sla

from config.config import (
    HERMITIAN_TOL,
    TRACE_TOL,
    NORM_TOL,
    PSD_TOL,
    COMPLETENESS_TOL,
    PROBABILITY_CLAMP,
    IMPOSSIBLE_OUTCOME,
    EIGENVALUE_FLOOR,
)
from .exceptions import (
    DimensionMismatchError,
    InvalidStateError,
    InvalidEffectError,
    InvalidPomError,
    NegativeProbabilityError,
    ImpossibleOutcomeError,
)

# Configure logging
logger = logging.getLogger(__name__)

SUPPORTED_DIMS = (2, 4, 8, 16)


def _frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only complex copy"""
    out = np.array(array, dtype=complex)
    out.flags.writeable = False
    return out


IDENTITY_2 = _frozen(np.eye(2))
SIGMA_1 = _frozen([[0, 1], [1, 0]])
SIGMA_2 = _frozen([[0, -1j], [1j, 0]])
SIGMA_3 = _frozen([[1, 0], [0, -1]])
HADAMARD = _frozen(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
PHASE_S = _frozen(np.diag([1, 1j]))
CZ = _frozen(np.diag([1, 1, 1, -1]))

Matrix = Union[np.ndarray, Sequence[Sequence[complex]]]


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """Symmetrize away round-off anti-Hermitian parts"""
    m = np.asarray(matrix, dtype=complex)
    return (m + m.conj().T) / 2


def _square(matrix: Matrix, what: str) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError(f"{what} must be a non-empty square matrix, got shape {m.shape}")
    return m


def _hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def _check_same_dim(a: int, b: int, operation: str):
    if a != b:
        raise DimensionMismatchError(f"{operation}: dimension {a} does not match dimension {b}")


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit vector; normalization is enforced at construction"""
    amplitudes: np.ndarray

    def __post_init__(self):
        vec = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if vec.size == 0:
            raise InvalidStateError("positive dimension")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError("unit norm", f"norm is {norm:.15g}")
        object.__setattr__(self, "amplitudes", _frozen(vec))

    @classmethod
    def normalized(cls, amplitudes: Sequence[complex]) -> "Ket":
        """Build a ket from any nonzero vector by rescaling it"""
        vec = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise InvalidStateError("nonzero vector")
        return cls(vec / norm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.projector())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace operator"""
    matrix: np.ndarray

    def __post_init__(self):
        m = _square(self.matrix, "DensityMatrix")
        dim = m.shape[0]
        if dim not in SUPPORTED_DIMS:
            raise InvalidStateError("supported dimension", f"dimension {dim} not in {SUPPORTED_DIMS}")
        residual = _hermiticity_residual(m)
        if residual > HERMITIAN_TOL:
            raise InvalidStateError("Hermitian", f"max |rho - rho^dagger| = {residual:.3e}")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > TRACE_TOL:
            raise InvalidStateError("unit trace", f"trace is {trace.real:.15g}{trace.imag:+.3e}j")
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -PSD_TOL:
            raise InvalidStateError("positive semidefinite", f"smallest eigenvalue {smallest:.3e}")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class Effect:
    """One positive operator of a POM, with its outcome label"""
    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = _square(self.matrix, "Effect")
        residual = _hermiticity_residual(m)
        if residual > HERMITIAN_TOL:
            raise InvalidEffectError(f"effect {self.label!r} is not Hermitian (residual {residual:.3e})")
        smallest = float(np.linalg.eigvalsh(m)[0])
        if smallest < -PSD_TOL:
            raise InvalidEffectError(f"effect {self.label!r} is not positive (smallest eigenvalue {smallest:.3e})")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))


@dataclass(frozen=True, eq=False)
class POM:
    """Ordered effects that sum to the identity"""
    effects: Tuple[Effect, ...]
    name: str = ""

    def __post_init__(self):
        effects = tuple(self.effects)
        if not effects:
            raise InvalidPomError("POM needs at least one effect")
        dims = {e.dim for e in effects}
        if len(dims) != 1:
            raise InvalidPomError(f"effects have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "effects", effects)
        residual = self.completeness_residual()
        if residual > COMPLETENESS_TOL:
            raise InvalidPomError(f"effects do not sum to the identity (max deviation {residual:.3e})")

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    @property
    def labels(self) -> List[str]:
        return [e.label for e in self.effects]

    def stacked(self) -> np.ndarray:
        """Effects as one (n, d, d) array"""
        return np.stack([e.matrix for e in self.effects])

    def completeness_residual(self) -> float:
        total = np.sum([e.matrix for e in self.effects], axis=0)
        return float(np.max(np.abs(total - np.eye(total.shape[0]))))

    def __len__(self) -> int:
        return len(self.effects)

    def __iter__(self) -> Iterator[Effect]:
        return iter(self.effects)

    def __getitem__(self, index: int) -> Effect:
        return self.effects[index]


def as_density(state: Union[DensityMatrix, Ket, Matrix]) -> DensityMatrix:
    """Coerce a ket, a raw matrix or a density matrix into a validated DensityMatrix"""
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, Ket):
        return state.to_density()
    return DensityMatrix(np.asarray(state, dtype=complex))


def tensor(a: Matrix, b: Matrix) -> np.ndarray:
    """Kronecker product; the dimension is the product of dimensions"""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def clamp_probability(p: float) -> float:
    """Map round-off negatives in [-1e-12, 0) to 0; reject anything below"""
    if p < 0.0:
        if p >= -PROBABILITY_CLAMP:
            return 0.0
        raise NegativeProbabilityError(f"probability {p:.3e} is below the clamp tolerance")
    if p > 1.0 and p <= 1.0 + PROBABILITY_CLAMP:
        return 1.0
    return p


def born_probability(rho: DensityMatrix, e: Effect) -> float:
    """
    Born rule p = Re tr(e rho)

    Args:
        rho: System state
        e: Effect with the same dimension

    Returns:
        Probability in [0, 1]
    """
    _check_same_dim(rho.dim, e.dim, "born_probability")
    p = float(np.real(np.trace(e.matrix @ rho.matrix)))
    return clamp_probability(p)


def born_probabilities(rho: DensityMatrix, pom: POM) -> np.ndarray:
    """Vectorized Born rule over every effect of a POM"""
    _check_same_dim(rho.dim, pom.dim, "born_probabilities")
    raw = np.real(np.einsum("jab,ba->j", pom.stacked(), rho.matrix))
    if np.any(raw < -PROBABILITY_CLAMP):
        worst = float(raw.min())
        raise NegativeProbabilityError(f"probability {worst:.3e} is below the clamp tolerance")
    return np.clip(raw, 0.0, 1.0)


def post_measurement_state(rho: DensityMatrix, kraus: Matrix) -> Tuple[DensityMatrix, float]:
    """
    State update K rho K^dagger / p for one Kraus operator

    Args:
        rho: Pre-measurement state
        kraus: Kraus operator whose column count equals rho's dimension

    Returns:
        Tuple of (post-measurement state, outcome probability)
    """
    k = np.asarray(kraus, dtype=complex)
    if k.ndim != 2:
        raise DimensionMismatchError(f"Kraus operator must be a matrix, got shape {k.shape}")
    _check_same_dim(k.shape[1], rho.dim, "post_measurement_state")
    unnormalized = k @ rho.matrix @ k.conj().T
    p = float(np.real(np.trace(unnormalized)))
    if p <= IMPOSSIBLE_OUTCOME:
        raise ImpossibleOutcomeError(p)
    return DensityMatrix(hermitize(unnormalized / p)), min(p, 1.0)


def fidelity_pure(a: Ket, b: Ket) -> float:
    """|<a|b>|^2"""
    _check_same_dim(a.dim, b.dim, "fidelity_pure")
    return min(float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2), 1.0)


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    """Square root of a PSD matrix; eigenvalues at or below the floor count as zero"""
    w, v = sla.eigh(hermitize(m))
    w = np.where(w > EIGENVALUE_FLOOR, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def state_fidelity(a: Union[DensityMatrix, Matrix], b: Union[DensityMatrix, Matrix]) -> float:
    """
    Uhlmann fidelity (tr sqrt(sqrt(a) b sqrt(a)))^2

    Evaluated as the squared nuclear norm of sqrt(a) sqrt(b), which is
    symmetric in its arguments. Raw matrices are validated as density
    matrices first, so non-PSD input raises InvalidStateError.
    """
    rho_a = as_density(a)
    rho_b = as_density(b)
    _check_same_dim(rho_a.dim, rho_b.dim, "state_fidelity")
    singular = np.linalg.svd(_psd_sqrt(rho_a.matrix) @ _psd_sqrt(rho_b.matrix), compute_uv=False)
    return min(float(np.sum(singular) ** 2), 1.0)


def projector_distance(a: Ket, b: Ket) -> float:
    """Frobenius norm of |a><a| - |b><b|; zero iff equal up to global phase"""
    _check_same_dim(a.dim, b.dim, "projector_distance")
    return float(np.linalg.norm(a.projector() - b.projector()))


def phase_invariant_distance(a: Matrix, b: Matrix) -> float:
    """min over phi of ||a - exp(i phi) b||_F"""
    ma = np.asarray(a, dtype=complex)
    mb = np.asarray(b, dtype=complex)
    if ma.shape != mb.shape:
        raise DimensionMismatchError(f"shapes {ma.shape} and {mb.shape} differ")
    overlap = np.vdot(mb, ma)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(ma - phase * mb))


def trace_distance(a: Union[DensityMatrix, Matrix], b: Union[DensityMatrix, Matrix]) -> float:
    """Half the trace norm of a - b; accepts non-PSD Hermitian estimates"""
    ma = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a, dtype=complex)
    mb = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b, dtype=complex)
    if ma.shape != mb.shape:
        raise DimensionMismatchError(f"shapes {ma.shape} and {mb.shape} differ")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(ma - mb)))))


def partial_trace(rho: Union[DensityMatrix, Matrix], keep: int) -> np.ndarray:
    """
    Reduced state of one qubit of a two-qubit operator

    Args:
        rho: 4x4 operator in (polarization, path) ordering
        keep: 0 keeps the polarization qubit, 1 keeps the path qubit
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (4, 4):
        raise DimensionMismatchError(f"partial_trace expects a 4x4 operator, got {m.shape}")
    t = m.reshape(2, 2, 2, 2)
    if keep == 0:
        return np.einsum("abcb->ac", t)
    if keep == 1:
        return np.einsum("abad->bd", t)
    raise ValueError(f"keep must be 0 or 1, got {keep}")


def random_pure_state(dim: int, rng: np.random.Generator) -> Ket:
    """Normalized complex Gaussian vector (unitarily invariant)"""
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Ket.normalized(vec)


def random_mixed_state(dim: int, rng: np.random.Generator) -> DensityMatrix:
    """G G^dagger / tr for a square complex Gaussian G"""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    return DensityMatrix(hermitize(m / np.real(np.trace(m))))


def is_unitary(matrix: Matrix, tol: float) -> bool:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))) <= tol
