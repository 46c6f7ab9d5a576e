#!/usr/bin/env python3
"""
sicbench SIC Structures

This module constructs the symmetric informationally complete POMs used by
the package (the qubit tetrahedron and the two-qubit SIC POM), the complete
set of five mutually unbiased bases in dimension 4, and the validators that
check their defining properties.

Fiducial kets are indexed (matrix, column) in the reading order of the four
fiducial matrices: top-left 1, top-right 2, bottom-left 3, bottom-right 4.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .exceptions import DimensionMismatchError, InvalidStateError
from .quantum_core import (
    CZ,
    DensityMatrix,
    Effect,
    HADAMARD,
    IDENTITY_2,
    Ket,
    PHASE_S,
    POM,
    SIGMA_1,
    SIGMA_2,
    SIGMA_3,
    tensor,
)
from .validation import ValidationReport

# Configure logging
logger = logging.getLogger(__name__)

# N^2 = 5 + sqrt(5), chi^2 = 2 + sqrt(5), so chi^2 + 3 = N^2
N_SIC = float(np.sqrt(5.0 + np.sqrt(5.0)))
CHI = float(np.sqrt(2.0 + np.sqrt(5.0)))


def fiducial_matrices() -> List[np.ndarray]:
    """The four 4x4 fiducial matrices; their columns are the fiducial kets"""
    c = CHI
    i = 1j
    raw = [
        [[c, c, c, c],
         [1, -1, 1, -1],
         [1, 1, -1, -1],
         [1, -1, -1, 1]],
        [[1, 1, 1, 1],
         [1, -1, 1, -1],
         [i * c, i * c, -i * c, -i * c],
         [-i, i, i, -i]],
        [[1, 1, 1, 1],
         [i * c, -i * c, i * c, -i * c],
         [i, i, -i, -i],
         [-1, 1, 1, -1]],
        [[1, 1, 1, 1],
         [i, -i, i, -i],
         [1, 1, -1, -1],
         [-i * c, i * c, i * c, -i * c]],
    ]
    return [np.array(m, dtype=complex) / N_SIC for m in raw]


@dataclass(frozen=True, eq=False)
class FiducialSet:
    """The 16 fiducial kets keyed by (matrix, column), both 1-based"""
    kets: Tuple[Tuple[Tuple[int, int], Ket], ...]

    def __iter__(self) -> Iterator[Tuple[Tuple[int, int], Ket]]:
        return iter(self.kets)

    def __len__(self) -> int:
        return len(self.kets)


def fiducial_kets() -> FiducialSet:
    """
    Build the fiducial set

    Returns:
        FiducialSet in (matrix, column) lexicographic order
    """
    entries = []
    for m, matrix in enumerate(fiducial_matrices(), start=1):
        for c in range(4):
            entries.append(((m, c + 1), Ket(matrix[:, c])))
    return FiducialSet(tuple(entries))


def mub_unitary(k: int) -> np.ndarray:
    """The unitary whose columns are the k-th mutually unbiased basis (k = 1..4)"""
    i = 1j
    raw = {
        1: [[1, 1, 1, 1],
            [1, -1, 1, -1],
            [1, 1, -1, -1],
            [1, -1, -1, 1]],
        2: [[1, 1, 1, 1],
            [i, -i, i, -i],
            [i, i, -i, -i],
            [-1, 1, 1, -1]],
        3: [[1, 1, 1, 1],
            [1, -1, 1, -1],
            [i, i, -i, -i],
            [-i, i, i, -i]],
        4: [[1, 1, 1, 1],
            [i, -i, i, -i],
            [1, 1, -1, -1],
            [-i, i, i, -i]],
    }
    if k not in raw:
        raise ValueError(f"basis index must be in 1..4, got {k}")
    return np.array(raw[k], dtype=complex) / 2


def basis_from_unitary(k: int) -> List[Ket]:
    """Columns of mub_unitary(k) as kets"""
    u = mub_unitary(k)
    return [Ket(u[:, j]) for j in range(u.shape[1])]


@dataclass(frozen=True, eq=False)
class MubCollection:
    """Ordered orthonormal bases with display names"""
    bases: Tuple[Tuple[Ket, ...], ...]
    names: Tuple[str, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.names):
            raise ValueError("every basis needs a name")

    def __len__(self) -> int:
        return len(self.bases)

    def basis(self, name: str) -> Tuple[Ket, ...]:
        return self.bases[self.names.index(name)]

    def matrix(self, index: int) -> np.ndarray:
        """Kets of basis ``index`` as matrix columns"""
        return np.column_stack([ket.amplitudes for ket in self.bases[index]])


def _qubit_pair(sign: complex) -> List[np.ndarray]:
    return [np.array([1, sign], dtype=complex) / np.sqrt(2),
            np.array([1, -sign], dtype=complex) / np.sqrt(2)]


def _product_basis(first: Sequence[np.ndarray], second: Sequence[np.ndarray],
                   entangler: np.ndarray = None) -> Tuple[Ket, ...]:
    kets = []
    for a in first:
        for b in second:
            vec = np.kron(a, b)
            if entangler is not None:
                vec = entangler @ vec
            kets.append(Ket(vec))
    return tuple(kets)


def mub_bases() -> MubCollection:
    """
    Computational basis plus the four bases built from product kets

    The first two are product bases; the last two apply CZ to product kets
    and consist of maximally entangled states.
    """
    plus_minus = _qubit_pair(1)
    plus_minus_i = _qubit_pair(1j)
    computational = tuple(Ket(col) for col in np.eye(4, dtype=complex))
    bases = (
        computational,
        _product_basis(plus_minus, plus_minus),
        _product_basis(plus_minus_i, plus_minus_i),
        _product_basis(plus_minus_i, plus_minus, np.asarray(CZ)),
        _product_basis(plus_minus, plus_minus_i, np.asarray(CZ)),
    )
    return MubCollection(bases, ("computational", "B1", "B2", "B3", "B4"))


def sic_pom(dim: int) -> POM:
    """
    SIC POM in dimension 2 or 4

    Args:
        dim: 4 for the fiducial-set POM, 2 for the tetrahedron assembled from
            the two-step scheme

    Returns:
        POM with dim^2 effects
    """
    if dim == 4:
        effects = tuple(
            Effect(ket.projector() / 4, f"{m},{c}") for (m, c), ket in fiducial_kets()
        )
        return POM(effects, name="sic-4")
    if dim == 2:
        # The tetrahedron is defined by its two-step construction
        from .successive_measurement import compose_two_step, two_step_scheme_d2
        pom = compose_two_step(two_step_scheme_d2())
        return POM(pom.effects, name="sic-2")
    raise DimensionMismatchError(f"no SIC POM is provided for dimension {dim}")


def validate_sic(pom: POM, tol: float = 1e-12) -> ValidationReport:
    """
    Check the SIC defining properties of a POM

    Args:
        pom: Candidate POM
        tol: Tolerance for every check

    Returns:
        ValidationReport with outcome count, completeness, rank-1, trace and
        pairwise-fidelity checks
    """
    d = pom.dim
    report = ValidationReport(subject=pom.name or f"pom-{d}")
    stacked = pom.stacked()

    report.add("outcome count", abs(len(pom) - d * d), 0,
               detail=f"{len(pom)} effects, expected {d * d}")
    report.add("completeness", pom.completeness_residual(), tol)

    eigenvalues = np.linalg.eigvalsh(stacked)
    second_largest = float(np.max(eigenvalues[:, -2])) if d > 1 else 0.0
    report.add("rank one", second_largest, tol)

    traces = np.real(np.einsum("jaa->j", stacked))
    report.add("trace", float(np.max(np.abs(traces - 1.0 / d))), tol)

    normalized = stacked * d
    overlaps = np.real(np.einsum("iab,jba->ij", normalized, normalized))
    pairs = [(i, j) for i, j in combinations(range(len(pom)), 2)]
    if pairs:
        values = np.array([overlaps[i, j] for i, j in pairs])
        deviation = float(np.max(np.abs(values - 1.0 / (d + 1))))
        report.data['pairwise_fidelity_mean'] = float(np.mean(values))
    else:
        deviation = 0.0
    report.add("pairwise fidelity", deviation, tol,
               detail=f"{len(pairs)} pairs against 1/{d + 1}")

    logger.debug(f"validate_sic({report.subject}): passed={report.passed}")
    return report


def validate_mub(collection: MubCollection, tol: float = 1e-12) -> ValidationReport:
    """Orthonormality of each basis and unbiasedness of every basis pair"""
    report = ValidationReport(subject="mub")
    matrices = [collection.matrix(i) for i in range(len(collection))]
    for name, m in zip(collection.names, matrices):
        gram = m.conj().T @ m
        report.add(f"orthonormal {name}", float(np.max(np.abs(gram - np.eye(gram.shape[0])))), tol)
    for (i, a), (j, b) in combinations(enumerate(matrices), 2):
        d = a.shape[0]
        overlaps = np.abs(a.conj().T @ b) ** 2
        report.add(f"unbiased {collection.names[i]}-{collection.names[j]}",
                   float(np.max(np.abs(overlaps - 1.0 / d))), tol)
    return report


@dataclass(frozen=True)
class BlochVector:
    """Real three-vector inside the unit ball"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1.0 + 1e-12:
            raise InvalidStateError("Bloch vector inside the unit ball", f"norm {self.norm():.15g}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return float(np.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2))

    def dot(self, other: "BlochVector") -> float:
        return float(self.as_array() @ other.as_array())


def bloch_vector(rho: DensityMatrix) -> BlochVector:
    if rho.dim != 2:
        raise DimensionMismatchError(f"Bloch vectors need dimension 2, got {rho.dim}")
    m = rho.matrix
    return BlochVector(*(float(np.real(np.trace(m @ s))) for s in (SIGMA_1, SIGMA_2, SIGMA_3)))


def bloch_to_state(v: BlochVector) -> DensityMatrix:
    """rho = (I + v . sigma) / 2"""
    m = (IDENTITY_2 + v.x * SIGMA_1 + v.y * SIGMA_2 + v.z * SIGMA_3) / 2
    return DensityMatrix(m)


def tetrahedron_bloch_vectors(pom: POM) -> List[BlochVector]:
    """Bloch vectors of the trace-normalized effects of a qubit POM"""
    if pom.dim != 2:
        raise DimensionMismatchError(f"tetrahedron needs a qubit POM, got dimension {pom.dim}")
    vectors = []
    for effect in pom:
        state = DensityMatrix(effect.matrix / effect.trace())
        vectors.append(bloch_vector(state))
    return vectors


def mub_unitary_from_gates(k: int) -> np.ndarray:
    """
    Gate decomposition of mub_unitary(k)

    k=1: H (x) H; k=2: SH (x) SH; k=3: CZ (SH (x) H); k=4: CZ (H (x) SH).
    """
    h = np.asarray(HADAMARD)
    sh = np.asarray(PHASE_S) @ h
    cz = np.asarray(CZ)
    if k == 1:
        return tensor(h, h)
    if k == 2:
        return tensor(sh, sh)
    if k == 3:
        return cz @ tensor(sh, h)
    if k == 4:
        return cz @ tensor(h, sh)
    raise ValueError(f"basis index must be in 1..4, got {k}")
