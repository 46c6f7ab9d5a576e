#!/usr/bin/env python3
"""
sicbench Quantum Core Test Script
Tests states, effects, the Born rule, state update and distance measures
"""

import sys
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import sqrtm

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from sicbench.exceptions import (
    DimensionMismatchError,
    ImpossibleOutcomeError,
    InvalidPomError,
    InvalidStateError,
    NegativeProbabilityError,
)
from sicbench.quantum_core import (
    CZ,
    HADAMARD,
    IDENTITY_2,
    SIGMA_3,
    DensityMatrix,
    Effect,
    Ket,
    POM,
    born_probabilities,
    born_probability,
    clamp_probability,
    fidelity_pure,
    partial_trace,
    phase_invariant_distance,
    post_measurement_state,
    random_mixed_state,
    random_pure_state,
    state_fidelity,
    tensor,
    trace_distance,
)
from sicbench.random_streams import make_generator
from sicbench.sic_structures import CHI, N_SIC, fiducial_kets, mub_unitary, sic_pom
from sicbench.successive_measurement import TETRA_T1, TETRA_T2


def test_tensor_products():
    """Kronecker products of the named gates"""
    assert np.allclose(tensor(IDENTITY_2, IDENTITY_2), np.eye(4))
    assert np.allclose(tensor(HADAMARD, HADAMARD), mub_unitary(1), atol=1e-12)
    assert np.allclose(tensor(SIGMA_3, IDENTITY_2), np.diag([1, 1, -1, -1]))
    assert tensor(np.eye(2), np.eye(4)).shape == (8, 8)


def test_density_matrix_invariants():
    """Each violated invariant is reported by name"""
    with pytest.raises(InvalidStateError) as info:
        DensityMatrix([[0.5, 0.1], [0.2, 0.5]])
    assert info.value.invariant == "Hermitian"

    with pytest.raises(InvalidStateError) as info:
        DensityMatrix(np.eye(2))
    assert info.value.invariant == "unit trace"

    with pytest.raises(InvalidStateError) as info:
        DensityMatrix(np.diag([1.1, -0.1]))
    assert info.value.invariant == "positive semidefinite"

    with pytest.raises(InvalidStateError) as info:
        DensityMatrix(np.eye(3) / 3)
    assert info.value.invariant == "supported dimension"

    with pytest.raises(DimensionMismatchError):
        DensityMatrix(np.ones((2, 3)) / 2)


def test_ket_normalization():
    with pytest.raises(InvalidStateError):
        Ket([1.0, 1.0])
    ket = Ket.normalized([1.0, 1.0])
    assert abs(np.linalg.norm(ket.amplitudes) - 1.0) < 1e-15
    assert ket.to_density().purity() == pytest.approx(1.0)


def test_pom_completeness():
    with pytest.raises(InvalidPomError):
        POM((Effect(np.eye(2) / 2), Effect(np.eye(2) / 4)))
    pom = POM((Effect(np.diag([1, 0]), "0"), Effect(np.diag([0, 1]), "1")))
    assert pom.labels == ["0", "1"]
    assert len(pom) == 2


def test_born_probability_on_fiducials():
    """Maximally mixed state gives 1/16; |vL> singles out the first fiducial matrix"""
    pom = sic_pom(4)
    mixed = DensityMatrix.maximally_mixed(4)
    assert all(abs(born_probability(mixed, e) - 1.0 / 16) < 1e-12 for e in pom)

    v_l = Ket([1, 0, 0, 0]).to_density()
    p = born_probabilities(v_l, pom)
    strong = CHI ** 2 / (4 * N_SIC ** 2)
    weak = 1.0 / (4 * N_SIC ** 2)
    assert strong == pytest.approx(0.146353, abs=1e-6)
    assert weak == pytest.approx(0.0345492, abs=1e-7)
    for label, value in zip(pom.labels, p):
        expected = strong if label.startswith("1,") else weak
        assert abs(value - expected) < 1e-12
    assert abs(p.sum() - 1.0) < 1e-12


def test_born_probability_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        born_probability(DensityMatrix.maximally_mixed(2), sic_pom(4)[0])


def test_clamp_probability():
    assert clamp_probability(-5e-13) == 0.0
    assert clamp_probability(1.0 + 5e-13) == 1.0
    assert clamp_probability(0.25) == 0.25
    with pytest.raises(NegativeProbabilityError):
        clamp_probability(-1e-9)


def test_post_measurement_state():
    mixed = DensityMatrix.maximally_mixed(4)
    post, p = post_measurement_state(mixed, np.eye(4))
    assert p == pytest.approx(1.0)
    assert np.allclose(post.matrix, np.eye(4) / 4)

    post, p = post_measurement_state(DensityMatrix.maximally_mixed(2), np.diag([TETRA_T1, TETRA_T2]))
    assert p == pytest.approx(0.5, abs=1e-12)
    assert np.allclose(np.diag(post.matrix).real, [0.211325, 0.788675], atol=1e-6)


def test_impossible_outcome():
    zero = Ket([1, 0]).to_density()
    with pytest.raises(ImpossibleOutcomeError) as info:
        post_measurement_state(zero, np.diag([0, 1]))
    assert "impossible outcome" in str(info.value)


def test_fiducial_pair_fidelity():
    """All 120 distinct fiducial pairs overlap at 1/5"""
    kets = [ket for _, ket in fiducial_kets()]
    worst = max(abs(fidelity_pure(a, b) - 0.2) for a, b in combinations(kets, 2))
    assert worst < 1e-12
    assert fidelity_pure(kets[0], kets[0]) == pytest.approx(1.0)
    assert fidelity_pure(Ket([1, 0, 0, 0]), Ket([0, 1, 0, 0])) == 0.0


def test_state_fidelity():
    rng = make_generator(7)
    pure = random_pure_state(4, rng).to_density()
    assert state_fidelity(pure, pure) == pytest.approx(1.0, abs=1e-10)
    assert state_fidelity(DensityMatrix.maximally_mixed(4), pure) == pytest.approx(0.25, abs=1e-12)
    assert state_fidelity(pure, DensityMatrix.maximally_mixed(4)) == pytest.approx(0.25, abs=1e-12)

    for _ in range(5):
        a = random_mixed_state(4, rng)
        b = random_mixed_state(4, rng)
        root = sqrtm(a.matrix)
        oracle = float(np.real(np.trace(sqrtm(root @ b.matrix @ root))) ** 2)
        assert abs(state_fidelity(a, b) - oracle) < 1e-10


def test_state_fidelity_with_rank_deficient_states():
    """Pure arguments give <psi|rho|psi> exactly, in either order"""
    rng = make_generator(71)
    for _ in range(20):
        ket = random_pure_state(4, rng)
        rho = random_mixed_state(4, rng)
        expected = float(np.real(np.vdot(ket.amplitudes, rho.matrix @ ket.amplitudes)))
        forward = state_fidelity(ket.to_density(), rho)
        backward = state_fidelity(rho, ket.to_density())
        assert abs(forward - expected) < 1e-12
        assert abs(forward - backward) < 1e-12
        other = random_pure_state(4, rng)
        assert abs(state_fidelity(ket.to_density(), other.to_density()) - fidelity_pure(ket, other)) < 1e-12


def test_phase_invariant_distance():
    a = random_pure_state(4, make_generator(3)).amplitudes
    assert phase_invariant_distance(a, np.exp(0.7j) * a) < 1e-14
    assert phase_invariant_distance([1, 0], [0, 1]) == pytest.approx(np.sqrt(2))
    with pytest.raises(DimensionMismatchError):
        phase_invariant_distance(np.eye(2), np.eye(4))


def test_trace_distance():
    zero = Ket([1, 0]).to_density()
    one = Ket([0, 1]).to_density()
    assert trace_distance(zero, one) == pytest.approx(1.0)
    assert trace_distance(zero, zero) == pytest.approx(0.0)
    assert trace_distance(np.diag([1.1, -0.1]), np.diag([1.0, 0.0])) == pytest.approx(0.1)


def test_partial_trace_of_entangled_state():
    """CZ on |+>|+> is maximally entangled; product states stay pure"""
    plus = np.array([1, 1]) / np.sqrt(2)
    entangled = Ket(np.asarray(CZ) @ np.kron(plus, plus)).to_density()
    assert np.allclose(partial_trace(entangled, 0), np.eye(2) / 2, atol=1e-12)
    assert np.allclose(partial_trace(entangled, 1), np.eye(2) / 2, atol=1e-12)

    product = Ket(np.kron([1, 0], plus)).to_density()
    assert np.allclose(partial_trace(product, 0), np.diag([1, 0]), atol=1e-12)
    with pytest.raises(ValueError):
        partial_trace(product, 2)


def test_random_states_are_valid():
    rng = make_generator(11)
    for dim in (2, 4):
        assert random_pure_state(dim, rng).dim == dim
        rho = random_mixed_state(dim, rng)
        assert rho.eigenvalues()[0] > -1e-12
        assert abs(np.trace(rho.matrix) - 1) < 1e-12


def main():
    """Run all tests"""
    print("🔬 sicbench Quantum Core Test Suite")
    print("=" * 50)

    tests = [
        test_tensor_products,
        test_density_matrix_invariants,
        test_ket_normalization,
        test_pom_completeness,
        test_born_probability_on_fiducials,
        test_born_probability_dimension_mismatch,
        test_clamp_probability,
        test_post_measurement_state,
        test_impossible_outcome,
        test_fiducial_pair_fidelity,
        test_state_fidelity,
        test_state_fidelity_with_rank_deficient_states,
        test_phase_invariant_distance,
        test_trace_distance,
        test_partial_trace_of_entangled_state,
        test_random_states_are_valid,
    ]

    passed = 0
    for test in tests:
        try:
            test()
            passed += 1
            print(f"   ✓ {test.__name__}")
        except Exception as e:
            print(f"   ❌ {test.__name__} failed: {e}")

    print("=" * 50)
    print(f"📊 Test Results: {passed}/{len(tests)} tests passed")
    return 0 if passed == len(tests) else 1


if __name__ == "__main__":
    exit(main())
