#!/usr/bin/env python3
"""
sicbench Tomography Test Script
Tests sampling, linear inversion, projection onto physical states and
maximum-likelihood reconstruction
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from sicbench.exceptions import NonSicPomError
from sicbench.quantum_core import DensityMatrix, Effect, Ket, POM, random_mixed_state, random_pure_state, state_fidelity
from sicbench.random_streams import make_generator, spawn_seeds
from sicbench.sic_structures import sic_pom
from sicbench.successive_measurement import compose_two_step, two_step_scheme_d4
from sicbench.tomography import (
    CountRecord,
    MleOptions,
    ReconstructionMethod,
    least_squares_inversion,
    linear_inversion,
    mle_from_frequencies,
    mle_reconstruct,
    outcome_distribution,
    project_to_physical,
    reconstruct,
    sample_counts,
)


def test_outcome_distribution():
    p = outcome_distribution(DensityMatrix.maximally_mixed(4), sic_pom(4))
    assert np.allclose(p, 1.0 / 16, atol=1e-15)
    p = outcome_distribution(DensityMatrix.maximally_mixed(2), sic_pom(2))
    assert np.allclose(p, 0.25, atol=1e-15)
    p = outcome_distribution(Ket([1, 0, 0, 0]).to_density(), sic_pom(4))
    assert np.allclose(np.sort(p)[-4:], 0.146353, atol=1e-6)


def test_sample_counts_edge_cases():
    record = sample_counts(np.full(16, 1 / 16), 0, 1)
    assert record.shots == 0
    assert np.all(record.counts == 0)

    point = np.zeros(16)
    point[0] = 1.0
    record = sample_counts(point, 1000, 1)
    assert record.counts[0] == 1000
    assert record.counts[1:].sum() == 0


def test_sample_counts_uniform():
    shots = 1_000_000
    record = sample_counts(np.full(16, 1 / 16), shots, 20120308, labels=sic_pom(4).labels, pom_id="sic-4")
    assert record.labels[0] == "1,1"
    sigma = np.sqrt(shots * (1 / 16) * (15 / 16))
    assert np.all(np.abs(record.counts - shots / 16) < 5 * sigma)


def test_sample_counts_independent_of_batching_only_through_seed():
    """Same seed and batch size reproduce the counts exactly"""
    p = outcome_distribution(random_mixed_state(4, make_generator(1)), sic_pom(4))
    first = sample_counts(p, 250_000, 77, batch_shots=100_000)
    second = sample_counts(p, 250_000, 77, batch_shots=100_000)
    assert np.array_equal(first.counts, second.counts)
    assert first.shots == 250_000


def test_count_record_validation():
    with pytest.raises(ValueError):
        CountRecord("x", ["1,1", "1,2"], [1])
    with pytest.raises(ValueError):
        CountRecord("x", ["1,1"], [-1])
    with pytest.raises(ValueError):
        CountRecord("x", ["1,1"], [0]).frequencies()


def test_linear_inversion_uniform():
    estimate = linear_inversion(np.full(16, 1 / 16), sic_pom(4))
    assert np.allclose(estimate, np.eye(4) / 4, atol=1e-12)


def test_linear_inversion_round_trip():
    """Exact probabilities of 100 random mixed states invert back to the state"""
    rng = make_generator(2012)
    pom = sic_pom(4)
    for _ in range(100):
        rho = random_mixed_state(4, rng)
        estimate = linear_inversion(outcome_distribution(rho, pom), pom)
        assert np.linalg.norm(estimate - rho.matrix) < 1e-10


def test_linear_inversion_tetrahedron():
    zero = Ket([1, 0]).to_density()
    pom = sic_pom(2)
    estimate = linear_inversion(outcome_distribution(zero, pom), pom)
    assert np.allclose(estimate, zero.matrix, atol=1e-10)


def test_linear_inversion_matches_least_squares():
    rng = make_generator(5)
    for pom in (sic_pom(4), compose_two_step(two_step_scheme_d4())):
        freqs = sample_counts(outcome_distribution(random_mixed_state(4, rng), pom), 1000, 3).frequencies()
        assert np.allclose(linear_inversion(freqs, pom), least_squares_inversion(freqs, pom), atol=1e-10)


def test_linear_inversion_rejects_non_sic():
    computational = POM(tuple(Effect(np.diag(row), str(i)) for i, row in enumerate(np.eye(2))))
    with pytest.raises(NonSicPomError):
        linear_inversion([0.25, 0.25, 0.25, 0.25], computational)
    with pytest.raises(ValueError):
        linear_inversion(np.full(4, 0.25), sic_pom(4))


def test_project_to_physical():
    projected = project_to_physical(np.diag([1.1, -0.1]))
    assert np.allclose(projected.matrix, np.diag([1.0, 0.0]), atol=1e-12)

    rho = random_mixed_state(4, make_generator(8))
    assert np.max(np.abs(project_to_physical(rho.matrix).matrix - rho.matrix)) < 1e-12

    noisy = np.diag([0.6, 0.5, -0.05, -0.05])
    out = project_to_physical(noisy)
    assert abs(np.trace(out.matrix) - 1.0) < 1e-12
    assert out.eigenvalues()[0] >= -1e-12


def test_projection_does_not_move_away_from_truth():
    """Median Frobenius distance to the truth does not grow after projection"""
    rng = make_generator(31)
    pom = sic_pom(4)
    before, after = [], []
    for seed in spawn_seeds(31, 40):
        rho = random_pure_state(4, rng).to_density()
        linear = linear_inversion(sample_counts(outcome_distribution(rho, pom), 2000, seed).frequencies(), pom)
        before.append(np.linalg.norm(linear - rho.matrix))
        after.append(np.linalg.norm(project_to_physical(linear).matrix - rho.matrix))
    assert np.median(after) <= np.median(before)


def test_mle_uniform_counts():
    record = CountRecord("sic-4", sic_pom(4).labels, np.full(16, 1000))
    result = mle_reconstruct(record, sic_pom(4))
    assert result.converged
    assert np.allclose(result.estimate, np.eye(4) / 4, atol=1e-8)


def test_mle_exact_frequencies():
    """Exact frequencies of a full-rank state are reproduced within 1e-8"""
    pom = sic_pom(4)
    rho = random_mixed_state(4, make_generator(13))
    result = mle_from_frequencies(outcome_distribution(rho, pom), pom, MleOptions(tol=1e-10, stop_on_likelihood=False))
    assert result.max_probability_deviation < 1e-8
    assert result.is_physical


def test_mle_log_likelihood_never_decreases():
    pom = sic_pom(4)
    rho = random_pure_state(4, make_generator(21)).to_density()
    record = sample_counts(outcome_distribution(rho, pom), 5000, 4, labels=pom.labels)
    result = mle_from_frequencies(record.frequencies(), pom, MleOptions(max_iter=2000, tol=1e-8, record_history=True))
    history = np.array(result.log_likelihoods)
    assert history.size == result.iterations + 1
    assert np.all(np.diff(history) >= -1e-12)


def test_mle_not_converged_is_flagged():
    pom = sic_pom(4)
    rho = random_pure_state(4, make_generator(22)).to_density()
    freqs = sample_counts(outcome_distribution(rho, pom), 1000, 9).frequencies()
    result = mle_from_frequencies(freqs, pom, MleOptions(max_iter=3, tol=1e-14))
    assert not result.converged
    assert result.iterations == 3


def test_mle_needs_shots():
    with pytest.raises(ValueError):
        mle_reconstruct(CountRecord("sic-4", sic_pom(4).labels, np.zeros(16)), sic_pom(4))


def test_reconstruct_dispatch_and_metrics():
    pom = sic_pom(4)
    rho = random_pure_state(4, make_generator(40)).to_density()
    record = sample_counts(outcome_distribution(rho, pom), 10_000, 40, labels=pom.labels)
    linear = reconstruct(record, pom, "linear", truth=rho)
    assert linear.method is ReconstructionMethod.LINEAR
    assert linear.trace_distance is not None
    assert linear.elapsed_ms is None
    projected = reconstruct(record, pom, ReconstructionMethod.LINEAR_PROJECTED, truth=rho, record_timing=True)
    assert projected.is_physical
    assert projected.fidelity > 0.9
    assert projected.elapsed_ms is not None
    with pytest.raises(ValueError):
        reconstruct(record, pom, "bayesian")


def test_high_shot_fidelity():
    """Median fidelity over 20 random pure states with 10^6 shots each, default MLE options"""
    pom = sic_pom(4)
    rng = make_generator(2024)
    projected, mle = [], []
    for seed in spawn_seeds(2024, 20):
        rho = random_pure_state(4, rng).to_density()
        record = sample_counts(outcome_distribution(rho, pom), 1_000_000, seed, labels=pom.labels)
        projected.append(reconstruct(record, pom, "linear-projected", truth=rho).fidelity)
        result = mle_reconstruct(record, pom)
        assert result.converged
        assert result.iterations < 20_000
        mle.append(state_fidelity(rho, result.estimate))
    assert np.median(projected) > 0.995
    assert np.median(mle) > 0.995


def test_mle_likelihood_stop():
    """The likelihood-gain rule ends the run before the probability rule would"""
    pom = sic_pom(4)
    rho = random_pure_state(4, make_generator(23)).to_density()
    freqs = sample_counts(outcome_distribution(rho, pom), 100_000, 5).frequencies()
    fast = mle_from_frequencies(freqs, pom, MleOptions(max_iter=50_000, tol=1e-10))
    assert fast.converged
    assert fast.log_likelihood_delta < 1e-10
    slow = mle_from_frequencies(freqs, pom, MleOptions(max_iter=fast.iterations + 100, tol=1e-10,
                                                       stop_on_likelihood=False))
    assert slow.iterations > fast.iterations


def test_infidelity_decreases_with_shots():
    pom = sic_pom(4)
    medians = []
    for shots in (1_000, 10_000, 100_000, 1_000_000):
        rng = make_generator(99)
        values = []
        for seed in spawn_seeds(shots, 20):
            rho = random_pure_state(4, rng).to_density()
            record = sample_counts(outcome_distribution(rho, pom), shots, seed, labels=pom.labels)
            values.append(1.0 - reconstruct(record, pom, "linear-projected", truth=rho).fidelity)
        medians.append(np.median(values))
    assert all(a > b for a, b in zip(medians, medians[1:]))


def main():
    """Run all tests"""
    print("📐 sicbench Tomography Test Suite")
    print("=" * 50)

    tests = [
        test_outcome_distribution,
        test_sample_counts_edge_cases,
        test_sample_counts_uniform,
        test_sample_counts_independent_of_batching_only_through_seed,
        test_count_record_validation,
        test_linear_inversion_uniform,
        test_linear_inversion_round_trip,
        test_linear_inversion_tetrahedron,
        test_linear_inversion_matches_least_squares,
        test_linear_inversion_rejects_non_sic,
        test_project_to_physical,
        test_projection_does_not_move_away_from_truth,
        test_mle_uniform_counts,
        test_mle_exact_frequencies,
        test_mle_log_likelihood_never_decreases,
        test_mle_not_converged_is_flagged,
        test_mle_needs_shots,
        test_reconstruct_dispatch_and_metrics,
        test_high_shot_fidelity,
        test_mle_likelihood_stop,
        test_infidelity_decreases_with_shots,
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
