#!/usr/bin/env python3
"""
sicbench Experiment Runner Test Script
Tests scheme resolution, scheme agreement, end-to-end experiments and
repeated-trial statistics
"""

import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from sicbench.exceptions import ConfigError
from sicbench.experiment_runner import (
    run_bench,
    run_experiment,
    scheme_agreement,
    scheme_pom,
    simulate_counts,
)
from sicbench.file_io import dumps_json, ket_to_record
from sicbench.quantum_core import DensityMatrix, Ket, random_mixed_state
from sicbench.random_streams import make_generator


def _config(**overrides):
    config = {
        'state': {'source': 'random-pure', 'dim': 4},
        'scheme': 'direct',
        'shots': 20_000,
        'seed': 20120308,
        'methods': ['linear', 'linear-projected', 'mle'],
    }
    config.update(overrides)
    return config


def test_scheme_poms():
    assert len(scheme_pom("direct", 4)) == 16
    assert scheme_pom("two-step", 4).labels[4] == "2,1"
    assert scheme_pom("optical", 4).dim == 4
    assert len(scheme_pom("optical", 2)) == 4
    with pytest.raises(ValueError):
        scheme_pom("holographic", 4)
    with pytest.raises(ValueError):
        scheme_pom("direct", 8)


def test_schemes_agree():
    """Direct, two-step and optical realizations give the same distribution"""
    rng = make_generator(3)
    for dim in (2, 4):
        for _ in range(20):
            agreement = scheme_agreement(random_mixed_state(dim, rng))
            assert set(agreement) == {"direct", "two-step", "optical"}
            assert max(agreement.values()) < 1e-10


def test_simulate_counts_per_scheme():
    rho = DensityMatrix.maximally_mixed(4)
    for scheme in ("direct", "two-step", "optical"):
        counts = simulate_counts(rho, scheme, 1000, 17)
        assert counts.shots == 1000
        assert len(counts.labels) == 16
        assert counts.labels == scheme_pom(scheme, 4).labels


def test_experiment_is_deterministic():
    first = dumps_json(run_experiment(_config()).to_dict())
    second = dumps_json(run_experiment(_config()).to_dict())
    assert first == second


def test_experiment_report_contents():
    report = run_experiment(_config())
    record = report.to_dict()
    assert list(record) == ['config', 'true_state', 'pom', 'probabilities', 'scheme_agreement',
                            'counts', 'reconstructions']
    assert record['counts']['shots'] == 20_000
    assert [r['method'] for r in record['reconstructions']] == ['linear', 'linear-projected', 'mle']
    assert all('elapsed_ms' not in r for r in record['reconstructions'])
    assert report.result('linear-projected').fidelity > 0.95
    assert abs(sum(record['probabilities'].values()) - 1.0) < 1e-10


def test_experiment_timing_is_opt_in():
    report = run_experiment(_config(record_timing=True, methods=['linear']))
    assert report.result('linear').elapsed_ms is not None


def test_experiment_without_shots():
    report = run_experiment(_config(shots=0))
    assert report.results == []
    assert report.counts.shots == 0


def test_two_step_and_optical_experiments():
    for scheme in ("two-step", "optical"):
        for dim in (2, 4):
            report = run_experiment(_config(scheme=scheme, state={'source': 'random-mixed', 'dim': dim},
                                            methods=['linear-projected']))
            assert report.counts.shots == 20_000
            assert len(report.labels) == dim * dim
            assert report.result('linear-projected').is_physical


def test_experiment_from_state_file():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.json")
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(ket_to_record(Ket([1, 0, 0, 0])), handle)
        report = run_experiment(_config(state={'source': 'file', 'path': path}, methods=['linear']))
        assert np.allclose(report.true_state.matrix, np.diag([1, 0, 0, 0]))
        assert np.max(report.probabilities) == pytest.approx(0.146353, abs=1e-6)


def test_invalid_configuration():
    with pytest.raises(ConfigError) as info:
        run_experiment(_config(shots=-1))
    assert any(error.startswith("shots") for error in info.value.errors)

    with pytest.raises(ConfigError) as info:
        run_experiment(_config(colour="blue"))
    assert any("colour" in error for error in info.value.errors)

    with pytest.raises(ConfigError):
        run_experiment(_config(state={'source': 'file'}))

    with pytest.raises(ConfigError):
        run_experiment(_config(methods=[]))


def test_bench_is_independent_of_jobs():
    kwargs = dict(trials=6, shots=5000, seed=11, methods=('linear-projected',))
    serial = run_bench(jobs=1, **kwargs)
    parallel = run_bench(jobs=3, **kwargs)
    assert serial == parallel
    stats = serial['fidelity']['linear-projected']
    assert stats['trials'] == 6
    assert stats['min'] <= stats['q1'] <= stats['median'] <= stats['q3'] <= stats['max']


def test_bench_rejects_empty_runs():
    with pytest.raises(ValueError):
        run_bench(trials=0, shots=100, seed=1)


def test_bench_high_shot_fidelity():
    """Median fidelity over 20 trials of 10^6 shots"""
    result = run_bench(trials=20, shots=1_000_000, seed=20120308, methods=('linear-projected',), jobs=4)
    assert result['fidelity']['linear-projected']['median'] > 0.995


def main():
    """Run all tests"""
    print("🧪 sicbench Experiment Runner Test Suite")
    print("=" * 50)

    tests = [
        test_scheme_poms,
        test_schemes_agree,
        test_simulate_counts_per_scheme,
        test_experiment_is_deterministic,
        test_experiment_report_contents,
        test_experiment_timing_is_opt_in,
        test_experiment_without_shots,
        test_two_step_and_optical_experiments,
        test_experiment_from_state_file,
        test_invalid_configuration,
        test_bench_is_independent_of_jobs,
        test_bench_rejects_empty_runs,
        test_bench_high_shot_fidelity,
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
