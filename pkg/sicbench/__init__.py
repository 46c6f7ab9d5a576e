# sicbench Core Module
"""
sicbench - Two-Qubit SIC Measurement Toolkit

This package builds the symmetric informationally complete measurement for
two qubits, realizes it as a two-step measurement and as a simulated
linear-optical bench, samples detection statistics and reconstructs states
from them.
"""

__version__ = "1.0.0"

from .exceptions import SicBenchError, ConfigError
from .quantum_core import DensityMatrix, Effect, Ket, POM
from .sic_structures import fiducial_kets, mub_bases, sic_pom, validate_mub, validate_sic
from .successive_measurement import compose_two_step, match_to_sic, two_step_scheme_d2, two_step_scheme_d4
from .optical_bench import PhotonicCircuit, build_full_bench_d4, build_tetrahedron_bench, full_bench_pom
from .tomography import CountRecord, ReconstructionMethod, ReconstructionResult, reconstruct
from .experiment_runner import ExperimentReport, run_bench, run_experiment
from .report_generator import ReportGenerator

__all__ = [
    'SicBenchError',
    'ConfigError',
    'DensityMatrix',
    'Effect',
    'Ket',
    'POM',
    'fiducial_kets',
    'mub_bases',
    'sic_pom',
    'validate_mub',
    'validate_sic',
    'compose_two_step',
    'match_to_sic',
    'two_step_scheme_d2',
    'two_step_scheme_d4',
    'PhotonicCircuit',
    'build_full_bench_d4',
    'build_tetrahedron_bench',
    'full_bench_pom',
    'CountRecord',
    'ReconstructionMethod',
    'ReconstructionResult',
    'reconstruct',
    'ExperimentReport',
    'run_bench',
    'run_experiment',
    'ReportGenerator',
]
