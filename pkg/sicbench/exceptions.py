"""
sicbench exceptions

Library code raises these; the command-line layer turns them into
standard-error messages and exit statuses.
"""

from typing import List, Optional


class SicBenchError(Exception):
    """Base class for every sicbench failure"""


class DimensionMismatchError(SicBenchError, ValueError):
    """Operands live in spaces of different dimension"""


class InvalidStateError(SicBenchError, ValueError):
    """A ket or density matrix violates one of its invariants"""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        message = f"invalid state: {invariant}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class InvalidEffectError(SicBenchError, ValueError):
    """A POM effect is not Hermitian or not positive"""


class InvalidPomError(SicBenchError, ValueError):
    """Effects do not sum to the identity or have mixed dimensions"""


class NegativeProbabilityError(SicBenchError, ValueError):
    """A Born probability is negative beyond the round-off clamp"""


class ImpossibleOutcomeError(SicBenchError, ValueError):
    """Conditioning on an outcome of zero probability"""

    def __init__(self, probability: float):
        self.probability = probability
        super().__init__(f"impossible outcome (probability {probability:.3e})")


class InvalidKrausSetError(SicBenchError, ValueError):
    """Kraus operators violate completeness"""


class InvalidSeedError(SicBenchError, ValueError):
    """Seed is not a non-negative integer"""


class NonSicPomError(SicBenchError, ValueError):
    """A SIC-only routine received a POM that fails SIC validation"""


class CircuitError(SicBenchError, ValueError):
    """Malformed optical element or photonic circuit"""


class SchemeMismatchError(SicBenchError):
    """Equivalent measurement schemes produced different distributions"""


class ConfigError(SicBenchError, ValueError):
    """Configuration or input file failed validation"""

    def __init__(self, message: str, errors: Optional[List[str]] = None):
        self.errors = list(errors or [])
        if self.errors:
            message = message + ": " + "; ".join(self.errors)
        super().__init__(message)
