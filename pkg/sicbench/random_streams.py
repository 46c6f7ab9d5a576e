"""
sicbench random streams

Seeded, reproducible random number generation. Every sampling routine goes
through here so that a run depends only on (seed, shots, batch size).

Stream-splitting rule: ``shots`` shots are cut into consecutive batches of
``SICBENCH_BATCH_SHOTS``; batch ``i`` draws from
``SeedSequence(seed).spawn(n_batches)[i]`` with a PCG64 bit generator, and the
per-batch counts are summed.
"""

import logging
from typing import Callable, List, Optional

import numpy as np
from numpy.random import PCG64, SeedSequence

from config.config import get_batch_shots
from .exceptions import InvalidSeedError

# Configure logging
logger = logging.getLogger(__name__)


def normalize_seed(seed) -> int:
    """
    Validate a user supplied seed

    Args:
        seed: Non-negative integer, or a decimal string of one

    Returns:
        The seed as an int
    """
    if isinstance(seed, bool):
        raise InvalidSeedError(f"seed must be a non-negative integer, got {seed!r}")
    if isinstance(seed, (int, np.integer)):
        value = int(seed)
    elif isinstance(seed, str) and seed.strip().isdigit():
        value = int(seed.strip())
    else:
        raise InvalidSeedError(f"seed must be a non-negative integer, got {seed!r}")
    if value < 0:
        raise InvalidSeedError(f"seed must be a non-negative integer, got {seed!r}")
    return value


def make_generator(seed) -> np.random.Generator:
    """Single PCG64 generator for non-batched draws (random states, phase noise)"""
    return np.random.Generator(PCG64(SeedSequence(normalize_seed(seed))))


def spawn_seeds(seed, count: int) -> List[int]:
    """Independent integer child seeds, e.g. one per bench trial"""
    children = SeedSequence(normalize_seed(seed)).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def batch_sizes(shots: int, batch_shots: Optional[int] = None) -> List[int]:
    if shots < 0:
        raise ValueError(f"shots must be non-negative, got {shots}")
    batch = batch_shots or get_batch_shots()
    full, rest = divmod(shots, batch)
    return [batch] * full + ([rest] if rest else [])


def run_batched(seed, shots: int, draw: Callable[[np.random.Generator, int], np.ndarray],
                n_outcomes: int, batch_shots: Optional[int] = None) -> np.ndarray:
    """
    Run ``draw(rng, batch_size)`` once per shot batch and sum the counts

    Args:
        seed: Run seed
        shots: Total number of shots
        draw: Callable returning an integer count vector of length n_outcomes
        n_outcomes: Length of the count vector
        batch_shots: Override of the configured batch size

    Returns:
        Summed counts as an int64 array
    """
    seed = normalize_seed(seed)
    sizes = batch_sizes(shots, batch_shots)
    total = np.zeros(n_outcomes, dtype=np.int64)
    if not sizes:
        return total
    streams = SeedSequence(seed).spawn(len(sizes))
    for index, (size, stream) in enumerate(zip(sizes, streams)):
        rng = np.random.Generator(PCG64(stream))
        total += np.asarray(draw(rng, size), dtype=np.int64)
        logger.debug(f"batch {index + 1}/{len(sizes)}: {size} shots")
    return total


def multinomial_counts(probabilities: np.ndarray, shots: int, seed,
                       batch_shots: Optional[int] = None) -> np.ndarray:
    """Batched multinomial draw; probabilities must already be validated"""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    p = p / p.sum()
    return run_batched(seed, shots, lambda rng, n: rng.multinomial(n, p), len(p), batch_shots)
