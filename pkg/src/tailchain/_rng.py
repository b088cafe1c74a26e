"""Counter-based stream derivation.

Each (seed, block, component) triple gets its own generator, so a batch of
paths produces the same numbers whichever worker simulates it.
"""
import numpy as np

BLOCK_SIZE = 1000

PARETO = 0
TILTED = 1
FORWARD = 2
BACKWARD = 3
SIGN_FORWARD = 4
SIGN_BACKWARD = 5
SIGN_ZERO = 6


def component_rng(seed: int, block: int, component: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(block), int(component))))


def blocks(n_paths: int, block_size: int = BLOCK_SIZE):
    """Yield (block_index, size) pairs covering ``n_paths`` paths."""
    start = 0
    index = 0
    while start < n_paths:
        size = min(block_size, n_paths - start)
        yield index, size
        start += size
        index += 1
