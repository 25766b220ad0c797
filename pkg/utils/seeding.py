# utils/seeding.py
import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 32-bit seed for the stream named by (master, *keys)."""
    entropy = [int(master)] + [int(k) for k in keys]
    if any(k < 0 for k in entropy):
        raise ValueError(f"Seed keys must be non-negative, got {entropy}.")
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def rng_for(master: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master)] + [int(k) for k in keys]))
