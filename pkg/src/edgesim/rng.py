"""Named random streams derived from a single root seed.

Each trial owns one root seed; fading, payload noise, transmission order,
device splitting, trainer shuffling and dataset realization each get their
own child generator. Changing one randomness source therefore never
perturbs the others when comparing schemes under a shared seed.
"""

import numpy as np

STREAM_IDS = {
    "fading": 0,   # per-block Rayleigh gain draws
    "noise": 1,    # payload corruption noise
    "shuffle": 2,  # transmission order of the pooled sample stream
    "split": 3,    # partition of the dataset across devices
    "train": 4,    # SGD epoch permutations
    "data": 5,     # dataset realization (blob draws, subset selection)
}


def stream(seed, name):
    """Return the named child generator of the root `seed`."""
    if name not in STREAM_IDS:
        raise ValueError(f"unknown stream name {name!r}")
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    return np.random.default_rng(np.random.SeedSequence((int(seed), STREAM_IDS[name])))


def streams(seed, *names):
    """Return several named child generators at once."""
    return tuple(stream(seed, n) for n in names)
