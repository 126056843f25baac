"""Keyed counter-based random streams.

Every random decision in the simulator draws from a Philox stream whose key
is derived from ``(seed, purpose, *coordinates)``. Two calls with the same key
always yield the same stream, so results do not depend on the order in which
machines or vertices are processed.
"""

import numpy as np

PURPOSES = {
    "birth": 1,
    "apply": 2,
    "sync": 3,
    "scatter": 4,
    "partition": 5,
    "master": 6,
    "walk": 7,
    "erasure": 8,
    "meet": 9,
    "sparsify": 10,
    "trial": 11,
}


def keyed_stream(seed, purpose, *key):
    """Return a fresh ``numpy.random.Generator`` for the given key."""
    if purpose not in PURPOSES:
        raise KeyError(f"unknown rng purpose {purpose!r}")
    entropy = [int(seed), PURPOSES[purpose], *(int(k) for k in key)]
    if any(e < 0 for e in entropy):
        raise ValueError(f"rng key components must be non-negative, got {entropy}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def as_generator(rng):
    """Accept a seed, a Generator, or None and return a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(rng)))
