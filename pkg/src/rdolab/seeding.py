"""Deterministic seed fan-out.

One experiment seed is expanded into independent sub-seeds with the
splitmix64 finalizer::

    derive_seed(seed, *keys) = mix(... mix(mix(seed) ^ mix(k1 + GOLDEN)) ...)

Purposes are fixed integers so that adding a new purpose never shifts
existing streams.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

INIT = 1
DATA = 2
SHUFFLE = 3
SPLIT = 4


def splitmix64(x):
    """One splitmix64 output step for state ``x`` (as a Python int)."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, *keys):
    """Derive a 64-bit sub-seed from ``seed`` and a path of integer keys."""
    state = splitmix64(int(seed) & MASK64)
    for key in keys:
        state = splitmix64(state ^ splitmix64((int(key) + GOLDEN) & MASK64))
    return state


def rng_for(seed, *keys):
    """A numpy Generator seeded from ``derive_seed(seed, *keys)``."""
    return np.random.default_rng(derive_seed(seed, *keys))
