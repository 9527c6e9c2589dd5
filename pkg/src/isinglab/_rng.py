"""Deterministic 64-bit RNG used inside the compiled event loops.

splitmix64: a tiny, statistically solid sequential generator with O(1)
seeding and trivially derivable child streams, so replica r of a run with
master seed s always consumes the same randomness regardless of batching.
Python-level utility randomness elsewhere uses numpy Generators; this module
exists because the compiled kernels need a generator they can inline.
"""

from __future__ import annotations

import numpy as np
from numba import njit, uint64

__all__ = ["mix64", "next_u64", "next_double", "child_seed", "DOUBLE_UNIT"]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
DOUBLE_UNIT = 1.0 / 9007199254740992.0  # 2**-53


@njit(uint64(uint64), cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def next_u64(state):
    """Advance the stream: returns (new_state, 64 uniform bits)."""
    state = state + _GAMMA
    return state, mix64(state)


@njit(cache=True, inline="always")
def next_double(state):
    """Advance the stream: returns (new_state, uniform double in [0, 1))."""
    state, z = next_u64(state)
    return state, (z >> np.uint64(11)) * DOUBLE_UNIT


@njit(uint64(uint64, uint64), cache=True)
def child_seed(master, index):
    """Stream seed for replica `index` of a run seeded with `master`."""
    return mix64(mix64(master) + (index + np.uint64(1)) * _GAMMA)
