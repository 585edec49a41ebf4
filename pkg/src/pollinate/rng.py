"""Counter-based uniform draws built on SplitMix64.

Every random number used by the trip engine is a pure function of
``(trip_seed, draw_index)``:

    state_j = trip_seed + (j + 1) * GAMMA          (mod 2**64)
    u_j     = (mix64(state_j) >> 11) * 2**-53

which is exactly the j-th output of Vigna's SplitMix64 generator seeded with
``trip_seed``. Trip seeds come from the same construction applied to the
master seed, so trip ``i`` of a batch uses ``splitmix64_at(master_seed, i)``.
Nothing is shared between trips, which is what lets serial and parallel runs
agree bit for bit.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "splitmix64-counter"
GENERATOR_VERSION = 1

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64_at(seed: int, index: int) -> int:
    """The ``index``-th (0-based) 64-bit output of SplitMix64 seeded with ``seed``."""
    return mix64(seed + (index + 1) * GAMMA)


def uniform_at(seed: int, index: int) -> float:
    return (splitmix64_at(seed, index) >> 11) * _INV_2_53


def trip_seed(master_seed: int, trip_index: int) -> int:
    return splitmix64_at(master_seed & MASK64, trip_index)


class UniformStream:
    """Sequential view over the draws of one trip seed."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.count = 0

    def next(self) -> float:
        u = uniform_at(self.seed, self.count)
        self.count += 1
        return u


# ---------------------------------------------------------------------------
# vectorised versions; numpy uint64 arithmetic wraps modulo 2**64

_GAMMA_U = np.uint64(GAMMA)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1_U
        z ^= z >> np.uint64(27)
        z *= _M2_U
        z ^= z >> np.uint64(31)
    return z


def splitmix64_at_array(seeds: np.ndarray, index: np.ndarray) -> np.ndarray:
    seeds = np.asarray(seeds, dtype=np.uint64)
    index = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = seeds + (index + np.uint64(1)) * _GAMMA_U
    return mix64_array(state)


def uniform_at_array(seeds: np.ndarray, index: np.ndarray) -> np.ndarray:
    out = splitmix64_at_array(seeds, index) >> np.uint64(11)
    return out.astype(np.float64) * _INV_2_53


def trip_seeds(master_seed: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.uint64)
    seeds = np.full(idx.shape, master_seed & MASK64, dtype=np.uint64)
    return splitmix64_at_array(seeds, idx)
