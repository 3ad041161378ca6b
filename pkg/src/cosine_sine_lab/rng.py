"""SplitMix64 mixing, the coordinate fold used by Noise, and a small seeded generator."""

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    z = (x + GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorised splitmix64 on uint64 arrays (wrapping arithmetic)."""
    z = x + np.uint64(GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def fold_coords(coords) -> int:
    """Absorb a sequence of signed integers one at a time (two's complement)."""
    acc = 0
    for c in coords:
        acc = splitmix64(acc ^ (int(c) & MASK64))
    return acc


def fold_coords_array(coords: np.ndarray) -> np.ndarray:
    """Row-wise fold of an (n, k) int64 array."""
    coords = np.asarray(coords, dtype=np.int64)
    if coords.ndim == 1:
        coords = coords[:, None]
    acc = np.zeros(coords.shape[0], dtype=np.uint64)
    for j in range(coords.shape[1]):
        acc = splitmix64_array(acc ^ coords[:, j].view(np.uint64))
    return acc


def unit_from_state(state):
    """Map 64-bit states to [-1, 1) using the top 53 bits."""
    if isinstance(state, np.ndarray):
        return 2.0 * (state >> np.uint64(11)).astype(np.float64) * 2.0**-53 - 1.0
    return 2.0 * (state >> 11) * 2.0**-53 - 1.0


class SplitMix:
    """Sequential SplitMix64 stream used for parameter draws."""

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        out = splitmix64(self.state)
        self.state = (self.state + GAMMA) & MASK64
        return out

    def uniform(self, lo=0.0, hi=1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        return lo + self.next_u64() % (hi - lo + 1)

    def choice(self, items):
        return items[self.integer(0, len(items) - 1)]

    def dyadic_complex(self, lo: float, hi: float, denom: int = 8) -> complex:
        """Complex number (p + iq)/denom with lo <= |z| <= hi."""
        bound = int(math.ceil(hi * denom))
        while True:
            z = complex(self.integer(-bound, bound), self.integer(-bound, bound)) / denom
            if lo <= abs(z) <= hi:
                return z

    def angle(self) -> float:
        return self.uniform(0.0, 2 * math.pi)
