"""Deterministic 64-bit PRNG (splitmix64) used for all seeded randomness.

Every permutation, sampled block index and Gaussian draw in this package
comes from this generator, so seeded runs are reproducible bit-for-bit and
the stream is simple enough to re-implement elsewhere.  The core step is

    state <- (state + 0x9E3779B97F4A7C15) mod 2^64
    z <- state
    z <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z <- (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output = z XOR (z >> 31)

Uniforms take the top 53 bits (`out >> 11` times 2^-53), integers below n
use rejection sampling, permutations are Fisher-Yates from the top index
down, and normals are Box-Muller pairs (cosine draw first, sine cached).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Sequential splitmix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare_normal: float | None = None

    def next_uint64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            u = self.next_uint64()
            if u < limit:
                return u % n

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of range(n), swapping from index n-1 down."""
        out = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def choices_with_replacement(self, n: int, count: int) -> list[int]:
        return [self.below(n) for _ in range(count)]

    def normal(self) -> float:
        """Standard normal via Box-Muller; the sine mate is cached."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = 1.0 - self.uniform()  # (0, 1]: keeps log() finite
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(theta)
        return radius * math.cos(theta)

    def normal_vector(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)])

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.normal_vector(rows * cols).reshape(rows, cols)


def derive_seed(seed: int, *labels: int) -> int:
    """Stable sub-stream seed: advance a splitmix stream keyed by labels."""
    s = SplitMix64(seed)
    out = s.next_uint64()
    for label in labels:
        s = SplitMix64(out ^ (label & _MASK64))
        out = s.next_uint64()
    return out
