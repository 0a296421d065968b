"""SplitMix64: a tiny 64-bit generator whose stream is fully defined by three constants.

    state  += 0x9E3779B97F4A7C15
    z       = state
    z       = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2**64)
    z       = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2**64)
    output  = z ^ (z >> 31)

Any language with wrapping 64-bit arithmetic reproduces the same stream, which keeps
phantoms, class balancing and splits identical across implementations.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int) -> None:
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def u64_array(self, n: int) -> np.ndarray:
        """Next ``n`` outputs as a uint64 array (same values as ``n`` calls to next_u64)."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GAMMA)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
            z = z ^ (z >> np.uint64(31))
        self.state = (self.state + n * GAMMA) & MASK64
        return z

    def uniform(self, n: int) -> np.ndarray:
        """Doubles in [0, 1) from the top 53 bits of each output."""
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normal(self, n: int) -> np.ndarray:
        """Standard normals by Box-Muller; consumes two outputs per value."""
        u = self.uniform(2 * n).reshape(n, 2)
        u1 = 1.0 - u[:, 0]  # (0, 1], keeps log finite
        return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u[:, 1])

    def below(self, n: int) -> int:
        """Integer in [0, n) by 64x64 -> 128 multiply-high."""
        return (self.next_u64() * n) >> 64

    def permutation(self, n: int) -> np.ndarray:
        """Fisher-Yates shuffle of range(n)."""
        out = np.arange(n, dtype=np.int64)
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out

    def sample(self, n: int, k: int) -> np.ndarray:
        """``k`` distinct indices from range(n), returned in ascending order."""
        if k > n:
            raise ValueError(f"cannot draw {k} items from {n}")
        pool = np.arange(n, dtype=np.int64)
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.sort(pool[:k])

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())
