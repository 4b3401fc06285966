"""Deterministic pseudo-random numbers used by the stochastic primitives.

Every draw the clustering algorithms make (ICA starting vectors, k-means++
center picks) flows through :class:`SeededPrng`, a splitmix64-seeded
xorshift128+ generator. The stream depends only on the 64-bit seed, never on
platform, interpreter hash state, or global RNG singletons.

Bulk synthetic-data sampling lives elsewhere (``data.make_blobs`` uses a
seeded numpy generator); this class covers the small algorithmic draws where
a hand-rolled stream keeps the whole decision path auditable.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 state once; returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into a single 64-bit seed, order-sensitively."""
    state = 0x9E3779B97F4A7C15
    for p in parts:
        state, out = splitmix64((state ^ (int(p) & _MASK64)) & _MASK64)
        state = out
    return state


class SeededPrng:
    """xorshift128+ generator with splitmix64 seed expansion.

    Same seed, same stream, on every platform. Not cryptographic.
    """

    def __init__(self, seed: int):
        s = int(seed) & _MASK64
        s, self._s0 = splitmix64(s)
        s, self._s1 = splitmix64(s)
        if self._s0 == 0 and self._s1 == 0:
            self._s0 = 0x41C64E6D
        self._spare_normal = None

    def next_u64(self) -> int:
        s1 = self._s0
        s0 = self._s1
        self._s0 = s0
        s1 = (s1 ^ (s1 << 23)) & _MASK64
        self._s1 = (s1 ^ s0 ^ (s1 >> 17) ^ (s0 >> 26)) & _MASK64
        return (self._s1 + s0) & _MASK64

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the high 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        """Standard normal via Box-Muller; draws are consumed in pairs."""
        if self._spare_normal is not None:
            value = self._spare_normal
            self._spare_normal = None
            return value
        u1 = self.uniform()
        while u1 <= 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(theta)
        return radius * math.cos(theta)

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n) without modulo bias."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (_MASK64 + 1) - ((_MASK64 + 1) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def choice_weighted(self, cumulative_weights) -> int:
        """Index drawn proportionally to weights given as a cumulative sum."""
        total = cumulative_weights[-1]
        if total <= 0:
            raise ValueError("weights must have positive sum")
        target = self.uniform() * total
        lo, hi = 0, len(cumulative_weights) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cumulative_weights[mid] <= target:
                lo = mid + 1
            else:
                hi = mid
        return lo


def node_seed(base_seed: int, sample_indices) -> int:
    """Seed for per-node randomness, derived from the node's sample set.

    Keyed on the samples rather than the node id so that re-splitting the
    same sample set (interactive edits, replays) reproduces the exact same
    draws regardless of how many ids were allocated in between.
    """
    state = mix_seed(base_seed, len(sample_indices))
    for i in sample_indices:
        state, _ = splitmix64(state ^ (int(i) & _MASK64))
    return state
