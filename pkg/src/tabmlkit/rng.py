"""Seedable 64-bit PRNG used by every stochastic component.

The generator is splitmix64 in counter mode: draw ``i`` of a stream with
seed ``s`` is ``mix64(s + (i+1)*GOLDEN mod 2^64)`` where ``mix64`` is the
splitmix64 finalizer. Independent streams are derived from a master seed
and a text label via ``derive_seed`` (FNV-1a hash of the label folded into
the seed through the same mixer), so every stage, restart, tree, and
permutation gets its own stream and results do not depend on scheduling.

Bulk draws are vectorized on uint64 arrays; uniform doubles take the top
53 bits. Bounded integers use ``floor(uniform * bound)``; the bias is
below ``bound / 2^53`` and irrelevant at the sizes used here.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = float(2.0 ** -53)


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int (mod 2^64)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def derive_seed(seed: int, label: str) -> int:
    """Child seed for the stream named ``label`` under master ``seed``."""
    return mix64((seed & MASK64) ^ mix64(fnv1a64(label)))


class Stream:
    """One deterministic splitmix64 stream."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self._counter = 0

    def spawn(self, label: str) -> "Stream":
        return Stream(derive_seed(self.seed, label))

    def next_u64(self) -> int:
        self._counter += 1
        return mix64((self.seed + self._counter * GOLDEN) & MASK64)

    def u64(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        states = np.uint64(self.seed) + idx * np.uint64(GOLDEN)
        return _mix64_array(states)

    def uniform(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        u = (self.u64(n) >> _S11).astype(np.float64) * _INV53  # [0, 1)
        return low + u * (high - low)

    def next_uniform(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return min(int(self.next_uniform() * bound), bound - 1)

    def integers(self, n: int, bound: int) -> np.ndarray:
        u = self.uniform(n)
        return np.minimum((u * bound).astype(np.int64), bound - 1)

    def normal(self, n: int, loc: float = 0.0, scale: float = 1.0) -> np.ndarray:
        # Box-Muller; u1 shifted into (0, 1] so log never sees zero.
        m = (n + 1) // 2
        u1 = ((self.u64(m) >> _S11).astype(np.float64) + 1.0) * _INV53
        u2 = (self.u64(m) >> _S11).astype(np.float64) * _INV53
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:n]
        return loc + scale * z

    def shuffle(self, items: np.ndarray) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> np.ndarray:
        perm = np.arange(n)
        self.shuffle(perm)
        return perm

    def sample_without_replacement(self, n: int, m: int) -> np.ndarray:
        """m distinct indices from range(n), by partial Fisher-Yates."""
        pool = np.arange(n)
        for i in range(m):
            j = i + self.next_below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:m]

    def weighted_index(self, weights: np.ndarray) -> int:
        """Index drawn with probability proportional to nonnegative weights."""
        total = float(weights.sum())
        if total <= 0.0:
            return self.next_below(len(weights))
        r = self.next_uniform() * total
        cum = np.cumsum(weights)
        return min(int(np.searchsorted(cum, r, side="right")), len(weights) - 1)
