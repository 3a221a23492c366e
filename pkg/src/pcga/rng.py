"""Reproducible random streams.

All randomness comes from xoshiro256** (Blackman & Vigna). A stream's
256-bit state is filled from a 64-bit seed with SplitMix64, and per-run seeds
are derived from ``(master_seed, *indices)`` by chaining the SplitMix64
finalizer. The same derivation in any language yields the same runs.

The generator functions are numba-compiled and operate on a ``uint64[4]``
state array, so the compiled engine and the Python-level helpers share one
code path.
"""

from __future__ import annotations

import numba as nb
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_U64_5 = np.uint64(5)
_U64_9 = np.uint64(9)
_U64_7 = np.uint64(7)
_U64_11 = np.uint64(11)
_U64_17 = np.uint64(17)
_U64_45 = np.uint64(45)
_U64_64 = np.uint64(64)
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    """SplitMix64 output finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, count: int) -> list[int]:
    """First ``count`` outputs of SplitMix64 started at ``seed``."""
    out = []
    x = seed & MASK64
    for _ in range(count):
        x = (x + GOLDEN_GAMMA) & MASK64
        out.append(mix64(x))
    return out


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive a 64-bit seed from a master seed and a tuple of indices.

    The result depends only on the values, never on the order in which
    seeds are requested.
    """
    h = mix64((master_seed + GOLDEN_GAMMA) & MASK64)
    for i in indices:
        if i < 0:
            raise ValueError("seed indices must be non-negative")
        h = mix64((h ^ mix64((i + GOLDEN_GAMMA) & MASK64)) + GOLDEN_GAMMA)
    return h


@nb.njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (_U64_64 - k))


@nb.njit(cache=True)
def next_u64(s):
    """Advance the state and return the next 64-bit output."""
    s0 = s[0]
    s1 = s[1]
    s2 = s[2]
    s3 = s[3]
    result = _rotl(s1 * _U64_5, _U64_7) * _U64_9
    t = s1 << _U64_17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _U64_45)
    s[0] = s0
    s[1] = s1
    s[2] = s2
    s[3] = s3
    return result


@nb.njit(cache=True)
def next_double(s):
    """Uniform double in [0, 1) from the top 53 bits."""
    return np.float64(next_u64(s) >> _U64_11) * _INV_2_53


@nb.njit(cache=True)
def next_double_open_closed(s):
    """Uniform double in (0, 1]."""
    return 1.0 - next_double(s)


@nb.njit(cache=True)
def randbelow(s, k):
    """Unbiased integer in [0, k) by rejection on the low residue class."""
    kk = np.uint64(k)
    threshold = (np.uint64(0) - kk) % kk
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % kk)


class RngStream:
    """One independent xoshiro256** stream.

    ``state`` is the live ``uint64[4]`` array handed to compiled code; it is
    mutated in place by every draw.
    """

    algorithm = "xoshiro256**/splitmix64"

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        words = splitmix64(self.seed, 4)
        if not any(words):
            words[0] = GOLDEN_GAMMA
        self.state = np.array(words, dtype=np.uint64)

    @classmethod
    def for_run(cls, master_seed: int, *indices: int) -> RngStream:
        return cls(derive_seed(master_seed, *indices))

    def copy(self) -> RngStream:
        other = RngStream.__new__(RngStream)
        other.seed = self.seed
        other.state = self.state.copy()
        return other

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def random(self) -> float:
        return float(next_double(self.state))

    def integers(self, k: int) -> int:
        if k < 1:
            raise ValueError("upper bound must be positive")
        return int(randbelow(self.state, k))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed:#x})"
