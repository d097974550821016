"""Counter-based random streams usable from numba kernels.

Draw ``i`` of a stream is ``mix64(key + i * GOLDEN)``, where ``mix64`` is the
SplitMix64 finalizer and ``key`` is itself hashed from
``(seed, replicate, stream)``.  No draw depends on any other draw, so
replicates can be generated in any order, on any worker, with identical
results.

Stream state is a small ``uint64`` array so it can be passed into ``njit``
functions without jitclass overhead::

    [seed, stream, replicate, key, counter]
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_GOLDEN_REPLICATE = np.uint64(0xD1B54A32D192ED03)
_GOLDEN_STREAM = np.uint64(0x8CB92BA72F3D8DD7)
_SEED_SALT = np.uint64(0x243F6A8885A308D3)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_MASK32 = np.uint64(0xFFFFFFFF)

STATE_SIZE = 5

_TWO_M53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _C1
    z = (z ^ (z >> np.uint64(27))) * _C2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def stream_key(seed, replicate, stream):
    k = mix64(seed ^ _SEED_SALT)
    k = mix64(k + (replicate + np.uint64(1)) * _GOLDEN_REPLICATE)
    return mix64(k + (stream + np.uint64(1)) * _GOLDEN_STREAM)


def new_state(seed: int, replicate: int = 0, stream: int = 0) -> np.ndarray:
    """Fresh stream state for ``(seed, replicate, stream)``."""
    for name, value in (("seed", seed), ("replicate", replicate), ("stream", stream)):
        if not 0 <= int(value) < 2**64:
            raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")
    st = np.zeros(STATE_SIZE, dtype=np.uint64)
    st[0] = seed
    st[1] = stream
    reset_state(st, np.uint64(replicate))
    return st


@njit(cache=True)
def reset_state(st, replicate):
    """Point ``st`` at the start of another replicate with the same seed and stream."""
    r = np.uint64(replicate)
    st[2] = r
    st[3] = stream_key(st[0], r, st[1])
    st[4] = np.uint64(0)


@njit(cache=True)
def next_u64(st):
    c = st[4] + np.uint64(1)
    st[4] = c
    return mix64(st[3] + c * GOLDEN)


@njit(cache=True)
def next_uniform(st):
    """Uniform double on [0, 1) with 53 random bits."""
    return float(next_u64(st) >> np.uint64(11)) * _TWO_M53


@njit(cache=True)
def next_below(st, m):
    """Uniform integer on {0, ..., m-1}, 1 <= m < 2**32, without modulo bias.

    Lemire's multiply-shift on the top 32 bits, rejecting the short residue
    class.
    """
    mm = np.uint64(m)
    prod = (next_u64(st) >> np.uint64(32)) * mm
    low = prod & _MASK32
    if low < mm:
        threshold = (np.uint64(4294967296) - mm) % mm
        while low < threshold:
            prod = (next_u64(st) >> np.uint64(32)) * mm
            low = prod & _MASK32
    return np.int64(prod >> np.uint64(32))


@njit(cache=True)
def next_sign(st):
    return 1.0 if (next_u64(st) >> np.uint64(63)) else -1.0


@njit(cache=True)
def next_normal(st):
    """Standard normal by the Box-Muller cosine branch."""
    u1 = 1.0 - next_uniform(st)  # (0, 1]
    u2 = next_uniform(st)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


class RandomStream:
    """Python-side handle on one counter-based stream.

    Kernels take ``stream.state`` directly; the methods here are for
    small-scale use and tests.
    """

    def __init__(self, seed: int, replicate: int = 0, stream: int = 0):
        self.seed = int(seed)
        self.replicate = int(replicate)
        self.stream = int(stream)
        self.state = new_state(self.seed, self.replicate, self.stream)

    def u64(self) -> int:
        return int(next_u64(self.state))

    def uniform(self) -> float:
        return float(next_uniform(self.state))

    def below(self, m: int) -> int:
        if not 1 <= m < 2**32:
            raise ValueError(f"bound must lie in [1, 2**32), got {m}")
        return int(next_below(self.state, m))

    def bernoulli(self, p: float) -> bool:
        return float(next_uniform(self.state)) < p

    def normal(self) -> float:
        return float(next_normal(self.state))

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, replicate={self.replicate}, stream={self.stream})"


def as_stream(randomness) -> RandomStream:
    """Accept a RandomStream or an integer seed."""
    if isinstance(randomness, RandomStream):
        return randomness
    if isinstance(randomness, (int, np.integer)) and not isinstance(randomness, bool):
        return RandomStream(int(randomness))
    raise TypeError(f"expected RandomStream or integer seed, got {type(randomness).__name__}")
