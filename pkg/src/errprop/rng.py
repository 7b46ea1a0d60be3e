"""Counter-based random streams.

Every trajectory owns one stream. The stream seed is a fixed function of
``(master_seed, index)``::

    seed(master, index) = mix64(master XOR mix64((index + 1) * GOLDEN))

and the stream itself is SplitMix64: the 64-bit state is advanced by
``GOLDEN = 0x9E3779B97F4A7C15`` and each output is ``mix64(state)``, with::

    mix64(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
              z = (z ^ (z >> 27)) * 0x94D049BB133111EB
              return z ^ (z >> 31)

all arithmetic modulo 2**64. Uniform doubles take the top 53 bits of an
output and scale by 2**-53, so they lie in [0, 1).

Because a trajectory's numbers depend only on its own index, results do not
depend on how trajectories are batched or how many threads run them.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

_U_GOLDEN = np.uint64(GOLDEN)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_U_ONE = np.uint64(1)
_S11 = np.uint64(11)
_S27 = np.uint64(27)
_S30 = np.uint64(30)
_S31 = np.uint64(31)
_INV_2_53 = 1.0 / 9007199254740992.0


def mix64_reference(z: int) -> int:
    """Pure-Python SplitMix64 finalizer; the jitted path must agree with it."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def stream_seed_reference(master_seed: int, index: int) -> int:
    return mix64_reference((master_seed & MASK64) ^ mix64_reference(((index + 1) * GOLDEN) & MASK64))


@njit(cache=True, nogil=True)
def mix64(z):
    z = (z ^ (z >> _S30)) * _U_MUL1
    z = (z ^ (z >> _S27)) * _U_MUL2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def stream_seed(master_seed, index):
    """Seed of stream ``index`` under ``master_seed`` (both uint64)."""
    return mix64(master_seed ^ mix64((index + _U_ONE) * _U_GOLDEN))


@njit(cache=True, nogil=True)
def next_u64(state):
    """Advance a one-element uint64 state array and return the next output."""
    state[0] += _U_GOLDEN
    return mix64(state[0])


@njit(cache=True, nogil=True)
def next_uniform(state):
    return float(next_u64(state) >> _S11) * _INV_2_53


class RandomStream:
    """One trajectory's stream, usable from Python.

    Wraps the mutable one-element state array consumed by the jitted kernels,
    so Python-level single-step operations draw exactly the numbers a full
    jitted trajectory would.
    """

    __slots__ = ("state",)

    def __init__(self, master_seed: int = 0, index: int = 0):
        if not 0 <= master_seed <= MASK64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if index < 0:
            raise ValueError("stream index must be nonnegative")
        self.state = np.array([stream_seed_reference(master_seed, index)], dtype=np.uint64)

    @classmethod
    def from_state(cls, state: int) -> RandomStream:
        stream = cls.__new__(cls)
        stream.state = np.array([state & MASK64], dtype=np.uint64)
        return stream

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def random(self) -> float:
        return next_uniform(self.state)
