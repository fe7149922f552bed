"""Seedable random streams shared by the compiled and pure backends.

All stochastic entry points take a ``numpy.random.Generator`` backed by
PCG64.  The inner loops consume the generator's raw 64-bit output
directly (bounded draws by masked rejection, floats by the standard
53-bit shift), so a run is reproducible bit for bit regardless of which
backend executes it.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "substream", "RawBits"]


def stream(seed: int, replica: int = 0) -> np.random.Generator:
    """Independent generator for (seed, replica); replicas never collide."""
    ss = np.random.SeedSequence((int(seed), int(replica)))
    return np.random.Generator(np.random.PCG64(ss))


def substream(rng: np.random.Generator, index: int) -> np.random.Generator:
    """Child generator derived from ``rng`` without disturbing its state."""
    ss = np.random.SeedSequence((int(rng.integers(2**62)), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


class RawBits:
    """Raw 64-bit access to a BitGenerator, mirroring the compiled kernels.

    The mask-and-retry loop below must stay in lockstep with the C
    version: same number of draws in the same order for every bound.
    """

    __slots__ = ("_next", "_state")

    def __init__(self, bit_generator):
        ct = bit_generator.ctypes
        self._next = ct.next_uint64
        self._state = ct.state

    def next64(self) -> int:
        return self._next(self._state)

    def below(self, bound: int) -> int:
        # smallest all-ones mask covering bound-1, then rejection
        mask = (1 << (bound - 1).bit_length()) - 1
        while True:
            r = self._next(self._state) & mask
            if r < bound:
                return r

    def unit(self) -> float:
        return (self._next(self._state) >> 11) * (1.0 / 9007199254740992.0)
