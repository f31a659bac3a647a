"""Seeded portable pseudo-random numbers (xorshift64*).

All stochastic sampling in the toolkit goes through this generator so that
runs are bit-reproducible across platforms and numpy versions.  The
generator is the classic 64-bit xorshift with a multiplicative output
scramble; doubles are built from the top 53 bits.
"""

import numpy as np

_MASK = (1 << 64) - 1
_MULT = 2685821657736338717


class Xorshift64Star:
    """xorshift64* stream; ``seed`` must be a nonzero 64-bit integer."""

    def __init__(self, seed):
        s = int(seed) & _MASK
        if s == 0:
            # state must never be zero; any fixed nonzero substitute works
            s = 0x9E3779B97F4A7C15
        self._state = s

    def next_uint64(self):
        x = self._state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK
        x ^= (x >> 27)
        self._state = x
        return (x * _MULT) & _MASK

    def next_float(self):
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_uint64() >> 11) * (1.0 / 9007199254740992.0)

    def floats(self, n):
        """Array of ``n`` uniform doubles in [0, 1)."""
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            out[i] = self.next_float()
        return out

    def uniform(self, lo, hi, n=None):
        if n is None:
            return lo + (hi - lo) * self.next_float()
        return lo + (hi - lo) * self.floats(n)
