"""Seeded, splittable random streams built on the splitmix64 mixer.

All stochastic generation in this package draws from :class:`Stream` so that
a given (seed, draw order) pair produces identical values on every platform
and in every host language that implements the same constants:

    state advance:  state = (state + 0x9E3779B97F4A7C15) mod 2^64
    output mix:     z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
                    z ^= z >> 27; z *= 0x94D049BB133111EB
                    z ^= z >> 31

Child seeds come from :func:`mix`, which feeds ``seed XOR (index+1)*GOLDEN``
through one output-mix round.  Floats are built from the top 53 bits of a
64-bit draw, integers by modulo reduction; both are part of the contract.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & _MASK64
    z = (z ^ (z >> 27)) * _MIX2 & _MASK64
    return z ^ (z >> 31)


def mix(seed: int, index: int) -> int:
    """Derive the child seed for (seed, index); stable across runs and hosts."""
    return _mix64((seed ^ ((index + 1) * _GOLDEN & _MASK64)) & _MASK64)


class Stream:
    """Sequential splitmix64 draw stream."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def fork(self, index: int) -> "Stream":
        """Independent child stream; draws never overlap with the parent's."""
        return Stream(mix(self._state, index))
