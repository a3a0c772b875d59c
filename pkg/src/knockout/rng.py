"""Pinned PRNG: xoshiro256++ seeded via SplitMix64, with indexed substreams.

The Monte Carlo oracle needs a generator that is cheap inside a compiled
kernel, re-implementable bit-for-bit in pure Python for the readable
reference simulator, and able to hand out independent substreams by block
index so aggregate counts cannot depend on worker scheduling.  numpy's
Generator API hides stream internals behind its bit-generator abstraction,
which defeats the bit-for-bit requirement, so the algorithms are pinned
here explicitly (all arithmetic mod 2**64):

  SplitMix64 step:   state += 0x9E3779B97F4A7C15, output = mix(state)
  mix(z):            z ^= z >> 30; z *= 0xBF58476D1CE4E5B9
                     z ^= z >> 27; z *= 0x94D049BB133111EB
                     z ^= z >> 31
  substream_seed(seed, i) = mix(seed + (i + 1) * 0x9E3779B97F4A7C15)
  xoshiro256++ state = four successive SplitMix64 outputs from the seed
  next u64:          rotl(s0 + s3, 23) + s0, then the xoshiro state update
  uniform in [0,1):  (next_u64 >> 11) * 2.0**-53

The compiled kernel in :mod:`knockout._kernel` implements the same streams
with uint64 arithmetic; tests assert game-by-game equality.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

__all__ = ["splitmix64_mix", "substream_seed", "Xoshiro256PlusPlus"]


def splitmix64_mix(z: int) -> int:
    """The SplitMix64 finalizer on a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def substream_seed(seed: int, index: int) -> int:
    """Seed for substream `index` (>= 0) of the stream rooted at `seed`."""
    if index < 0:
        raise ValueError(f"substream index must be >= 0, got {index}")
    return splitmix64_mix(seed + (index + 1) * _GOLDEN)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


class Xoshiro256PlusPlus:
    """xoshiro256++ with SplitMix64 state initialisation."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        s = seed & _MASK
        state = []
        for _ in range(4):
            s = (s + _GOLDEN) & _MASK
            state.append(splitmix64_mix(s))
        self._s = state

    def next_uint64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_uint64() >> 11) * (2.0**-53)
