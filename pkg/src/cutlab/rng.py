"""Counter-based PRNG for reproducible instance generation.

SplitMix64: output k is a fixed 64-bit mix of seed + k * golden gamma, so the
stream is a pure function of (seed, counter) and per-task seeds can be derived
without sharing state.  Gaussians come from Box-Muller on two uniform draws;
continuous values are quantized to rationals with denominator 10**6 so every
generated instance is exactly representable.
"""

from __future__ import annotations

import math

from .rat import Rat, rat

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive(seed: int, *indices: int) -> int:
    """Per-task seed: chained mixes of seed with each index."""
    z = mix64(seed & _MASK)
    for ix in indices:
        z = mix64((z ^ mix64((ix & _MASK) ^ _GAMMA)) + _GAMMA)
    return z


class SplitMix64:
    def __init__(self, seed: int):
        self._seed = seed & _MASK
        self._k = 0

    def next_u64(self) -> int:
        out = mix64((self._seed + self._k * _GAMMA) & _MASK)
        self._k += 1
        return out

    def u01(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.u01()

    def randint(self, a: int, b: int) -> int:
        """Uniform integer in [a, b], rejection-sampled to remove modulo bias."""
        span = b - a + 1
        if span <= 0:
            raise ValueError("empty range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            v = self.next_u64()
            if v < limit:
                return a + v % span

    def gauss(self, mean: float = 0.0, sd: float = 1.0) -> float:
        """One Box-Muller normal draw (two uniforms consumed per call)."""
        u1 = (self.next_u64() >> 11) + 1  # in [1, 2^53], avoids log(0)
        u2 = self.u01()
        z = math.sqrt(-2.0 * math.log(u1 / float(1 << 53))) * math.cos(2.0 * math.pi * u2)
        return mean + sd * z


def quantize(x: float, denominator: int = 10**6) -> Rat:
    """Nearest rational with the given denominator."""
    return rat(round(x * denominator), denominator)
