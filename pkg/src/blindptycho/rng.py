"""Deterministic random numbers with a fully documented algorithm.

The core generator is SplitMix64: a 64-bit counter advanced by the
golden-ratio increment 0x9E3779B97F4A7C15 whose output is finalized by two
xorshift-multiply rounds.  It is tiny and trivially portable, so a seed
reproduces the identical stream on any platform or language, which the
trace-level regression tests rely on.  Everything else is derived from that
single stream:

* ``uniform``        53-bit mantissa in [0, 1)
* normal draws       Box-Muller on two uniforms, no cached spare
* ``poisson``        product-of-uniforms inversion below mean 10,
                     Hormann's PTRS transformed rejection above

An ``Rng`` is single-owner mutable state.  Solvers and synthesis routines
each own their instance exclusively; never share one between concurrent
callers.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class Rng:
    """SplitMix64 stream seeded by a 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        return (self.next_u64() >> 11) * 2.0**-53

    def _uniform_pos(self) -> float:
        # (0, 1]; keeps the logarithm in Box-Muller finite.
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def normal(self) -> float:
        """Standard real normal draw (consumes two uniforms)."""
        r = math.sqrt(-2.0 * math.log(self._uniform_pos()))
        return r * math.cos(2.0 * math.pi * self.uniform())

    def complex_normal(self) -> complex:
        """Standard complex normal: real and imaginary parts are N(0, 1/2)."""
        r = math.sqrt(-math.log(self._uniform_pos()))
        phi = 2.0 * math.pi * self.uniform()
        return complex(r * math.cos(phi), r * math.sin(phi))

    def normal_vector(self, n: int) -> np.ndarray:
        return np.array([self.normal() for _ in range(n)], dtype=np.float64)

    def complex_normal_vector(self, n: int) -> np.ndarray:
        return np.array([self.complex_normal() for _ in range(n)], dtype=np.complex128)

    def integer_below(self, n: int) -> int:
        """Integer in [0, n) by Lemire's multiply-shift (bias < n / 2**64)."""
        return (self.next_u64() * n) >> 64

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integer_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def poisson(self, mean: float) -> int:
        if mean < 0 or not math.isfinite(mean):
            raise ValueError("poisson mean must be finite and nonnegative")
        if mean == 0.0:
            return 0
        if mean < 10.0:
            return self._poisson_mult(mean)
        return self._poisson_ptrs(mean)

    def _poisson_mult(self, mean: float) -> int:
        # Knuth's product method: count uniforms until the product drops
        # below exp(-mean).
        limit = math.exp(-mean)
        k = 0
        prod = self.uniform()
        while prod > limit:
            k += 1
            prod *= self.uniform()
        return k

    def _poisson_ptrs(self, mean: float) -> int:
        # Hormann (1993), transformed rejection with squeeze; valid mean >= 10.
        slam = math.sqrt(mean)
        loglam = math.log(mean)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        while True:
            u = self.uniform() - 0.5
            v = self.uniform()
            us = 0.5 - abs(u)
            k = int(math.floor((2.0 * a / us + b) * u + mean + 0.43))
            if us >= 0.07 and v <= vr:
                return k
            if k < 0 or (us < 0.013 and v > us):
                continue
            if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
                    <= k * loglam - mean - math.lgamma(k + 1.0)):
                return k
