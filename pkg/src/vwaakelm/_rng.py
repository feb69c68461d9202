"""Deterministic 64-bit PRNG used everywhere randomness is needed.

The generator is SplitMix64 (Steele, Lea & Flood's mix function as used in
java.util.SplittableRandom). It is tiny, has a documented closed-form state
update, and produces identical streams on every platform and Python/numpy
version, which is what the reproducibility contracts of this package rest on:

* state_{k+1} = (state_k + 0x9E3779B97F4A7C15) mod 2^64
* output_k    = mix(state_{k+1}) where mix is the xorshift-multiply chain below

Derived conventions (all relied on by the determinism tests):

* uniforms take the top 53 bits of one output word: u = (word >> 11) * 2^-53
* normals use Box-Muller and always consume exactly two words
* integer draws in [lo, hi] reduce one word modulo the span
* shuffles are descending Fisher-Yates with the modulo reduction above

Substreams are derived by hashing (seed, *parts) through the same mix
function, so different subsystems and different (iteration, candidate)
pairs never share a stream.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def derive_seed(seed: int, *parts: int | str) -> int:
    """Deterministically map (seed, parts...) to a 64-bit substream seed.

    Parts may be ints or strings; strings are hashed with FNV-1a so the
    result is stable across processes and platforms.
    """
    h = _mix64(seed & _MASK64)
    for p in parts:
        if isinstance(p, str):
            ph = _fnv1a(p.encode("utf-8"))
        elif isinstance(p, int):
            ph = (p * _GOLDEN) & _MASK64
        else:
            raise TypeError(f"seed parts must be int or str, got {type(p).__name__}")
        h = _mix64(h ^ ph)
    return h


class SplitMix64:
    """SplitMix64 stream with the derived draws documented in the module docstring."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        """Uniform draw in [lo, hi) with 53-bit resolution."""
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        if hi < lo:
            raise ValueError("randint range is empty")
        return lo + self.next_u64() % (hi - lo + 1)

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Gaussian draw via Box-Muller; always consumes exactly two words."""
        # (0, 1] uniform so log() is safe.
        u1 = ((self.next_u64() >> 11) + 1) * (1.0 / (1 << 53))
        u2 = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        r = math.sqrt(-2.0 * math.log(u1))
        return mu + sigma * r * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """In-place descending Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
