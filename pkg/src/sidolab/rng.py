"""Counter-based random streams and exact discrete sampling.

Every random draw in the package comes from a Philox stream keyed by
``(seed, stream_index)``, so sample ``i`` of a batch is reproducible without
generating samples ``0..i-1`` first.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

_MASK64 = (1 << 64) - 1


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent generator for ``(seed, index)``; both are reduced mod 2**64."""
    key = ((index & _MASK64) << 64) | (seed & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def draw_u64(rng: np.random.Generator, size: int | None = None):
    if size is None:
        return int(rng.integers(0, 1 << 64, dtype=np.uint64))
    return rng.integers(0, 1 << 64, size=size, dtype=np.uint64)


def uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Exactly uniform integer in ``[0, bound)`` for arbitrarily large ``bound``."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound == 1:
        return 0
    bits = (bound - 1).bit_length()
    words = (bits + 63) // 64
    extra = words * 64 - bits
    while True:
        x = 0
        for _ in range(words):
            x = (x << 64) | draw_u64(rng)
        x >>= extra
        if x < bound:
            return x


def choose_weighted(rng: np.random.Generator, weights: Sequence[int]) -> int:
    """Index ``i`` with probability ``weights[i] / sum(weights)`` (nonnegative ints)."""
    total = sum(weights)
    if total <= 0:
        raise ValueError("weights must have positive total")
    r = uniform_below(rng, total)
    acc = 0
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    raise AssertionError("unreachable")


def choose_rational(rng: np.random.Generator, probs: Sequence[Fraction]) -> int:
    """Sample an index from exact rational weights (need not be normalized)."""
    den = lcm(*(p.denominator for p in probs)) if probs else 1
    return choose_weighted(rng, [p.numerator * (den // p.denominator) for p in probs])


def bernoulli_below(draw: int, p: Fraction) -> bool:
    """True iff the dyadic value ``draw / 2**64`` is strictly below ``p``."""
    return draw * p.denominator < p.numerator << 64
