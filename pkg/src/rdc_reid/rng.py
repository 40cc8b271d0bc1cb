"""Portable, reproducible random streams.

Streams are Philox-4x64 generators (counter-based, fixed published
constants) whose 64-bit key is derived from integer labels with the
SplitMix64 finaliser. No process-global or platform-default generator is
involved, so a given ``(seed, labels...)`` always yields the same numbers.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One SplitMix64 step: add the golden gamma, then finalise."""
    z = (x + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_key(*words: int) -> int:
    """Fold a sequence of non-negative integers into one 64-bit key."""
    h = 0
    for w in words:
        if w < 0:
            raise ValueError("stream labels must be non-negative")
        h = splitmix64(h ^ (w & _MASK))
    return h


def stream(*words: int) -> np.random.Generator:
    """Independent generator for the stream labelled by ``words``."""
    return np.random.Generator(np.random.Philox(key=derive_key(*words)))
