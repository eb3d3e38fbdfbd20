"""Deterministic random streams built on the Philox counter-based generator.

Every random decision in the library flows through :func:`stream`, which maps a
64-bit user seed plus a tuple of integer tags to an independent Philox
bitstream.  The derivation is pure integer arithmetic (splitmix64 folding), so
streams can be recreated in any order: parallel workers drawing from distinct
tags never contend or depend on scheduling.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15

# Tag namespace, one per sampling site.
FPS = 0x11
BALL = 0x22
MASK = 0x33
MLP = 0x44
GEN = 0x55
CHECK = 0x66


def _splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def fold(seed: int, *tags: int) -> int:
    """Fold ``tags`` into ``seed``, producing a new 64-bit seed.

    Used to derive per-work-item seeds (e.g. one per key point) from a single
    pipeline seed.  Folding is associative enough for our purposes: distinct
    tag tuples give unrelated streams.
    """
    acc = seed & _MASK64
    for t in tags:
        acc = _splitmix64(acc ^ (t & _MASK64))
    return acc


def stream(seed: int, *tags: int) -> np.random.Generator:
    """Return a fresh Philox generator keyed by ``(seed, tags)``.

    The 128-bit Philox key is ``seed`` in the high word and the folded tags in
    the low word, so the same arguments always reproduce the same bitstream.
    """
    key = ((seed & _MASK64) << 64) | fold(seed, *tags)
    return np.random.Generator(np.random.Philox(key=key))
