"""Seedable, splittable random streams.

Every random draw in the package derives from a single 64-bit master seed.
Substreams are keyed by a scope tuple (e.g. ``(seed, "episode", 3, "learner")``)
hashed into a Philox key, so independent components never share a stream and
results are reproducible regardless of execution order.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "rademacher"]


def _scope_entropy(seed: int, scope: tuple) -> list[int]:
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for part in scope:
        h.update(b"\x1f")
        h.update(repr(part).encode())
    digest = h.digest()
    # four 64-bit words of entropy
    return [int.from_bytes(digest[8 * i : 8 * (i + 1)], "little") for i in range(4)]


def substream(seed: int, *scope) -> np.random.Generator:
    """Return a generator for the stream identified by ``(seed, *scope)``.

    Philox is counter-based, so distinct keys give independent streams.
    """
    ss = np.random.SeedSequence(_scope_entropy(seed, scope))
    return np.random.Generator(np.random.Philox(ss))


def rademacher(rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw uniform signs in {-1, +1}."""
    return rng.integers(0, 2, size=size) * 2 - 1
