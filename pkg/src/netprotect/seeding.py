"""Deterministic seed derivation.

Every stochastic component takes a 64-bit seed and derives child streams by
mixing the seed with integer indices through ``numpy.random.SeedSequence``.
The same (seed, indices) pair always yields the same stream, independent of
how work is scheduled, which is what makes samplers and experiments
byte-reproducible.
"""

from __future__ import annotations

import numpy as np


def derive_rng(seed: int, *indices: int) -> np.random.Generator:
    """Return a Generator for the child stream (seed, *indices)."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(i) & 0xFFFFFFFFFFFFFFFF for i in indices]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
