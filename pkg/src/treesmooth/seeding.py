"""Deterministic seed derivation.

Every stochastic operation in this package draws from a numpy Generator
that the caller constructs explicitly.  Child seeds are derived from a
single master seed with SHA-256 over ``"{master_seed}/{tag0}/{tag1}/..."``
(first 8 digest bytes, big-endian, top bit cleared), so independent
purposes such as splitting, training, and probing get decorrelated but
fully reproducible streams.
"""

from __future__ import annotations

import hashlib

import numpy as np


def child_seed(master_seed: int, *tags: object) -> int:
    """63-bit child seed for (master_seed, *tags)."""
    text = "/".join([str(int(master_seed)), *(str(t) for t in tags)])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def make_rng(master_seed: int, *tags: object) -> np.random.Generator:
    """Generator seeded by :func:`child_seed` of (master_seed, *tags)."""
    return np.random.default_rng(child_seed(master_seed, *tags))
