"""Named random sub-streams derived from one integer seed."""
from __future__ import annotations

import zlib

import numpy as np

STREAMS = ("synthesis", "louvain", "anneal")


def stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for ``name``; same (seed, name) gives the same stream."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1), key])))


def derive_seed(seed: int, name: str) -> int:
    """Plain integer seed for a named stream (for APIs that take ints)."""
    return int(stream(seed, name).integers(0, 2**63 - 1))
