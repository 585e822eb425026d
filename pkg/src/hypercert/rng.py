"""Deterministic counter-based random streams.

Every sampling routine derives its generator from a root seed plus a path of
labels via :func:`substream`.  Streams for distinct paths are statistically
independent and do not depend on the order in which they are consumed, so
Monte-Carlo work can be split across threads or processes without changing
any result.
"""

import hashlib

import numpy as np


def substream(seed: int, *path) -> np.random.Generator:
    """Generator keyed by (seed, *path); identical arguments give identical streams."""
    h = hashlib.sha256(repr((int(seed),) + tuple(path)).encode()).digest()
    key = int.from_bytes(h[:16], "little")
    return np.random.Generator(np.random.Philox(key=key))
