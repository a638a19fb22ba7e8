"""Reproducible random streams.

Every exogenous class source and every node's service process owns an
independent PCG64 stream derived from ``(master_seed, replication, role, key)``.
Class streams are keyed by a CRC of the class name and node streams by node id,
so adding a class or node leaves all other streams untouched.
"""

from __future__ import annotations

import zlib
from typing import Iterator

import numpy as np

SOURCE = 0
SERVICE = 1

_BLOCK = 4096


def stream_seed(master_seed: int, replication: int, role: int, key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(replication, role, key))


def class_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def exponential_stream(seed: np.random.SeedSequence, rate: float, block: int = _BLOCK) -> Iterator[float]:
    """Infinite iterator of Exp(rate) variates by inverse transform of uniforms."""
    gen = np.random.Generator(np.random.PCG64(seed))
    scale = 1.0 / rate
    while True:
        u = gen.random(block)
        yield from (-np.log1p(-u) * scale).tolist()
