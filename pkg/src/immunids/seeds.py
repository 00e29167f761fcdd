"""Deterministic RNG substreams.

One 64-bit run seed fans out into independent labeled streams (repertoire,
reservoir, traffic, ...) so that consumers never share generator state and
replays are exact regardless of module call order.
"""

from __future__ import annotations

import hashlib
import random

MAX_SEED = 2**64 - 1


def substream(seed: int, label: str) -> random.Random:
    """A random.Random whose state depends only on (seed, label)."""
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed {seed} outside 64-bit range")
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
