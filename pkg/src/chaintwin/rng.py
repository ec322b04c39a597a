"""Counter-based deterministic noise generation.

Draws are keyed by (seed, target id, tick, stream) and hashed through
blake2b, so a value depends only on its key, never on draw order, thread
interleaving, or platform. Two runs with the same seed produce bit-identical
noise everywhere.
"""

from __future__ import annotations

import hashlib

_SCALE = float(1 << 53)


def _digest(seed: int, target: str, tick: int, stream: str) -> int:
    key = f"{seed}:{target}:{tick}:{stream}".encode("utf-8")
    h = hashlib.blake2b(key, digest_size=8)
    return int.from_bytes(h.digest(), "big")


def unit_float(seed: int, target: str, tick: int, stream: str = "") -> float:
    """Uniform float in [0, 1)."""
    return (_digest(seed, target, tick, stream) >> 11) / _SCALE


def symmetric_float(seed: int, target: str, tick: int, magnitude: float,
                    stream: str = "") -> float:
    """Uniform float in [-magnitude, +magnitude]."""
    return (2.0 * unit_float(seed, target, tick, stream) - 1.0) * magnitude


def symmetric_int(seed: int, target: str, tick: int, magnitude: int,
                  stream: str = "") -> int:
    """Uniform integer in [-magnitude, +magnitude], inclusive."""
    if magnitude <= 0:
        return 0
    span = 2 * magnitude + 1
    return _digest(seed, target, tick, stream) % span - magnitude
