"""Stable seed derivation: a seed is a hash of its position in the run."""

import hashlib


def derive_seed(master: int, *parts) -> int:
    """64-bit seed from ``(master, *parts)``; independent of scheduling order."""
    key = "/".join([str(int(master))] + [str(p) for p in parts])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "little")
