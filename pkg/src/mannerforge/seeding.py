"""Deterministic RNG derivation.

Independent streams are derived by hashing a seed together with a path of
labels (example index, sampling slot, split name), so generation order and
worker layout never influence the values a consumer sees.
"""
from __future__ import annotations

import hashlib
import random


def derive_seed(*parts) -> int:
    key = ":".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "big")


def derive_rng(*parts) -> random.Random:
    return random.Random(derive_seed(*parts))
