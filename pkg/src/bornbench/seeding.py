"""Deterministic seed derivation.

Every run consumes randomness from a single root seed. Component streams are
derived by hashing ``root/label/index`` so that adding or reordering
components never shifts another component's stream.
"""

from __future__ import annotations

import hashlib

import numpy as np

_SEED_BYTES = 8


def derive_seed(root: int, label: str, index: int = 0) -> int:
    """Derive a child seed from a root seed, a component label and an index."""
    digest = hashlib.sha256(f"{root}/{label}/{index}".encode()).digest()
    return int.from_bytes(digest[:_SEED_BYTES], "big") >> 1  # keep it positive


def derive_rng(root: int, label: str, index: int = 0) -> np.random.Generator:
    """Generator seeded by :func:`derive_seed`."""
    return np.random.default_rng(derive_seed(root, label, index))
