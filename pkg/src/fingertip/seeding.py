"""Deterministic seed derivation.

All randomness in the package flows from explicit integer seeds. Experiments
split one top-level seed into per-stage sub-seeds with a stable hash, so
changing how one stage consumes randomness never perturbs another.
"""

import hashlib

import numpy as np


def derive_seed(master: int, *labels) -> int:
    """Stable 63-bit sub-seed for (master, labels).

    Labels may be strings or integers; the digest is unchanged across runs,
    platforms, and Python versions (unlike hash()).
    """
    digest = hashlib.sha256()
    digest.update(str(int(master)).encode())
    for label in labels:
        digest.update(b"\x1f")
        digest.update(str(label).encode())
    return int.from_bytes(digest.digest()[:8], "little") & 0x7FFF_FFFF_FFFF_FFFF


def rng_for(master: int, *labels) -> np.random.Generator:
    """Generator seeded from derive_seed(master, *labels)."""
    return np.random.default_rng(derive_seed(master, *labels))
