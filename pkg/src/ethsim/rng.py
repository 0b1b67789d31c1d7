"""Named randomness substreams.

All stochastic behaviour in the package flows from a single experiment seed
through named substreams, so shot noise, state preparation and repetitions
can be varied or replayed independently while re-runs stay byte-identical.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _as_entropy(key: object) -> int:
    """Map an arbitrary label to a stable nonnegative integer."""
    if isinstance(key, (int, np.integer)):
        return int(key) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(repr(key).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def substream(seed: int, *keys: object) -> np.random.Generator:
    """Return a generator for the substream identified by (seed, *keys).

    The mapping is platform independent: string labels are hashed with
    SHA-256, integers pass through, and the resulting tuple feeds a numpy
    SeedSequence. Identical arguments always give identical streams.
    """
    entropy = [_as_entropy(seed)] + [_as_entropy(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *keys: object) -> int:
    """Collapse (seed, *keys) into a single stable integer seed."""
    entropy = [_as_entropy(seed)] + [_as_entropy(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])
