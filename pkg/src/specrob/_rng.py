"""Deterministic random stream derivation.

Every stochastic operation in the toolkit draws from a stream keyed by
(seed, purpose tags...). Streams with different keys are statistically
independent, and a given key always replays the same draws, so parallel
workers that partition work by key produce the same results as a serial
run.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _MASK64
    digest = hashlib.sha256(str(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def rng_for(seed: int, *tags) -> np.random.Generator:
    """Return a PCG64 generator for the stream keyed by (seed, *tags).

    Tags may be ints or strings; strings are hashed platform-independently
    (no reliance on Python's randomized hash).
    """
    entropy = [int(seed) & _MASK64] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
