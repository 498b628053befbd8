"""Counter-based random streams keyed by (seed, stream ids)."""

import numpy as np


def make_rng(seed, *stream):
    """Return an independent Philox generator for ``(seed, *stream)``.

    Streams are derived by hashing the key tuple through ``SeedSequence``, so
    the same key always yields the same draws regardless of call order or of
    which worker thread asks for it.
    """
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = tuple(int(s) for s in stream)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
