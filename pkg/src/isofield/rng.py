"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
derived from ``(seed, *keys)``. A realization, permutation or search draw is
addressed by its integer keys, so results do not depend on evaluation order
or on how work is split across processes.
"""
import numpy as np


def stream(seed, *keys):
    """Independent Philox generator addressed by ``seed`` and integer ``keys``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


def permutations(seed, n, n_perm, key=0):
    """``n_perm`` permutations of ``range(n)``; row ``p`` depends only on ``(seed, key, p)``."""
    out = np.empty((n_perm, n), dtype=np.int64)
    for p in range(n_perm):
        out[p] = stream(seed, key, p).permutation(n)
    return out
