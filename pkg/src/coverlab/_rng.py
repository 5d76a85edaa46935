"""Reproducible random streams and replicate-parallel execution.

Every replicate gets its own generator derived from ``(seed, replicate
index)`` through :class:`numpy.random.SeedSequence` spawn keys, so results
never depend on how replicates are scheduled across workers.

Key layout under a master seed:

* ``(0, i)``       replicate ``i``
* ``(0, i, j)``    inner replicate ``j`` nested in outer replicate ``i``
* ``(1, tag)``     auxiliary streams (bootstrap resampling and the like)
"""

import os

import numpy as np
from joblib import Parallel, delayed

REPLICATE = 0
AUXILIARY = 1

BOOTSTRAP_TAG = 0
SEARCH_TAG = 1


def _entropy(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed.entropy, tuple(seed.spawn_key)
    if seed is None:
        raise ValueError("a master seed is required for reproducible runs")
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    return seed, ()


def stream(seed, *key):
    """Return a generator for the stream ``key`` under ``seed``."""
    entropy, base = _entropy(seed)
    ss = np.random.SeedSequence(entropy, spawn_key=base + tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def replicate_stream(seed, index, *inner):
    return stream(seed, REPLICATE, index, *inner)


def auxiliary_stream(seed, tag):
    return stream(seed, AUXILIARY, tag)


def subseed(seed, *key):
    """A master seed for an independent family of replicate streams."""
    entropy, base = _entropy(seed)
    return np.random.SeedSequence(entropy, spawn_key=base + tuple(int(k) for k in key))


def as_generator(rng):
    """Coerce ``rng`` (Generator, int seed or SeedSequence) into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(rng))
    if rng is None:
        raise ValueError("an explicit random stream or seed is required")
    return np.random.default_rng(int(rng))


def resolve_n_jobs(n_jobs):
    if n_jobs is None or n_jobs == 0:
        return 1
    if n_jobs < 0:
        return max(1, (os.cpu_count() or 1) + 1 + n_jobs)
    return int(n_jobs)


def _run_block(func, seed, indices):
    return [func(i, replicate_stream(seed, i)) for i in indices]


def replicate_map(func, seed, reps, n_jobs=1, block_size=256):
    """Evaluate ``func(i, rng_i)`` for ``i in range(reps)``.

    Output order is replicate order regardless of ``n_jobs``; blocks are
    fixed-size so the partition does not depend on the worker count either.
    """
    n_jobs = resolve_n_jobs(n_jobs)
    blocks = [range(lo, min(lo + block_size, reps)) for lo in range(0, reps, block_size)]
    if n_jobs == 1 or len(blocks) <= 1:
        parts = [_run_block(func, seed, b) for b in blocks]
    else:
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_run_block)(func, seed, b) for b in blocks
        )
    out = []
    for part in parts:
        out.extend(part)
    return out
