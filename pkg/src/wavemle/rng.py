"""Deterministic stream derivation for parallel Monte Carlo.

Every (replication, mode) pair owns a counter-based bit generator keyed by a
SplitMix64 hash chain over (base_seed, replication, mode).  Streams are
therefore independent of worker scheduling, of how replications are spread
over processes, and of the total number of modes: adding modes never perturbs
the paths of earlier modes.

Reproducibility contract: Philox4x64 counter-based generator, keyed as below,
with normal variates drawn by numpy's ziggurat sampler
(``Generator.standard_normal``).  Both choices are fixed.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
# Arbitrary fixed odd salts deconfounding the replication and mode axes.
_REP_SALT = 0xA3EC647659359ACD
_MODE_SALT = 0x9FB21C651E98DF25


def splitmix64(x: int) -> int:
    """One SplitMix64 finalizer step on a 64-bit word."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def replication_key(base_seed: int, replication: int) -> int:
    """64-bit key prefix shared by all mode streams of one replication."""
    h = splitmix64(base_seed & _MASK64)
    return splitmix64(h ^ ((replication * _REP_SALT) & _MASK64))


def stream_key(base_seed: int, replication: int, mode: int) -> tuple[int, int]:
    """Two Philox key words for the stream of one (replication, mode) pair."""
    h = splitmix64(replication_key(base_seed, replication) ^ ((mode * _MODE_SALT) & _MASK64))
    return h, splitmix64(h)


def mode_generator(base_seed: int, replication: int, mode: int) -> np.random.Generator:
    """Fresh generator for the Brownian path of ``mode`` within ``replication``."""
    key = np.asarray(stream_key(base_seed, replication, mode), dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
