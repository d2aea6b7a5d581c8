"""Deterministic event streams and seed derivation.

All randomness flows through numpy Generators seeded by SeedSequence tuples
``(user_seed, domain_tag, index...)``.  Every consumer gets its own stream;
replica r of any experiment is therefore independent of the worker layout and
replayable in isolation.
"""

import numpy as np

# domain tags keep streams for different purposes disjoint under one user seed
DOMAIN_SIMULATE = 0
DOMAIN_COUPLING = 1
DOMAIN_CFTP = 2
DOMAIN_AUX = 3
DOMAIN_STATIONARY = 4

_CHUNK = 4096  # fixed for all drivers; chunk size is part of the determinism contract

_MASK64 = (1 << 64) - 1


def derived_rng(seed: int, *tags: int) -> np.random.Generator:
    """Generator for (seed, tags...); seed is masked to unsigned 64-bit."""
    entropy = (int(seed) & _MASK64,) + tuple(int(t) & _MASK64 for t in tags)
    return np.random.default_rng(np.random.SeedSequence(entropy))


class EventStream:
    """Chunked (waiting time, site, mark) source backing the kernels.

    Waiting times are unit-rate exponentials; the kernels scale them by
    1/(N-1).  Sites are 0-based in [0, n_sites).  The cursor ``j`` points at
    the next unconsumed event; drivers write the kernel's returned cursor
    back and call :meth:`refill` when a kernel reports exhaustion.
    """

    __slots__ = ("rng", "n_sites", "dts", "sites", "marks", "j")

    def __init__(self, rng: np.random.Generator, n_sites: int):
        self.rng = rng
        self.n_sites = n_sites
        self.refill()

    def refill(self) -> None:
        self.dts = self.rng.exponential(1.0, _CHUNK)
        self.sites = self.rng.integers(0, self.n_sites, _CHUNK, dtype=np.int64)
        self.marks = self.rng.random(_CHUNK)
        self.j = 0


class MarkStream:
    """Chunked uniform marks for the refined coupling's second chain."""

    __slots__ = ("rng", "marks", "j")

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.refill()

    def refill(self) -> None:
        self.marks = self.rng.random(_CHUNK)
        self.j = 0
