"""Reproducible counter-based random streams.

Every replication draws from its own Philox stream keyed by the pair
(master_seed, replication_index), so a replication's randomness does not
depend on batch layout, worker count, or evaluation order. Substreams (for
example the window sampler used by random Parisian windows) live in disjoint
blocks of the 256-bit Philox counter space and never overlap the path stream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

PATH_STREAM = 0
WINDOW_STREAM = 1


@dataclass(frozen=True)
class SeedSpec:
    """Deterministic seed for one replication of one experiment."""

    master_seed: int
    replication_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ParameterError("master_seed must fit in an unsigned 64-bit integer")
        if int(self.replication_index) < 0:
            raise ParameterError("replication_index must be nonnegative")

    def replication(self, index: int) -> "SeedSpec":
        """The seed of replication `index` under the same master seed."""
        return SeedSpec(self.master_seed, index)

    def rng(self, stream: int = PATH_STREAM) -> np.random.Generator:
        """Fresh generator for one substream of this replication."""
        key = (int(self.master_seed) << 64) | int(self.replication_index)
        bitgen = np.random.Philox(key=key, counter=int(stream) << 192)
        return np.random.Generator(bitgen)


def as_seed(seed) -> SeedSpec:
    """Coerce an integer master seed (or a SeedSpec) to a SeedSpec."""
    if isinstance(seed, SeedSpec):
        return seed
    return SeedSpec(int(seed))
