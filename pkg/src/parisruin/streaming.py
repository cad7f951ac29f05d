"""Streaming moment accumulation and deterministic chunked reduction.

Replications are partitioned into fixed-size chunks that do not depend on the
worker count, partial results are merged in chunk order, and every replication
owns its seed stream, so an estimate is bit-identical whether it ran on one
process or many.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass


@dataclass
class RunningMoments:
    """Welford/Chan accumulator for mean and variance of a stream of values."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, values) -> None:
        n = int(values.size)
        if n == 0:
            return
        bmean = float(values.mean())
        bm2 = float(((values - bmean) ** 2).sum())
        self._combine(n, bmean, bm2)

    def merge(self, other: "RunningMoments") -> None:
        self._combine(other.count, other.mean, other.m2)

    def _combine(self, n: int, bmean: float, bm2: float) -> None:
        if n == 0:
            return
        total = self.count + n
        delta = bmean - self.mean
        self.m2 += bm2 + delta * delta * self.count * n / total
        self.mean += delta * n / total
        self.count = total

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def stderr(self) -> float:
        return (self.variance / self.count) ** 0.5 if self.count > 0 else 0.0


def chunk_ranges(total: int, chunk_size: int) -> list[tuple[int, int]]:
    """Replication index ranges [lo, hi), fixed by chunk_size alone."""
    if total <= 0:
        return []
    chunk_size = max(1, int(chunk_size))
    return [(lo, min(lo + chunk_size, total)) for lo in range(0, total, chunk_size)]


def map_chunks(worker, ranges, jobs: int = 1) -> list:
    """Apply `worker` to each range; results come back in chunk order."""
    if jobs <= 1 or len(ranges) <= 1:
        return [worker(r) for r in ranges]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, ranges))
