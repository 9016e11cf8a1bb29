"""Sampling helpers shared by the data and workload generators."""
from __future__ import annotations

import bisect
import math
from typing import Sequence

from .sim import RngStream


def weighted_index(rng: RngStream, cumulative: Sequence[float]) -> int:
    """Index drawn with probability proportional to the weight steps.

    `cumulative` is the inclusive running sum of weights; the final entry is
    the total mass.
    """
    u = rng.random() * cumulative[-1]
    return bisect.bisect_right(cumulative, u, 0, len(cumulative) - 1)


def log_uniform(rng: RngStream, lo: int, hi: int) -> int:
    """Integer log-uniform draw on [lo, hi): uniform in ln-space.

    Keeps small values heavily represented inside wide buckets.
    """
    if not (1 <= lo < hi):
        raise ValueError(f"need 1 <= lo < hi, got [{lo}, {hi})")
    u = rng.random()
    value = int(math.exp(math.log(lo) + u * (math.log(hi) - math.log(lo))))
    return max(lo, min(value, hi - 1))


class ZipfSelector:
    """Finite Zipf law over ranks 1..n: P(k) proportional to k^(-s).

    s = 0 degenerates to the uniform distribution.  The selector returns
    0-based indices; callers map them onto their own rank ordering.
    """

    def __init__(self, n: int, s: float) -> None:
        if n < 1:
            raise ValueError("need at least one rank")
        if s < 0:
            raise ValueError("exponent must be >= 0")
        self.n = n
        self.s = s
        masses = [k ** -s for k in range(1, n + 1)]
        total = 0.0
        self._cumulative = []
        for m in masses:
            total += m
            self._cumulative.append(total)
        self._total = total

    def probability(self, index: int) -> float:
        """Exact mass of 0-based rank `index`."""
        prev = self._cumulative[index - 1] if index > 0 else 0.0
        return (self._cumulative[index] - prev) / self._total

    def pick(self, rng: RngStream) -> int:
        u = rng.random() * self._total
        return bisect.bisect_right(self._cumulative, u, 0, self.n - 1)
