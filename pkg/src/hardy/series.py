"""Tail brackets for the logarithmic series sum 1 / (n log^p n).

The terms ``g(n) = 1 / (n (log n)^p)`` are positive and decreasing for
``n >= 2``, and ``g`` has the antiderivative ``-(log x)^(1-p) / (p - 1)``, so
every tail is bracketed by integral comparison::

    int_{M+1}^inf g  <=  sum_{n > M} g(n)  <=  int_M^inf g

Explicit terms up to ``2**order`` are summed from a cached suffix table
(smallest terms first) before the integral bracket takes over.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

DEFAULT_ORDER = 20


class Bracket(NamedTuple):
    lower: float
    upper: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def log_weight(n, p):
    """``1 / (n log^p n)`` for ``n >= 2`` (natural logarithm)."""
    n = np.asarray(n, dtype=float)
    return 1.0 / (n * np.log(n) ** p)


def log_integral(a, p):
    """``int_a^inf dx / (x log^p x) = log(a)^(1-p) / (p-1)`` for ``a > 1``."""
    a = np.asarray(a, dtype=float)
    return np.log(a) ** (1.0 - p) / (p - 1.0)


@lru_cache(maxsize=32)
def _suffix_table(p: float, order: int):
    limit = 2**order
    n = np.arange(2, limit + 1, dtype=float)
    g = 1.0 / (n * np.log(n) ** p)
    # suffix[k] = sum_{n = k + 2}^{limit} g(n); reversed so small terms go first
    suffix = np.cumsum(g[::-1])[::-1]
    suffix = np.append(suffix, 0.0)
    suffix.setflags(write=False)
    return suffix


def log_tail(p, start, order=DEFAULT_ORDER):
    """Bracket ``sum_{n >= start} 1 / (n log^p n)``; ``start`` may be an array."""
    p = float(p)
    if p <= 1:
        raise ValueError("series converges only for p > 1")
    start = np.asarray(start)
    if np.any(start < 2):
        raise ValueError("tail must start at n >= 2")
    limit = 2**order
    suffix = _suffix_table(p, order)
    s = np.minimum(start, limit + 1).astype(np.int64)
    explicit = suffix[s - 2]
    far_lo = log_integral(limit + 1, p)
    far_hi = log_integral(limit, p)
    beyond = start > limit
    lo = np.where(beyond, log_integral(np.maximum(start, 2), p), explicit + far_lo)
    hi = np.where(beyond, log_integral(np.maximum(start, 2), p) + log_weight(np.maximum(start, 2), p),
                  explicit + far_hi)
    if lo.ndim == 0:
        return Bracket(float(lo), float(hi))
    return Bracket(lo, hi)


def log_tail_reference(p, start, terms=10**7):
    """Slow oracle: plain partial sum of ``terms`` terms plus integral bracket.

    Uses ``math.fsum`` in chunks; meant for tests and spot checks only.
    """
    p = float(p)
    end = start + terms
    chunks = []
    step = 10**6
    for a in range(start, end, step):
        n = np.arange(a, min(a + step, end), dtype=float)
        chunks.append(math.fsum(1.0 / (n * np.log(n) ** p)))
    head = math.fsum(chunks)
    return Bracket(head + float(log_integral(end, p)), head + float(log_integral(end - 1, p)))
