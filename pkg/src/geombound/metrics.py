"""Distances between truncated pmfs, returned as certified intervals."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .pmf import DiscretePMF


class Interval(NamedTuple):
    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack


def _known_range(a: DiscretePMF, b: DiscretePMF) -> int:
    """Number of leading points on which both laws are fully resolved."""
    limits = [w.truncation_level + 1 for w in (a, b) if w.tail_mass > 0]
    if limits:
        return min(limits)
    return max(len(a), len(b))


def _aligned(a: DiscretePMF, b: DiscretePMF):
    n = _known_range(a, b)
    pa, pb = a.padded(n), b.padded(n)
    # mass of each law beyond the resolved range
    ra = a.tail_mass + math.fsum(a.probs[n:])
    rb = b.tail_mass + math.fsum(b.probs[n:])
    return pa, pb, ra, rb


def tv_distance(a: DiscretePMF, b: DiscretePMF) -> Interval:
    """Total variation distance ``sup_A |P(a in A) - P(b in A)|``.

    Unresolved mass is lumped into one cell for the lower end (merging cells
    cannot increase the distance) and counted fully for the upper end.
    """
    pa, pb, ra, rb = _aligned(a, b)
    body = math.fsum(np.abs(pa - pb))
    return Interval(0.5 * (body + abs(ra - rb)), 0.5 * (body + ra + rb))


def kolmogorov_distance(a: DiscretePMF, b: DiscretePMF) -> Interval:
    """``sup_j |P(a <= j) - P(b <= j)|``."""
    pa, pb, ra, rb = _aligned(a, b)
    # survival on the resolved range, exact because the remainders are known
    sa = np.cumsum(pa[::-1])[::-1] - pa + ra
    sb = np.cumsum(pb[::-1])[::-1] - pb + rb
    lo = float(np.max(np.abs(sa - sb))) if sa.size else 0.0
    return Interval(lo, max(lo, ra, rb))


def wasserstein_distance(a: DiscretePMF, b: DiscretePMF) -> Interval:
    """``sum_j |F_a(j) - F_b(j)|``; infinite upper end when mass is unresolved."""
    pa, pb, ra, rb = _aligned(a, b)
    sa = np.cumsum(pa[::-1])[::-1] - pa + ra
    sb = np.cumsum(pb[::-1])[::-1] - pb + rb
    lo = math.fsum(np.abs(sa - sb))
    hi = lo if ra == 0 and rb == 0 else math.inf
    return Interval(lo, hi)


def shift_smoothness_u(x: DiscretePMF) -> float:
    """``u = 1 - d_TV(X, X + 1)``, using the upper end of the distance interval."""
    return 1.0 - tv_distance(x, x.shifted(1)).hi
