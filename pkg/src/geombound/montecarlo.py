"""Seeded simulation oracles for the M/G/1 and mixed Poisson results."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .pmf import DiscretePMF
from .queueing import MG1System


def empirical_pmf(counts: np.ndarray) -> DiscretePMF:
    freq = np.bincount(counts)
    return DiscretePMF(freq / freq.sum(), 0.0)


def binomial_interval(successes: int, n: int, level: float = 0.95) -> tuple[float, float]:
    """Clopper-Pearson interval."""
    ci = stats.binomtest(successes, n).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


def _departures(arrivals: np.ndarray, services: np.ndarray, free_at: float = 0.0) -> np.ndarray:
    """FIFO single-server departures, ``D_n = max(A_n, D_{n-1}) + S_n``, without a Python loop.

    Unrolling gives ``D_n = C_n + max(free_at, max_{k<=n}(A_k - C_{k-1}))`` with
    ``C`` the running service total.
    """
    c = np.cumsum(services)
    c_prev = np.concatenate([[0.0], c[:-1]])
    return c + np.maximum(free_at, np.maximum.accumulate(arrivals - c_prev))


@dataclass(frozen=True)
class MG1SimResult:
    pmf: DiscretePMF
    mean: float
    mean_se: float
    p0: float
    p0_se: float
    customers: int


def simulate_mg1(
    sys: MG1System, horizon: float, warmup: float = 0.0, seed: int = 0, batches: int = 20
) -> MG1SimResult:
    """Time-averaged number in system over ``[warmup, horizon]``.

    Standard errors come from batch means over ``batches`` equal windows.
    """
    sys.require_stable()
    if not horizon > warmup >= 0:
        raise ValueError("need 0 <= warmup < horizon")
    rng = np.random.default_rng(seed)
    n = int(sys.lam * horizon + 10 * math.sqrt(sys.lam * horizon) + 10)
    gaps = rng.exponential(1.0 / sys.lam, size=n)
    arrivals = np.cumsum(gaps)
    while arrivals[-1] < horizon:
        more = np.cumsum(rng.exponential(1.0 / sys.lam, size=n)) + arrivals[-1]
        arrivals = np.concatenate([arrivals, more])
    arrivals = arrivals[arrivals < horizon]
    services = sys.service.sample(rng, arrivals.size)
    departures = _departures(arrivals, services)

    times = np.concatenate([[0.0], arrivals, departures])
    steps = np.concatenate([[0], np.ones(arrivals.size, dtype=np.int64), -np.ones(departures.size, dtype=np.int64)])
    order = np.argsort(times, kind="stable")
    times, level = times[order], np.cumsum(steps[order])

    clipped = np.clip(times, warmup, horizon)
    durations = np.diff(np.append(clipped, horizon))
    window = horizon - warmup
    hist = np.bincount(level, weights=durations)
    pmf = DiscretePMF.from_probs(hist / window)

    edges = np.linspace(warmup, horizon, batches + 1)
    area = _integral(times, level.astype(float), edges)
    idle = _integral(times, (level == 0).astype(float), edges)
    width = np.diff(edges)
    means = np.diff(area) / width
    p0s = np.diff(idle) / width
    return MG1SimResult(
        pmf=pmf,
        mean=float(np.diff(area).sum() / window),
        mean_se=float(means.std(ddof=1) / math.sqrt(batches)),
        p0=float(np.diff(idle).sum() / window),
        p0_se=float(p0s.std(ddof=1) / math.sqrt(batches)),
        customers=int(arrivals.size),
    )


def _integral(times: np.ndarray, values: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Integral from 0 of the right-continuous step function ``values`` evaluated at ``at``."""
    cum = np.concatenate([[0.0], np.cumsum(values[:-1] * np.diff(times))])
    idx = np.searchsorted(times, at, side="right") - 1
    return cum[idx] + values[idx] * (at - times[idx])


@dataclass(frozen=True)
class BusyPeriodSimResult:
    pmf: DiscretePMF  # customers served minus one
    mean: float
    mean_se: float
    periods: int


def simulate_busy_period_customers(
    sys: MG1System, n_periods: int, seed: int = 0, chunk: int = 1 << 18
) -> BusyPeriodSimResult:
    """Customers served per busy period, minus one, over ``n_periods`` complete periods.

    A period starts with every arrival that finds the server idle.
    """
    sys.require_stable()
    rng = np.random.default_rng(seed)
    starts: list[np.ndarray] = []
    found = 0
    offset = 0
    clock = 0.0
    free_at = 0.0
    while found <= n_periods:
        arrivals = clock + np.cumsum(rng.exponential(1.0 / sys.lam, size=chunk))
        services = sys.service.sample(rng, chunk)
        dep = _departures(arrivals, services, free_at)
        prev_dep = np.concatenate([[free_at], dep[:-1]])
        idx = np.flatnonzero(arrivals > prev_dep) + offset
        starts.append(idx)
        found += idx.size
        offset += chunk
        clock, free_at = arrivals[-1], dep[-1]
    start_idx = np.concatenate(starts)[: n_periods + 1]
    sizes = np.diff(start_idx) - 1
    return BusyPeriodSimResult(
        pmf=empirical_pmf(sizes),
        mean=float(sizes.mean()),
        mean_se=float(sizes.std(ddof=1) / math.sqrt(sizes.size)),
        periods=int(sizes.size),
    )


def sample_mixed_poisson(alpha: float, beta: float, lam: float, n: int, seed: int = 0) -> DiscretePMF:
    """Empirical law of ``N(T)`` with ``T ~ Gamma(alpha, rate beta)``."""
    rng = np.random.default_rng(seed)
    t = rng.gamma(alpha, 1.0 / beta, size=n)
    return empirical_pmf(rng.poisson(lam * t))
