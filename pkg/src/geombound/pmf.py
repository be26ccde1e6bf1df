"""Truncated probability mass functions on the nonnegative integers.

Every pmf carries the mass it does not assign explicitly (``tail_mass``), so
downstream metrics and bounds can stay conservative under truncation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import stats

SUM_TOL = 1e-12
DEFAULT_TAIL_TOL = 1e-12
DEFAULT_CAP = 10**6
# leftover mass this small is summation rounding, not truncation
ROUNDING_RESIDUE = 64 * np.finfo(float).eps


def truncation_cap() -> int:
    """Hard cap on pmf length; ``GEOMBOUND_TRUNCATION_CAP`` overrides it."""
    raw = os.environ.get("GEOMBOUND_TRUNCATION_CAP")
    if raw is None:
        return DEFAULT_CAP
    cap = int(raw)
    if cap < 1:
        raise ValueError(f"GEOMBOUND_TRUNCATION_CAP must be positive, got {raw!r}")
    return cap


@dataclass(frozen=True)
class DiscretePMF:
    """Pmf on ``{0, ..., L}`` plus unassigned mass beyond ``L``.

    ``capped`` marks pmfs whose automatic truncation hit the length cap before
    the tail dropped below the requested tolerance.
    """

    probs: np.ndarray
    tail_mass: float = 0.0
    capped: bool = False

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).ravel()
        if probs.size == 0:
            raise ValueError("pmf needs at least one entry")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("pmf entries must be finite and nonnegative")
        tail = float(self.tail_mass)
        if tail < 0:
            raise ValueError(f"tail_mass must be nonnegative, got {tail}")
        total = math.fsum(probs) + tail
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"pmf mass {total!r} differs from 1 by more than {SUM_TOL}")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", tail)

    @classmethod
    def from_probs(cls, probs, capped: bool = False) -> "DiscretePMF":
        """Build a pmf whose tail is whatever mass ``probs`` leaves unassigned.

        A shortfall below ``ROUNDING_RESIDUE`` is taken as rounding and the pmf as exact.
        """
        probs = np.asarray(probs, dtype=float)
        tail = 1.0 - math.fsum(probs)
        if tail <= ROUNDING_RESIDUE:
            tail = 0.0
        return cls(probs, tail, capped)

    @property
    def truncation_level(self) -> int:
        return self.probs.size - 1

    @property
    def exact(self) -> bool:
        return self.tail_mass == 0.0

    def __len__(self) -> int:
        return self.probs.size

    def pmf(self, k: int) -> float:
        if k < 0 or k > self.truncation_level:
            if k > self.truncation_level and self.tail_mass > 0:
                raise IndexError(f"P(W={k}) lies beyond truncation level {self.truncation_level}")
            return 0.0
        return float(self.probs[k])

    def survival(self) -> np.ndarray:
        """``P(W > j)`` for ``j = 0..L``, tail included, summed from the right."""
        rev = np.cumsum(self.probs[::-1])[::-1]
        return np.append(rev[1:], 0.0) + self.tail_mass

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def padded(self, n: int) -> np.ndarray:
        """Probabilities on ``0..n-1``; entries past ``L`` are zero."""
        out = np.zeros(n)
        m = min(n, self.probs.size)
        out[:m] = self.probs[:m]
        return out

    def shifted(self, k: int = 1) -> "DiscretePMF":
        """Law of ``W + k``."""
        if k < 0:
            raise ValueError("shift must be nonnegative")
        return DiscretePMF(np.concatenate([np.zeros(k), self.probs]), self.tail_mass, self.capped)


@dataclass(frozen=True)
class CompoundGeometricSpec:
    """Law of ``X_1 + ... + X_N`` with ``N ~ Geom(p)`` on ``{0,1,...}``."""

    p: float
    x_pmf: DiscretePMF

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"geometric parameter must lie in (0,1), got {self.p}")
        if self.x_pmf.probs[0] != 0.0:
            raise ValueError("X must be supported on {1, 2, ...}")

    @property
    def mean_x(self) -> float:
        return moments(self.x_pmf).mean

    @property
    def mean_y(self) -> float:
        return (1.0 - self.p) * self.mean_x / self.p


@dataclass(frozen=True)
class Moments:
    """Mean and variance of a truncated pmf.

    With unassigned tail mass the mean is a lower bound: the tail sits at
    ``L + 1`` or beyond, so ``mean`` counts it there and ``mean_upper`` is infinite.
    """

    mean: float
    variance: float
    tail_mass: float
    flagged: bool
    mean_upper: float


def moments(pmf: DiscretePMF, tol: float = 1e-10) -> Moments:
    """Moments of ``pmf``; flagged when ``tail_mass > tol``."""
    k = np.arange(pmf.probs.size, dtype=float)
    m1 = math.fsum(k * pmf.probs)
    m2 = math.fsum(k * k * pmf.probs)
    mean = m1 + (pmf.truncation_level + 1) * pmf.tail_mass
    return Moments(
        mean=mean,
        variance=max(0.0, m2 - m1 * m1),
        tail_mass=pmf.tail_mass,
        flagged=pmf.tail_mass > tol,
        mean_upper=mean if pmf.tail_mass == 0 else math.inf,
    )


def point_mass(k: int) -> DiscretePMF:
    if k < 0:
        raise ValueError("point mass location must be nonnegative")
    probs = np.zeros(k + 1)
    probs[k] = 1.0
    return DiscretePMF(probs)


def _auto_level(log_tail_at, tol: float) -> tuple[int, bool]:
    """Smallest ``L`` with ``P(W > L) < tol``, or ``(cap - 1, True)`` if none fits."""
    cap = truncation_cap()
    target = math.log(tol)
    if log_tail_at(0) < target:
        return 0, False
    lo, hi = 0, 1
    while log_tail_at(hi) >= target:
        if hi >= cap - 1:
            return cap - 1, True
        lo, hi = hi, min(2 * hi, cap - 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_tail_at(mid) < target:
            hi = mid
        else:
            lo = mid
    return hi, False


def geometric_pmf(p: float, L: int | None = None, tol: float = DEFAULT_TAIL_TOL) -> DiscretePMF:
    """``P(N=k) = p (1-p)^k`` on ``0..L``; ``L=None`` picks the first level with tail < tol."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"geometric parameter must lie in (0,1), got {p}")
    q = 1.0 - p
    capped = False
    if L is None:
        L, capped = _auto_level(lambda n: (n + 1) * math.log(q), tol)
    if L < 0:
        raise ValueError("truncation level must be nonnegative")
    factors = np.full(L + 1, q)
    factors[0] = p
    probs = np.cumprod(factors)
    return DiscretePMF(probs, q ** (L + 1), capped)


def convolve(a: DiscretePMF, b: DiscretePMF) -> DiscretePMF:
    """Law of the independent sum.

    Entries are exact up to the smallest truncation level among operands that
    carry a tail; everything beyond moves into ``tail_mass``.
    """
    full = np.convolve(a.probs, b.probs)
    limit = full.size - 1
    if a.tail_mass > 0:
        limit = min(limit, a.truncation_level)
    if b.tail_mass > 0:
        limit = min(limit, b.truncation_level)
    probs = np.clip(full[: limit + 1], 0.0, None)
    if a.exact and b.exact:
        return DiscretePMF(probs / math.fsum(probs), 0.0)
    return DiscretePMF(probs, max(0.0, 1.0 - math.fsum(probs)), a.capped or b.capped)


def compound_geometric_pmf(
    spec: CompoundGeometricSpec, L: int | None = None, tol: float = DEFAULT_TAIL_TOL
) -> DiscretePMF:
    """Materialize ``Y`` through ``f(0)=p``, ``f(n)=(1-p) sum_k f_X(k) f(n-k)``.

    With an explicit ``L`` the recursion runs to ``L``. Otherwise it extends
    until the unassigned mass falls below ``tol`` (or the cap). If ``X`` itself
    has a tail, values past ``X``'s truncation would be incomplete, so the
    automatic level stops there.
    """
    x = spec.x_pmf
    if x.probs[0] != 0.0:
        raise ValueError("X must be supported on {1, 2, ...}")
    c = 1.0 - spec.p
    fx = x.probs
    lx = x.truncation_level
    cap = truncation_cap()
    if L is not None:
        if L < 0:
            raise ValueError("truncation level must be nonnegative")
        target = L
        if x.tail_mass > 0:
            target = min(L, lx)
    else:
        target = lx if x.tail_mass > 0 else cap - 1

    fx_rev = fx[1:][::-1]  # f_X(lx), ..., f_X(1)
    size = min(target + 1, 1024)
    f = np.zeros(size)
    f[0] = spec.p
    acc = spec.p
    n = 0
    capped = False
    while n < target:
        n += 1
        if n >= f.size:
            f = np.concatenate([f, np.zeros(min(f.size, target + 1 - f.size))])
        lo = max(0, n - lx)
        # f(n) = c * sum_{k=1}^{min(n,lx)} fx[k] f(n-k)
        seg = f[lo:n]
        f[n] = c * float(np.dot(fx_rev[fx_rev.size - seg.size :], seg))
        acc += f[n]
        if L is None and x.tail_mass == 0 and 1.0 - acc < tol:
            break
    else:
        if L is None and x.tail_mass == 0 and 1.0 - acc >= tol:
            capped = True
    probs = f[: n + 1]
    tail = max(0.0, 1.0 - math.fsum(probs))
    return DiscretePMF(probs, tail, capped or x.capped)


def convolution_power_mixture(spec: CompoundGeometricSpec, L: int, residual: float = 1e-15) -> DiscretePMF:
    """Brute-force ``sum_k p (1-p)^k X^{*k}`` on ``0..L`` (test oracle).

    ``k`` runs until the neglected geometric weight ``(1-p)^{k+1}`` is below
    ``residual``.
    """
    if spec.x_pmf.tail_mass > 0:
        raise ValueError("oracle needs an X pmf without tail")
    p, c = spec.p, 1.0 - spec.p
    out = np.zeros(L + 1)
    power = np.zeros(L + 1)
    power[0] = 1.0
    weight = p
    fx = spec.x_pmf.padded(L + 1)
    k = 0
    while True:
        out += weight * power
        k += 1
        weight *= c
        if c**k < residual:
            break
        power = np.convolve(power, fx)[: L + 1]
        if not power.any():
            break
    return DiscretePMF.from_probs(out)


def polya_pmf(m: int, d: int) -> DiscretePMF:
    """Number of balls in one urn when ``m`` balls fill ``d`` urns uniformly.

    ``P(W=k) = C(d+m-k-2, m-k) / C(d+m-1, m)``, evaluated in log space from
    ``P(W=0) = (d-1)/(d+m-1)`` and the ratios ``(m-k)/(d+m-k-2)``.
    """
    if d < 2:
        raise ValueError(f"need at least two urns, got d={d}")
    if m < 0:
        raise ValueError(f"number of balls must be nonnegative, got m={m}")
    if m == 0:
        return point_mass(0)
    k = np.arange(m)
    log_ratios = np.log(m - k) - np.log(d + m - k - 2)
    logp = math.log(d - 1) - math.log(d + m - 1) + np.concatenate([[0.0], np.cumsum(log_ratios)])
    probs = np.exp(logp)
    probs /= math.fsum(probs)
    return DiscretePMF(probs, 0.0)


def mixed_poisson_gamma_pmf(
    alpha: float, beta: float, lam: float, L: int | None = None, tol: float = DEFAULT_TAIL_TOL
) -> DiscretePMF:
    """Law of ``N(T)`` for a rate-``lam`` Poisson process and ``T ~ Gamma(alpha, beta)``.

    This is negative binomial with success probability ``beta/(beta+lam)``.
    """
    if alpha <= 0 or beta <= 0 or lam <= 0:
        raise ValueError("alpha, beta and lambda must all be positive")
    q = beta / (beta + lam)
    c = 1.0 - q
    nb = stats.nbinom(alpha, q)
    capped = False
    if L is None:
        L, capped = _auto_level(lambda n: nb.logsf(n), tol)
    if L < 0:
        raise ValueError("truncation level must be nonnegative")
    first = q**alpha
    if first > 0:
        k = np.arange(1, L + 1)
        factors = np.empty(L + 1)
        factors[0] = first
        factors[1:] = (alpha + k - 1) / k * c
        probs = np.cumprod(factors)
    else:
        probs = nb.pmf(np.arange(L + 1))
    return DiscretePMF(probs, float(nb.sf(L)), capped)


def poisson_pmf(mean: float, L: int | None = None, tol: float = DEFAULT_TAIL_TOL) -> DiscretePMF:
    if mean <= 0:
        raise ValueError("Poisson mean must be positive")
    dist = stats.poisson(mean)
    capped = False
    if L is None:
        L, capped = _auto_level(lambda n: dist.logsf(n), tol)
    return DiscretePMF(dist.pmf(np.arange(L + 1)), float(dist.sf(L)), capped)


def adjacent_mixture(mean: float) -> DiscretePMF:
    """Pmf on ``{floor(mean), ceil(mean)}`` with the given mean (``mean >= 1``)."""
    if mean < 1:
        raise ValueError(f"a positive-integer X needs mean >= 1, got {mean}")
    lo = math.floor(mean)
    frac = mean - lo
    probs = np.zeros(lo + 2)
    probs[lo] = 1.0 - frac
    probs[lo + 1] = frac
    if frac == 0.0:
        probs = probs[:-1]
    return DiscretePMF(probs)


def conditional_shift(w: DiscretePMF, m: int) -> DiscretePMF:
    """Law of ``W - m`` given ``W >= m``."""
    if m < 0:
        raise ValueError("shift must be nonnegative")
    if m == 0:
        return w
    surv = w.survival()
    if m > w.truncation_level:
        raise ValueError("shift beyond truncation level")
    at_least = surv[m - 1]
    if at_least <= 0:
        raise ValueError(f"P(W >= {m}) is zero")
    probs = w.probs[m:] / at_least
    if w.exact:
        return DiscretePMF(probs / math.fsum(probs), 0.0, w.capped)
    return DiscretePMF(probs, w.tail_mass / at_least, w.capped)
