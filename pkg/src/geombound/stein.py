"""Numerical solutions of the compound geometric Stein equation.

For ``Y`` compound geometric with parameter ``p`` and summand ``X``, the
solution of ``I(j in A) - P(Y in A) = (1-p) E f(j+X) - f(j)`` with
``f(0) = 0`` is the series

    f(j) = -sum_i (1-p)^i [P(j + S_i in A) - P(Y in A)],   S_i = X_1 + ... + X_i,

which converges geometrically and needs no forward recursion.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bounds import mean_condition_threshold, stein_factor
from .pmf import CompoundGeometricSpec, DiscretePMF, adjacent_mixture, compound_geometric_pmf, moments, point_mass
from .reliability import failure_rates


@dataclass(frozen=True)
class Cofinite:
    """All nonnegative integers except ``excluded``."""

    excluded: frozenset


EVEN = "even"


@dataclass(frozen=True)
class SteinSolution:
    f: np.ndarray  # f(0..j_max)
    prob_y: float  # P(Y in A)
    terms: int

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.f)


def _membership(A, n: int) -> np.ndarray:
    if isinstance(A, str):
        if A != EVEN:
            raise ValueError(f"unknown preset {A!r}")
        return (np.arange(n) % 2 == 0).astype(float)
    ind = np.zeros(n)
    members = [a for a in A if 0 <= a < n]
    ind[members] = 1.0
    return ind


def solve_fA(spec: CompoundGeometricSpec, A, j_max: int, series_tol: float = 1e-13) -> SteinSolution:
    """Stein solution on ``0..j_max`` for a finite set, ``Cofinite`` or ``"even"``.

    Terms stop once the neglected weight ``(1-p)^i / p`` is below ``series_tol``.
    """
    if isinstance(A, Cofinite):
        inner = solve_fA(spec, A.excluded, j_max, series_tol)
        return SteinSolution(-inner.f, 1.0 - inner.prob_y, inner.terms)
    x = spec.x_pmf
    if not x.exact:
        raise ValueError("X must be given without tail mass")
    p, c = spec.p, 1.0 - spec.p
    finite = not isinstance(A, str)
    # for a finite set only S_i <= max(A) matters, so that prefix stays exact
    limit = (max(A) + 1 if len(A) else 1) if finite else None
    s = np.array([1.0])
    h_sum = np.zeros(j_max + 1)  # sum_i c^i P(j + S_i in A)
    weight = 1.0
    i = 0
    while True:
        ind = _membership(A, j_max + s.size)
        # P(j + S_i in A) for j = 0..j_max
        h = np.correlate(ind, s, mode="valid")[: j_max + 1]
        h_sum += weight * h
        i += 1
        weight *= c
        if weight / p < series_tol:
            break
        s = np.convolve(s, x.probs)
        if finite:
            s = s[:limit]
    prob_y = p * h_sum[0]
    f = -(h_sum - prob_y / p)
    f[0] = 0.0
    return SteinSolution(f, prob_y, i)


def stein_residual(spec: CompoundGeometricSpec, A, sol: SteinSolution) -> np.ndarray:
    """``|I(j in A) - P(Y in A) - ((1-p) E f(j+X) - f(j))|`` where ``j + X`` stays in range."""
    x = spec.x_pmf.probs
    n = sol.f.size - (x.size - 1)
    if n <= 0:
        raise ValueError("j_max too small for the support of X")
    ef = np.correlate(sol.f, x, mode="valid")[:n]  # E f(j + X)
    if isinstance(A, Cofinite):
        ind = 1.0 - _membership(A.excluded, n)
    else:
        ind = _membership(A, n)
    lhs = ind - sol.prob_y
    rhs = (1.0 - spec.p) * ef - sol.f[:n]
    return np.abs(lhs - rhs)


def literal_series(spec: CompoundGeometricSpec, A, j_max: int, series_tol: float = 1e-13) -> np.ndarray:
    """The series with ``P(Y + S_i in A)`` in place of ``P(Y in A)``.

    It differs from :func:`solve_fA` by a constant, so its increments agree.
    """
    if isinstance(A, (str, Cofinite)):
        raise ValueError("finite sets only")
    p, c = spec.p, 1.0 - spec.p
    limit = max(A) + 1 if len(A) else 1
    y = compound_geometric_pmf(spec, L=limit + j_max)
    ind = _membership(A, limit + j_max + 1)
    s = np.array([1.0])
    out = np.zeros(j_max + 1)
    weight = 1.0
    while weight / p >= series_tol:
        direct = np.correlate(ind, s, mode="valid")[: j_max + 1] if s.size <= ind.size else np.zeros(j_max + 1)
        ys = np.convolve(y.probs, s)[:limit]
        out -= weight * (direct - math.fsum(ys * ind[: ys.size]))
        weight *= c
        s = np.convolve(s, spec.x_pmf.probs)[:limit]
    return out


@dataclass(frozen=True)
class SmoothnessCheck:
    sup_increment: float
    bound: float
    ok: bool
    attained: bool


def singleton_increments(spec: CompoundGeometricSpec, support: int, j_max: int) -> np.ndarray:
    """Row ``a`` holds the increments of ``f_{a}``; every finite ``A`` is a row sum."""
    return np.array([solve_fA(spec, {a}, j_max).increments for a in range(support)])


def verify_smoothness_lemma(
    spec: CompoundGeometricSpec, A_family, j_max: int, slack: float = 1e-9
) -> SmoothnessCheck:
    """Largest ``|f_A(j+1) - f_A(j)|`` over ``j < j_max`` and ``A`` in the family,
    against ``H_p(X) / p``."""
    sup = 0.0
    for A in A_family:
        sup = max(sup, float(np.max(np.abs(solve_fA(spec, A, j_max).increments))))
    return _check(spec, sup, slack)


def exhaustive_smoothness(spec: CompoundGeometricSpec, support: int = 13, j_max: int | None = None, slack: float = 1e-9):
    """Same check over every subset of ``{0..support-1}``.

    Beyond ``support`` every such ``f_A`` is flat, so ``j_max = support + 1``
    already sees all increments.
    """
    j_max = j_max or support + 1
    D = singleton_increments(spec, support, j_max)
    subsets = np.array(list(itertools.product((0.0, 1.0), repeat=support)))
    sup = float(np.max(np.abs(subsets @ D)))
    return _check(spec, sup, slack)


def _check(spec: CompoundGeometricSpec, sup: float, slack: float) -> SmoothnessCheck:
    bound = stein_factor(spec.p, spec.x_pmf) / spec.p
    return SmoothnessCheck(sup, bound, sup <= bound + slack, abs(sup - bound) <= 1e-8)


def sharpness_instance(p: float, j_max: int = 40) -> SmoothnessCheck:
    """``X = 2`` with ``A`` the even numbers, where the smoothness bound is attained."""
    spec = CompoundGeometricSpec(p, point_mass(2))
    return verify_smoothness_lemma(spec, [EVEN], j_max)


def reconstruct_main_bound(w: DiscretePMF, x: DiscretePMF | None = None, support: int = 13) -> dict:
    """Largest ``|P(W in A) - P(Y in A)|`` over ``A`` inside ``{0..support-1}``
    next to ``H_p(X) (EY - EW)``, for an exact ``W`` pmf.

    ``p = P(W=0)`` and ``delta`` is the smallest failure rate of ``W``.
    """
    if not w.exact:
        raise ValueError("W must be exact")
    p = float(w.probs[0])
    delta = failure_rates(w).inf_rate
    threshold = mean_condition_threshold(p, delta)
    if x is None:
        target = max(1.0, threshold)
        x = point_mass(1) if target == 1.0 else adjacent_mixture(target)
    ex = moments(x).mean
    y = compound_geometric_pmf(CompoundGeometricSpec(p, x), L=support - 1)
    diff = w.padded(support) - y.probs
    subsets = np.array(list(itertools.product((0.0, 1.0), repeat=support)))
    gap = float(np.max(np.abs(subsets @ diff)))
    bound = stein_factor(p, x) * ((1 - p) * ex / p - moments(w).mean)
    return {
        "max_gap": gap,
        "bound": bound,
        "mean_condition": ex >= threshold * (1 - 1e-12),
        "ok": gap <= bound + 1e-12,
    }
