"""Absorbing chains on {0, 1, ...}: hitting times, quasi-stationary limits, birth-death spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, sparse

from .bounds import BoundReport, theorem_main_bound
from .pmf import DiscretePMF, adjacent_mixture, moments, point_mass

ROW_TOL = 1e-10


@dataclass(frozen=True)
class CountableMarkovChain:
    """Transition matrix on states ``0..L`` plus the mass each row sends past ``L``."""

    P: np.ndarray
    row_tail: np.ndarray
    start_state: int = 1

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        tail = np.array(self.row_tail, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("transition matrix must be square")
        if tail.shape != (P.shape[0],):
            raise ValueError("row_tail must have one entry per state")
        if np.any(P < 0) or np.any(tail < 0):
            raise ValueError("transition probabilities must be nonnegative")
        sums = P.sum(axis=1) + tail
        bad = np.abs(sums - 1.0) > ROW_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise ValueError(f"row {i} sums to {sums[i]!r}")
        if not 0 <= self.start_state < P.shape[0]:
            raise ValueError("start state outside the truncated state space")
        P.setflags(write=False)
        tail.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "row_tail", tail)

    @property
    def L(self) -> int:
        return self.P.shape[0] - 1

    @property
    def absorbing_zero(self) -> bool:
        return self.P[0, 0] == 1.0

    def row_tail_matrix(self) -> np.ndarray:
        """``P+[i, j] = P(next state >= j | state i)``, escaped mass included."""
        return np.cumsum(self.P[:, ::-1], axis=1)[:, ::-1] + self.row_tail[:, None]


def hitting_time_pmf(chain: CountableMarkovChain, L_time: int, stop_mass: float = 1e-16) -> DiscretePMF:
    """Law of ``W = min{n >= 0 : Z_n = 0}`` when the chain starts one step earlier in ``start_state``.

    Mass still in flight after ``L_time`` steps, or lost past the state
    truncation, becomes ``tail_mass``. Iteration stops early once the mass in
    flight drops below ``stop_mass``.
    """
    if not chain.absorbing_zero:
        raise ValueError("state 0 must be absorbing")
    if chain.start_state < 1:
        raise ValueError("start state must be transient (>= 1)")
    Q = chain.P[1:, 1:]
    if np.count_nonzero(Q) < 0.1 * Q.size:
        Q = sparse.csr_matrix(Q)
    QT = Q.T
    to_zero = chain.P[1:, 0]
    leak = chain.row_tail[1:]
    v = np.zeros(chain.L)
    v[chain.start_state - 1] = 1.0
    out = []
    escaped = 0.0
    for _ in range(L_time + 1):
        out.append(float(v @ to_zero))
        escaped += float(v @ leak)
        v = QT @ v
        if v.sum() < stop_mass:
            break
    probs = np.array(out)
    # the mass still in flight is known to full relative precision; 1 - sum is not
    tail = float(v.sum()) + escaped
    if abs(math.fsum(probs) + tail - 1.0) > 1e-12:
        tail = max(0.0, 1.0 - math.fsum(probs))
    return DiscretePMF(probs, tail)


@dataclass(frozen=True)
class QuasiStationary:
    dist: np.ndarray  # over states 1..L
    decay: float
    iterations: int  # single steps of Q
    residual: float


def quasi_stationary_dist(
    chain: CountableMarkovChain, tol: float = 1e-12, max_iter: int = 100_000, spread: float = 1e150
) -> QuasiStationary:
    """Limit of ``P(Z_n = i | Z_n >= 1)`` from ``start_state``.

    Power iteration ``v <- normalize(v B)`` with ``B = Q^(2^b)``, where ``Q``
    is the restriction to states ``1..L``. Squaring continues while the
    largest and smallest row sums of ``B`` stay within ``spread`` of each
    other (survival from deep states outgrows state 1 geometrically, and too
    many squarings would underflow the shallow rows). Stops when successive
    iterates differ by less than ``tol`` in total variation; a final
    eigen-residual check against ``Q`` rejects limits that only exist along
    even times.
    """
    Q = np.array(chain.P[1:, 1:])
    if Q.size == 0:
        raise ValueError("no transient states")
    B = Q.copy()
    power = 1
    while power < 2**20:
        sq = B @ B
        sums = sq.sum(axis=1)
        live = sums[sums > 0]
        if live.size < sums.size or live.max() > spread * live.min():
            break
        B = sq / live.max()
        power *= 2
    v = np.zeros(Q.shape[0])
    v[chain.start_state - 1] = 1.0
    for it in range(1, max_iter + 1):
        nxt = v @ B
        total = nxt.sum()
        if total == 0:
            raise RuntimeError("restricted chain dies out in finite time")
        nxt /= total
        change = 0.5 * float(np.abs(nxt - v).sum())
        v = nxt
        if change < tol:
            break
    else:
        raise RuntimeError(f"quasi-stationary iteration did not settle after {max_iter} steps; last iterate: {v!r}")
    step = v @ Q
    decay = float(step.sum())
    residual = 0.5 * float(np.abs(step / decay - v).sum()) if decay > 0 else math.inf
    if residual > max(1e3 * tol, 1e-8):
        raise RuntimeError(f"no quasi-stationary limit: eigen-residual {residual:.3g} (periodic chain?)")
    return QuasiStationary(v, decay, it * power, residual)


def delta_tilde(chain: CountableMarkovChain, qsd: QuasiStationary | None = None) -> float:
    """``sum_i p_i0 * lim P(Z_n = i | Z_n >= 1)``."""
    qsd = qsd or quasi_stationary_dist(chain)
    return float(chain.P[1:, 0] @ qsd.dist)


@dataclass(frozen=True)
class BirthDeathSpec:
    """Discrete birth-death chain absorbed at 0.

    ``up[i-1]`` and ``down[i-1]`` are the probabilities of moving from ``i`` to
    ``i+1`` and ``i-1``; the last entries repeat for all larger ``i``.
    """

    up: tuple
    down: tuple

    def __post_init__(self):
        up = tuple(float(v) for v in np.atleast_1d(self.up))
        down = tuple(float(v) for v in np.atleast_1d(self.down))
        if not up or not down:
            raise ValueError("need at least one up and one down probability")
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "down", down)
        n = max(len(up), len(down))
        p, q, r = self.arrays(n)
        if np.any(p < 0) or np.any(q < 0) or np.any(r < -1e-15):
            raise ValueError("birth-death probabilities must be nonnegative and sum to at most 1")
        if q[0] <= 0:
            raise ValueError("q_1 must be positive")

    @classmethod
    def constant(cls, p: float, q: float) -> "BirthDeathSpec":
        return cls((p,), (q,))

    @classmethod
    def from_arrays(cls, p, q) -> "BirthDeathSpec":
        return cls(tuple(p), tuple(q))

    def arrays(self, J: int):
        """``(p_1..p_J, q_1..q_J, r_1..r_J)``."""
        return _extend(self.up, J), _extend(self.down, J), 1.0 - _extend(self.up, J) - _extend(self.down, J)


def _extend(vals: tuple, J: int) -> np.ndarray:
    out = np.full(J, vals[-1])
    m = min(J, len(vals))
    out[:m] = vals[:m]
    return out


def birth_death_chain(spec: BirthDeathSpec, L: int) -> CountableMarkovChain:
    """Truncation at ``L``; the up-move from ``L`` becomes row tail. Starts at 1."""
    if L < 1:
        raise ValueError("need at least one transient state")
    p, q, r = spec.arrays(L)
    P = np.zeros((L + 1, L + 1))
    P[0, 0] = 1.0
    idx = np.arange(1, L + 1)
    P[idx, idx - 1] = q
    P[idx, idx] = np.clip(r, 0.0, None)
    P[idx[:-1], idx[:-1] + 1] = p[:-1]
    tail = np.zeros(L + 1)
    tail[L] = p[-1]
    return CountableMarkovChain(P, tail, start_state=1)


def bd_pi(spec: BirthDeathSpec, J: int) -> np.ndarray:
    """``pi_1 = 1``, ``pi_j = (p_1...p_{j-1}) / (q_2...q_j)`` for ``j = 1..J``."""
    p, q, _ = spec.arrays(J)
    if np.any(q[1:] <= 0):
        raise ValueError("down probabilities must be positive")
    with np.errstate(divide="ignore"):
        logs = np.log(p[:-1]) - np.log(q[1:])
    return np.exp(np.concatenate([[0.0], np.cumsum(logs)]))


def bd_polynomials(spec: BirthDeathSpec, x: float, J: int) -> np.ndarray:
    """``Q_1(x) .. Q_J(x)`` from ``x Q_j = q_j Q_{j-1} + r_j Q_j + p_j Q_{j+1}``, ``Q_0 = 0``."""
    if J < 1:
        raise ValueError("J must be at least 1")
    p, q, r = spec.arrays(J)
    out = np.empty(J)
    out[0] = 1.0
    prev, cur = 0.0, 1.0
    for j in range(J - 1):
        if p[j] == 0:
            raise ValueError(f"p_{j + 1} = 0 stops the recurrence")
        prev, cur = cur, ((x - r[j]) * cur - q[j] * prev) / p[j]
        out[j + 1] = cur
    return out


@dataclass(frozen=True)
class EtaEstimate:
    eta: float
    K: int
    converged: bool


def jacobi_top_eigenvalue(spec: BirthDeathSpec, K: int) -> float:
    """Largest eigenvalue of the symmetrized ``K x K`` Jacobi matrix."""
    p, q, r = spec.arrays(K + 1)
    off = np.sqrt(p[: K - 1] * q[1:K])
    if K == 1:
        return float(r[0])
    return float(linalg.eigvalsh_tridiagonal(r[:K], off, select="i", select_range=(K - 1, K - 1))[0])


def bd_eta(spec: BirthDeathSpec, tol: float = 1e-10, K0: int = 8, K_cap: int = 2**20) -> EtaEstimate:
    """Decay parameter as the limit of the top Jacobi eigenvalue, doubling ``K``.

    The sequence is nondecreasing in ``K`` (interlacing), which is asserted.
    """
    K = K0
    prev = jacobi_top_eigenvalue(spec, K)
    while K < K_cap:
        K = min(2 * K, K_cap)
        cur = jacobi_top_eigenvalue(spec, K)
        if cur < prev - 1e-12:
            raise AssertionError(f"top eigenvalue decreased from {prev} to {cur} at K={K}")
        if abs(cur - prev) < tol:
            return EtaEstimate(cur, K, True)
        prev = cur
    return EtaEstimate(prev, K, False)


def bd_assumptions(
    spec: BirthDeathSpec, eta: float, bd3: bool = False, J: int = 10**6, threshold: float = 1e5
) -> dict:
    """Status of the four birth-death assumptions over the first ``J`` states.

    ``bd1`` (divergence of ``sum 1/(p_k pi_k)``) can only be "likely" or
    "undetermined" from a partial sum. ``bd3`` is the caller's assertion.
    """
    p, _, r = spec.arrays(J)
    pi = bd_pi(spec, J)
    with np.errstate(divide="ignore", over="ignore"):
        terms = 1.0 / (p * pi)
        partial = float(np.sum(terms))
    return {
        "bd1": "likely" if partial > threshold else "undetermined",
        "bd2": bool(eta < 1.0),
        "bd3": bool(bd3),
        "bd4": bool(np.all(r >= 0.5)),
    }


def default_state_level(eta: float) -> int:
    if eta >= 1:
        return 200
    return int(max(200, math.ceil(10.0 / (1.0 - eta))))


def bd_extinction_bound(
    spec: BirthDeathSpec,
    x: DiscretePMF | str = "auto",
    bd3: bool = False,
    L: int | None = None,
    L_time: int = 200_000,
    eta_tol: float = 1e-10,
) -> BoundReport:
    """Compound geometric bound for the extinction time started from state 1."""
    est = bd_eta(spec, tol=eta_tol)
    eta = est.eta
    status = bd_assumptions(spec, eta, bd3=bd3)
    q1 = spec.arrays(1)[1][0]
    if eta >= 1 or eta <= 0:
        raise ValueError(f"decay parameter eta = {eta} leaves (0,1); no geometric-type bound")
    level = L if L is not None else default_state_level(eta)
    w = hitting_time_pmf(birth_death_chain(spec, level), L_time)
    ew = moments(w).mean
    delta = (1.0 - eta) / eta
    ex_target = max(1.0, q1 * eta / ((1.0 - q1) * (1.0 - eta)))
    if isinstance(x, str):
        if x != "auto":
            raise ValueError(f"unknown X choice {x!r}")
        x = point_mass(1) if ex_target == 1.0 else adjacent_mixture(ex_target)
    if q1 >= 1.0:
        raise ValueError("q_1 = 1 makes W identically 0")
    report = theorem_main_bound(q1, delta, ew, x, provenance="birth-death")
    report = report.replace(
        ingredients={**report.ingredients, "eta": eta, "eta_K": est.K, "eta_converged": est.converged,
                     "ex_target": ex_target, "W_tail_mass": w.tail_mass, "state_level": level},
        extras={**report.extras, "assumptions": status},
    )
    for name in ("bd1", "bd2", "bd3", "bd4"):
        if status[name] is not True and status[name] != "likely":
            return report.replace(valid=False, reason=name)
    if not est.converged:
        return report.replace(valid=False, reason="eta not converged")
    return report
