"""Failure rates, monotonicity classes and the orders the bounds rely on."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from scipy import special

from .pmf import DiscretePMF

if TYPE_CHECKING:
    from .markov import CountableMarkovChain
    from .queueing import ServiceTimeModel

MONOTONE_SLACK = 1e-12


class Classification(str, enum.Enum):
    IFR = "IFR"
    DFR = "DFR"
    NONMONOTONE = "NONMONOTONE"
    UNDETERMINED = "UNDETERMINED"


@dataclass(frozen=True)
class FailureRateProfile:
    """Failure rates of a pmf over the range where they are resolved.

    ``rates[j] = P(W=j)/P(W>j)`` and ``alt_rates[j] = P(W=j)/P(W>=j)`` for
    ``j = 0..certified_upto``. ``trend`` is what the computed rates show;
    ``classification`` only repeats it when nothing past the range can
    overturn it (no tail mass, or a structural guarantee from the caller).
    ``inf_rate`` is a certified lower bound on every rate when
    ``inf_rate_certified`` is true.
    """

    rates: np.ndarray
    alt_rates: np.ndarray
    certified_upto: int
    trend: Classification
    classification: Classification
    inf_rate: float
    inf_rate_certified: bool

    @property
    def ifr(self) -> bool:
        return _nondecreasing(self.rates)

    @property
    def dfr(self) -> bool:
        return _nonincreasing(self.rates)


def _slack(r: np.ndarray) -> np.ndarray:
    return MONOTONE_SLACK * np.maximum(1.0, np.abs(r))


def _nondecreasing(r: np.ndarray) -> bool:
    return bool(np.all(r[1:] >= r[:-1] - _slack(r[:-1])))


def _nonincreasing(r: np.ndarray) -> bool:
    return bool(np.all(r[1:] <= r[:-1] + _slack(r[:-1])))


def failure_rates(
    pmf: DiscretePMF, structure: str | None = None, survival_floor: float = 1e-12
) -> FailureRateProfile:
    """Both failure-rate conventions of ``pmf`` and a monotonicity verdict.

    Rates are reported for ``j`` with ``P(W > j) > survival_floor``; the
    survival function already includes the tail mass, so every reported rate is
    exact. ``structure`` ("IFR" or "DFR") is a caller guarantee about the rates
    past the resolved range.
    """
    if structure not in (None, "IFR", "DFR"):
        raise ValueError(f"structure must be 'IFR', 'DFR' or None, got {structure!r}")
    surv = pmf.survival()
    ok = surv > survival_floor
    # first index where the survival drops to the floor ends the range
    stop = int(np.argmin(ok)) if not ok.all() else ok.size
    if stop == 0:
        raise ValueError("all mass sits at 0; failure rates are undefined beyond j = 0")
    p = pmf.probs[:stop]
    s = surv[:stop]
    rates = p / s
    alt = p / (p + s)
    if _nondecreasing(rates):
        trend = Classification.IFR
    elif _nonincreasing(rates):
        trend = Classification.DFR
    else:
        trend = Classification.NONMONOTONE

    if trend is Classification.NONMONOTONE:
        classification = trend
    elif pmf.exact:
        classification = trend
    elif structure is not None and _consistent(trend, structure, rates):
        classification = Classification(structure)
    else:
        classification = Classification.UNDETERMINED

    if pmf.exact:
        inf_rate, certified = float(rates.min()), True
    elif classification is Classification.IFR:
        inf_rate, certified = float(rates[0]), True
    else:
        inf_rate, certified = float(rates.min()), False
    return FailureRateProfile(rates, alt, stop - 1, trend, classification, inf_rate, certified)


def _consistent(trend: Classification, structure: str, rates: np.ndarray) -> bool:
    if structure == "IFR":
        return _nondecreasing(rates)
    return _nonincreasing(rates)


def delta_from_alt(delta_tilde: float) -> float:
    """Turn a lower bound on ``P(W=j)/P(W>=j)`` into one on ``P(W=j)/P(W>j)``."""
    if not 0.0 < delta_tilde < 1.0:
        raise ValueError(f"alternative-rate bound must lie in (0,1), got {delta_tilde}")
    return delta_tilde / (1.0 - delta_tilde)


def _resolved_survivals(a: DiscretePMF, b: DiscretePMF):
    """Survival functions (with ``P(W > -1) = 1`` prepended) where both are known.

    A pmf with tail mass is known up to its truncation level; an exact one
    everywhere.
    """
    limits = [len(w) for w in (a, b) if not w.exact]
    n = min(limits) if limits else max(len(a), len(b))
    sa = np.append(1.0, _survival_padded(a, n))
    sb = np.append(1.0, _survival_padded(b, n))
    return sa, sb, n


def _survival_padded(w: DiscretePMF, n: int) -> np.ndarray:
    s = w.survival()
    if n <= s.size:
        return s[:n]
    return np.concatenate([s, np.full(n - s.size, w.tail_mass)])


def _mass_beyond(w: DiscretePMF, n: int) -> float:
    return w.tail_mass + math.fsum(w.probs[n:])


def stochastic_order_leq(a: DiscretePMF, b: DiscretePMF, tol: float = 1e-12) -> bool | None:
    """Whether ``P(a > j) <= P(b > j)`` for all ``j``.

    ``None`` means undetermined: the comparison holds wherever both laws are
    resolved but unresolved mass above ``tol`` could still break it.
    """
    sa, sb, n = _resolved_survivals(a, b)
    if np.any(sa > sb + tol):
        return False
    # past the known range only a's leftover mass can break the order
    return True if _mass_beyond(a, n) <= tol else None


def hazard_order_leq(a: DiscretePMF, b: DiscretePMF, tol: float = 1e-12) -> bool | None:
    """Whether ``r_a(j) >= r_b(j)`` for all ``j`` (``a`` smaller in hazard rate order).

    Uses the cross-multiplied form ``P(a>j-1) P(b>j) >= P(b>j-1) P(a>j)``,
    which stays meaningful where one survival function has hit zero.
    """
    sa, sb, n = _resolved_survivals(a, b)
    beyond_ok = max(_mass_beyond(a, n), _mass_beyond(b, n)) <= tol
    lhs = sa[:-1] * sb[1:]
    rhs = sb[:-1] * sa[1:]
    if np.any(lhs < rhs - MONOTONE_SLACK * np.maximum(rhs, 1e-300) - 1e-300):
        return False
    return True if beyond_ok else None


def tp2_check(chain: "CountableMarkovChain", slack: float = 1e-12) -> bool:
    """All 2x2 minors of the row-tail matrix ``P+`` are nonnegative.

    ``P+[i, j] = sum_{k >= j} p_ik`` with the mass escaping the truncation
    counted in every column. Naive ``O(L^4)`` scan, vectorized per row pair;
    fine for ``L`` up to a couple of hundred.
    """
    pplus = chain.row_tail_matrix()
    n = pplus.shape[0]
    upper = np.triu(np.ones((n, n), dtype=bool), k=1)
    for i in range(n - 1):
        a = pplus[i]
        for j in range(i + 1, n):
            outer = np.outer(a, pplus[j])
            minors = outer - outer.T  # [k, l] = p+_ik p+_jl - p+_il p+_jk
            if np.any(minors[upper] < -slack):
                return False
    return True


class NBUECheck(NamedTuple):
    holds: bool
    basis: str  # "analytic", "grid", "asserted" or "unknown"


def mean_residual_life(service: "ServiceTimeModel", t: float) -> float:
    """``E[S - t | S >= t]`` for the parametric service families."""
    kind = service.kind
    if kind == "exponential":
        return 1.0 / service.params["rate"]
    if kind == "deterministic":
        s = service.params["s"]
        return s - t if t <= s else 0.0
    if kind in ("erlang", "gamma"):
        a = float(service.params.get("k", service.params.get("shape")))
        rate = service.params.get("beta", service.params.get("rate"))
        surv = special.gammaincc(a, rate * t)
        if surv == 0.0:
            return 0.0
        tail_mean = a / rate * special.gammaincc(a + 1.0, rate * t)
        return (tail_mean - t * surv) / surv
    raise ValueError(f"no closed-form mean residual life for kind {kind!r}")


def nbue_check(service: "ServiceTimeModel") -> NBUECheck:
    """Check ``E[S - t | S >= t] <= E[S]`` for all ``t``.

    Exponential and deterministic service hold in closed form; a gamma law is
    NBUE exactly when its shape is at least 1 (IFR implies NBUE, and below 1
    the mean residual life climbs to ``1/rate > E[S]``). Other models fall
    back to their asserted flag.
    """
    kind = service.kind
    if kind in ("exponential", "deterministic"):
        return NBUECheck(True, "analytic")
    if kind in ("erlang", "gamma"):
        shape = float(service.params.get("k", service.params.get("shape")))
        return NBUECheck(shape >= 1, "analytic")
    if service.nbue is not None:
        return NBUECheck(bool(service.nbue), "asserted")
    return NBUECheck(False, "unknown")


def exponential_hazard_comparison(t_model: "ServiceTimeModel", mu: float) -> str | None:
    """Hazard order between ``T`` and ``Exp(mu)`` for gamma-family ``T``.

    Returns ``"T<=exp"`` when ``r_T >= mu`` everywhere, ``"exp<=T"`` when
    ``r_T <= mu`` everywhere, otherwise ``None``. A gamma hazard rate is
    monotone between its value at 0 and its limit ``rate``.
    """
    kind = t_model.kind
    if kind == "exponential":
        rate = t_model.params["rate"]
        at0 = limit = rate
    elif kind in ("erlang", "gamma"):
        shape = float(t_model.params.get("k", t_model.params.get("shape")))
        rate = t_model.params.get("beta", t_model.params.get("rate"))
        limit = rate
        at0 = rate if shape == 1 else (0.0 if shape > 1 else math.inf)
    else:
        return None
    lo, hi = min(at0, limit), max(at0, limit)
    if lo >= mu:
        return "T<=exp"
    if hi <= mu:
        return "exp<=T"
    return None
