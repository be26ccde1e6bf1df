"""Total variation (and Kolmogorov) bounds for geometric-type approximations."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .metrics import shift_smoothness_u
from .pmf import DiscretePMF, adjacent_mixture, conditional_shift, moments, point_mass
from .reliability import failure_rates

MEAN_CONDITION_SLACK = 1e-12
# values in [-ROUNDING_FLOOR, 0) are float noise around an exact zero
ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound with everything needed to audit it.

    ``valid`` is false whenever a precondition fails; ``reason`` then names it.
    ``value`` is still reported for inspection but carries no guarantee.
    """

    value: float
    metric: str
    approximant: dict
    ingredients: dict = field(default_factory=dict)
    valid: bool = True
    reason: str | None = None
    provenance: str = ""
    extras: dict = field(default_factory=dict)

    def replace(self, **changes) -> "BoundReport":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {f.name: _plain(getattr(self, f.name)) for f in dataclasses.fields(self)}


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _geometric(p: float) -> dict:
    return {"kind": "geometric", "p": p}


def _compound(p: float, x: DiscretePMF) -> dict:
    return {"kind": "compound_geometric", "p": p, "x_probs": x.probs.tolist()}


def _finish(report: BoundReport) -> BoundReport:
    """Mark negative values invalid instead of clipping them."""
    v = report.value
    if v < 0:
        if v >= -ROUNDING_FLOOR:
            return report.replace(value=0.0, extras={**report.extras, "rounded_from": v})
        if report.valid:
            return report.replace(valid=False, reason="negative value")
    return report


def _check_p(p: float) -> None:
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0,1), got {p}")


def stein_factor_branches(p: float, x: DiscretePMF) -> tuple[float, float]:
    _check_p(p)
    if x.probs[0] != 0.0:
        raise ValueError("X must be supported on {1, 2, ...}")
    surv = x.survival()
    above_one = float(surv[1]) if surv.size > 1 else x.tail_mass
    first = p + (1.0 - p) * above_one
    u = shift_smoothness_u(x)
    if u <= 0:
        return first, math.inf
    second = p * (1.0 + math.sqrt(-2.0 / (u * math.log1p(-p))))
    return first, second


def stein_factor(p: float, x: DiscretePMF) -> float:
    """Smoothness constant of the compound geometric Stein solution."""
    return min(stein_factor_branches(p, x))


def mean_condition_threshold(p: float, delta: float) -> float:
    return p / ((1.0 - p) * delta)


def theorem_main_bound(
    p: float, delta: float, ew: float, x: DiscretePMF, provenance: str = "main"
) -> BoundReport:
    """``H_p(X) (EY - EW)`` for ``W`` with failure rates at least ``delta``.

    Valid when ``EX >= p / ((1-p) delta)``. The Wasserstein analogue ``EY - EW``
    is returned in ``extras``.
    """
    _check_p(p)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if ew < 0:
        raise ValueError(f"EW must be nonnegative, got {ew}")
    if not x.exact:
        raise ValueError("X must be given without tail mass")
    ex = moments(x).mean
    h = stein_factor(p, x)
    u = shift_smoothness_u(x)
    ey = (1.0 - p) * ex / p
    value = h * (ey - ew)
    threshold = mean_condition_threshold(p, delta)
    ok = ex >= threshold * (1.0 - MEAN_CONDITION_SLACK)
    report = BoundReport(
        value=value,
        metric="TV",
        approximant=_compound(p, x),
        ingredients={"p": p, "delta": delta, "EX": ex, "EY": ey, "EW": ew, "H": h, "u": u, "EX_threshold": threshold},
        valid=ok,
        reason=None if ok else "mean condition",
        provenance=provenance,
        extras={"wasserstein_value": ey - ew},
    )
    return _finish(report)


def corollary_ifr_bound(p: float, ew: float, provenance: str = "ifr") -> BoundReport:
    """``1 - p (1 + EW)`` against ``Geom(p)`` for IFR ``W`` with ``P(W=0) = p``.

    Evaluated as the main bound with ``X = 1`` and ``delta = p/(1-p)`` so the
    two agree bit for bit.
    """
    _check_p(p)
    report = theorem_main_bound(p, p / (1.0 - p), ew, point_mass(1), provenance=provenance)
    return report.replace(approximant=_geometric(p))


def obretenov_bound(mu: float, var: float) -> BoundReport:
    """Kolmogorov bound against ``Geom(1/(1+mu))`` from the first two moments."""
    if not mu > 0:
        raise ValueError(f"mean must be positive, got {mu}")
    if var < 0:
        raise ValueError(f"variance must be nonnegative, got {var}")
    value = mu / (1.0 + mu) * (1.0 - var / (mu * (1.0 + mu)))
    report = BoundReport(
        value=value,
        metric="Kolmogorov",
        approximant=_geometric(1.0 / (1.0 + mu)),
        ingredients={"EW": mu, "VarW": var},
        provenance="obretenov",
    )
    return _finish(report)


def polya_moments(m: int, d: int) -> tuple[float, float, float]:
    """``P(W=0)``, mean and variance of the urn occupancy."""
    p0 = (d - 1) / (d + m - 1)
    mean = m / d
    var = m * (d - 1) * (d + m) / (d * d * (d + 1))
    return p0, mean, var


def polya_bounds(m: int, d: int) -> dict:
    if d < 2 or m < 1:
        raise ValueError("need d >= 2 and m >= 1")
    p0, mean, var = polya_moments(m, d)
    upper_tv = corollary_ifr_bound(p0, mean, provenance="polya-ifr")
    upper_k = obretenov_bound(mean, var)
    lower = m * (d - 1) / ((d + m - 2) * (d + m - 1) ** 2)
    return {
        "p": p0,
        "upper_tv": upper_tv,
        "upper_k_obretenov": upper_k,
        "lower_tv": lower,
        "ours_better": d * d + d * m - 3 * d - m > 0,
        "closed_forms": {
            "upper_tv": m / (d * (d + m - 1)),
            "upper_k_obretenov": 2 * m / ((d + 1) * (d + m)),
        },
    }


def poisson_process_bounds(lam: float, t_model) -> dict:
    """Bounds for the count of a rate-``lam`` Poisson process over an IFR time ``T``.

    ``t_model`` needs ``mean``, ``variance``, ``laplace`` and an ``ifr`` flag.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    et = t_model.mean
    p = t_model.laplace(lam)
    tv = corollary_ifr_bound(p, lam * et, provenance="poisson-process")
    mu = lam * et
    k = obretenov_bound(mu, mu + lam * lam * t_model.variance)
    if t_model.ifr is not True:
        tv = tv.replace(valid=False, reason="T IFR")
        k = k.replace(valid=False, reason="T IFR")
    return {"tv": tv, "kolmogorov": k}


def gamma_poisson_closed_forms(alpha: float, beta: float, lam: float) -> dict:
    return {
        "tv": 1.0 - (1.0 + lam / beta) ** (-alpha) * (1.0 + alpha * lam / beta),
        "kolmogorov": alpha * (alpha - 1.0) * lam * lam / (beta + alpha * lam) ** 2,
    }


def gamma_prefers_tv(alpha: float, beta: float, lam: float) -> bool:
    """Small-``lam`` rule of thumb for when the TV bound is the smaller one."""
    return (math.sqrt(2.0) - 1.0) * beta > alpha * lam


def hazard_order_bound(p: float, ew: float, certificate: str | bool | None) -> BoundReport:
    """``|1 - p(1+EW)|`` when ``W`` and ``Geom(p)`` are hazard-rate ordered either way.

    ``certificate`` is ``"W<=N"``, ``"N<=W"``, ``True`` (ordered, direction
    unspecified) or ``None``/``False`` for no certificate.
    """
    _check_p(p)
    value = abs(1.0 - p * (1.0 + ew))
    ok = certificate not in (None, False)
    return BoundReport(
        value=value,
        metric="TV",
        approximant=_geometric(p),
        ingredients={"p": p, "EW": ew, "certificate": certificate},
        valid=ok,
        reason=None if ok else "hazard order",
        provenance="hazard-order",
    )


def pmf_hazard_bound(w: DiscretePMF, p: float) -> BoundReport:
    """Hazard-order bound with the certificate checked directly on the pmfs."""
    from .pmf import geometric_pmf
    from .reliability import hazard_order_leq

    g = geometric_pmf(p)
    if hazard_order_leq(w, g):
        cert = "W<=N"
    elif hazard_order_leq(g, w):
        cert = "N<=W"
    else:
        cert = None
    return hazard_order_bound(p, moments(w).mean, cert)


def mixed_poisson_hazard_bound(lam: float, p: float, t_model) -> BoundReport:
    """Hazard-order bound for a mixed Poisson count with the certificate from ``T``."""
    from .reliability import exponential_hazard_comparison

    _check_p(p)
    mu = lam * p / (1.0 - p)
    cmp = exponential_hazard_comparison(t_model, mu)
    cert = {"T<=exp": "W<=N", "exp<=T": "N<=W"}.get(cmp)
    report = hazard_order_bound(p, lam * t_model.mean, cert)
    closed = lam * p * abs(1.0 / mu - t_model.mean)
    return report.replace(
        provenance="mixed-poisson-hazard",
        ingredients={**report.ingredients, "mu": mu, "ET": t_model.mean},
        extras={"closed_form": closed},
    )


def translated_bound(
    w: DiscretePMF,
    m: int,
    x: DiscretePMF | None = None,
    delta: float | None = None,
    structure: str | None = None,
) -> BoundReport:
    """Main bound applied to ``W - m`` given ``W >= m``.

    The failure-rate floor comes from ``W``'s rates at ``j >= m`` when they
    are certified, otherwise from ``delta`` supplied by the caller.
    """
    wm = conditional_shift(w, m)
    pm = float(wm.probs[0])
    profile = failure_rates(wm, structure=structure)
    certified = delta is not None or profile.inf_rate_certified
    dm = delta if delta is not None else profile.inf_rate
    ewm = moments(wm).mean
    if x is None:
        target = max(1.0, mean_condition_threshold(pm, dm))
        x = point_mass(1) if target == 1.0 else adjacent_mixture(target)
    report = theorem_main_bound(pm, dm, ewm, x, provenance="translated")
    report = report.replace(ingredients={**report.ingredients, "m": m, "classification": profile.classification.value})
    if not certified and report.valid:
        report = report.replace(valid=False, reason="failure-rate floor")
    return report


def three_state_quantities(a1: float, b1: float, e1: float, a2: float, b2: float, e2: float) -> dict:
    """Closed forms for the hitting time of 0 from state 2 in the 3-state chain."""
    for row in ((a1, b1, e1), (a2, b2, e2)):
        if any(not 0.0 < v < 1.0 for v in row) or abs(sum(row) - 1.0) > 1e-12:
            raise ValueError(f"row {row} is not a valid transition row with entries in (0,1)")
    p1 = (a1 * b2 + a2 * e2) / (1 - a2)
    ew = ((1 - b1) * e2 + b2 * (1 + e1)) / ((1 - b1) * (1 - e2) - b2 * e1)
    ew1 = ew / (1 - a2) - 1
    return {"p1": p1, "EW": ew, "EW1": ew1}


def three_state_example(a1: float, b1: float, e1: float, a2: float, b2: float, e2: float) -> dict:
    """Geometric bound for ``W - 1`` given ``W >= 1`` in the 3-state absorbing chain.

    ``bound`` is ``1 - p1 (1 + EW1)`` in the factored form
    ``(a1-a2) b2 (b1 e2 - b2 e1) / ((1-a2)^2 (a1 (1-e2) + a2 e1))``.
    ``components`` keeps an unfactored three-term expansion and
    ``printed_sum`` its total; that total does not reproduce ``bound``.
    """
    q = three_state_quantities(a1, b1, e1, a2, b2, e2)
    num = a1 * b2 + a2 * e2
    comp_a = num / (a2 * (1 - a2) + (a1 - a2) * (1 - a2 - e2))
    comp_b = num * (1 + e1 - e2) / ((1 - a2) * (a1 - e1 * (a1 + a2)))
    comp_c = e2 * (a1 - a2) * num / ((1 - a2) ** 2 * (a2 * e1 + a1 * (1 - e2)))
    bound = (a1 - a2) * b2 * (b1 * e2 - b2 * e1) / ((1 - a2) ** 2 * (a1 * (1 - e2) + a2 * e1))
    ifr_ok = a1 >= a2 and b1 * (b2 + e2) >= b2 * (b1 + e1)
    return {
        "bound": bound,
        "direct": 1.0 - q["p1"] * (1.0 + q["EW1"]),
        "components": (comp_a, comp_b, comp_c),
        "printed_sum": comp_a + comp_b + comp_c,
        "ifr_ok": ifr_ok,
        **q,
    }
