"""M/G/1 analytics: equilibrium occupancy and customers served in a busy period."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .bounds import BoundReport, corollary_ifr_bound, theorem_main_bound
from .markov import CountableMarkovChain
from .pmf import DiscretePMF, adjacent_mixture, mixed_poisson_gamma_pmf, point_mass, poisson_pmf
from .reliability import delta_from_alt, nbue_check


@dataclass(frozen=True)
class ServiceTimeModel:
    """Service-time law described through its moments and Laplace transform.

    ``laplace(s) = E exp(-s S)`` is finite for ``s > abscissa``. ``ifr`` and
    ``nbue`` are structural flags; for the parametric kinds they are derived,
    for ``custom`` they are whatever the caller asserts.
    """

    kind: str
    params: dict
    mean: float
    second_moment: float
    laplace: Callable[[float], float]
    laplace_deriv: Callable[[float], float]
    abscissa: float = -math.inf
    ifr: bool | None = None
    nbue: bool | None = None
    density: Callable[[float], float] | None = field(default=None, repr=False)
    sampler: Callable[[np.random.Generator, int], np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("service mean must be positive")
        if self.second_moment < self.mean**2 * (1 - 1e-12):
            raise ValueError("second moment below squared mean")

    @property
    def variance(self) -> float:
        return max(0.0, self.second_moment - self.mean**2)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.sampler is None:
            raise ValueError(f"service model {self.kind!r} has no sampler")
        return self.sampler(rng, n)


def gamma_service(shape: float, rate: float) -> ServiceTimeModel:
    if shape <= 0 or rate <= 0:
        raise ValueError("gamma shape and rate must be positive")
    return ServiceTimeModel(
        kind="gamma",
        params={"shape": shape, "rate": rate},
        mean=shape / rate,
        second_moment=shape * (shape + 1) / rate**2,
        laplace=lambda s: (rate / (rate + s)) ** shape,
        laplace_deriv=lambda s: -shape / rate * (rate / (rate + s)) ** (shape + 1),
        abscissa=-rate,
        ifr=shape >= 1,
        nbue=shape >= 1,
        density=lambda x: math.exp(shape * math.log(rate) + (shape - 1) * math.log(x) - rate * x - math.lgamma(shape))
        if x > 0
        else 0.0,
        sampler=lambda rng, n: rng.gamma(shape, 1.0 / rate, size=n),
    )


def erlang(k: int, beta: float) -> ServiceTimeModel:
    """Sum of ``k`` exponential phases of rate ``beta``."""
    if int(k) != k or k < 1:
        raise ValueError(f"Erlang phase count must be a positive integer, got {k}")
    base = gamma_service(int(k), beta)
    return ServiceTimeModel(**{**base.__dict__, "kind": "erlang"})


def exponential(rate: float) -> ServiceTimeModel:
    base = gamma_service(1, rate)
    return ServiceTimeModel(**{**base.__dict__, "kind": "exponential"})


def deterministic(s: float) -> ServiceTimeModel:
    if s <= 0:
        raise ValueError("deterministic service time must be positive")
    return ServiceTimeModel(
        kind="deterministic",
        params={"s": s},
        mean=s,
        second_moment=s * s,
        laplace=lambda x: math.exp(-x * s),
        laplace_deriv=lambda x: -s * math.exp(-x * s),
        ifr=True,
        nbue=True,
        sampler=lambda rng, n: np.full(n, float(s)),
    )


def custom_service(
    mean: float,
    second_moment: float,
    laplace: Callable[[float], float],
    laplace_deriv: Callable[[float], float],
    abscissa: float = -math.inf,
    ifr: bool | None = None,
    nbue: bool | None = None,
    density: Callable[[float], float] | None = None,
    sampler=None,
) -> ServiceTimeModel:
    """User-described service law. The transform derivative must be supplied;
    it is never obtained by numerical differentiation."""
    return ServiceTimeModel(
        "custom", {}, mean, second_moment, laplace, laplace_deriv, abscissa, ifr, nbue, density, sampler
    )


@dataclass(frozen=True)
class MG1System:
    lam: float
    service: ServiceTimeModel

    @property
    def rho(self) -> float:
        return self.lam * self.service.mean

    def require_stable(self) -> None:
        if self.lam <= 0:
            raise ValueError("arrival rate must be positive")
        if self.rho >= 1:
            raise ValueError(f"unstable: rho = {self.rho} >= 1")


@dataclass(frozen=True)
class Equilibrium:
    p0: float
    ew: float


def mg1_equilibrium(sys: MG1System) -> Equilibrium:
    """Empty probability and mean number in system (Pollaczek-Khinchine)."""
    sys.require_stable()
    rho, s = sys.rho, sys.service
    ew = rho + rho**2 * s.second_moment / (2 * (1 - rho) * s.mean**2)
    return Equilibrium(1 - rho, ew)


def corollary_q1_bound(sys: MG1System) -> BoundReport:
    """TV bound between the equilibrium occupancy and ``Geom(1 - rho)`` for NBUE service."""
    sys.require_stable()
    rho, s = sys.rho, sys.service
    eq = mg1_equilibrium(sys)
    check = nbue_check(s)
    report = corollary_ifr_bound(1 - rho, eq.ew, provenance="mg1-nbue")
    value = rho**2 * (1 - s.second_moment / (2 * s.mean**2))
    ingredients = {**report.ingredients, "rho": rho, "nbue_basis": check.basis}
    if not check.holds:
        return report.replace(valid=False, reason="NBUE", ingredients=ingredients)
    # same number as the IFR corollary; the closed form guards against drift
    if not math.isclose(report.value, value, rel_tol=1e-9, abs_tol=1e-12):
        raise AssertionError(f"closed form {value} disagrees with {report.value}")
    return report.replace(value=value, ingredients=ingredients)


def offspring_pmf(sys: MG1System, L: int | None = None) -> DiscretePMF:
    """Law of the number of arrivals during one service, ``g(k)``."""
    s = sys.service
    if s.kind in ("exponential", "erlang", "gamma"):
        return mixed_poisson_gamma_pmf(s.params["shape"], s.params["rate"], sys.lam, L)
    if s.kind == "deterministic":
        return poisson_pmf(sys.lam * s.params["s"], L)
    if s.density is None:
        raise ValueError("custom service needs a density to build the embedded chain")
    if L is None:
        raise ValueError("custom service needs an explicit truncation level")
    lam = sys.lam
    g = np.empty(L + 1)
    for k in range(L + 1):
        integrand = lambda x, k=k: math.exp(-lam * x + k * math.log(lam * x) - math.lgamma(k + 1)) * s.density(x) if x > 0 else (s.density(0.0) if k == 0 else 0.0)
        g[k] = integrate.quad(integrand, 0, math.inf, limit=200)[0]
    g = np.clip(g, 0.0, None)
    return DiscretePMF.from_probs(g)


def busy_period_chain(sys: MG1System, L: int) -> CountableMarkovChain:
    """Embedded departure chain: ``p_00 = 1``, ``p_ij = g(j + 1 - i)``, truncated at ``L``."""
    sys.require_stable()
    g = offspring_pmf(sys, L)
    gp = g.padded(L + 1)
    gs = np.append(g.survival(), g.tail_mass)  # gs[m] = P(count > m)
    P = np.zeros((L + 1, L + 1))
    P[0, 0] = 1.0
    tail = np.zeros(L + 1)
    for i in range(1, L + 1):
        width = L - i + 2  # columns i-1 .. L
        P[i, i - 1 :] = gp[:width]
        tail[i] = gs[width - 1] if width - 1 < gs.size else g.tail_mass
    return CountableMarkovChain(P, tail, start_state=1)


def solve_xi(sys: MG1System, max_expansions: int = 200) -> float:
    """Real root of ``1 + lam * phi'(s) = 0`` nearest the origin.

    At 0 the function equals ``1 - rho > 0`` and it increases in ``s``, so the
    root lies to the left. The bracket grows geometrically towards the left end
    of the transform's domain (halving the gap when that end is finite).
    """
    sys.require_stable()
    lam, s = sys.lam, sys.service
    f = lambda x: 1.0 + lam * s.laplace_deriv(x)
    right, f_right = 0.0, f(0.0)
    step = s.mean
    for n in range(1, max_expansions + 1):
        if math.isfinite(s.abscissa):
            left = s.abscissa * (1.0 - 0.5**n)
        else:
            left = -step * 2.0 ** (n - 1)
        try:
            f_left = f(left)
        except (OverflowError, ZeroDivisionError):
            break
        if not math.isfinite(f_left):
            break
        if f_left < 0:
            return optimize.brentq(f, left, right, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        if f_left == 0:
            return left
        right, f_right = left, f_left
    raise RuntimeError("xi not located")


def kyprianou_theta(sys: MG1System) -> float:
    """Limiting probability that the busy-period chain sits at 1 given it has not emptied."""
    xi = solve_xi(sys)
    lam, phi = sys.lam, sys.service.laplace
    return (xi - lam + lam * phi(xi)) / ((xi - lam) * phi(lam))


def erlang_xi(k: int, lam: float, beta: float) -> float:
    """Closed form ``(lam k beta^k)^{1/(k+1)} - beta``."""
    return beta * ((lam * k / beta) ** (1.0 / (k + 1)) - 1.0)


def erlang_A(k: int, lam: float, beta: float) -> float:
    return (beta + lam) * (k**k / (lam * beta**k)) ** (1.0 / (k + 1)) - k


def erlang_theta(k: int, lam: float, beta: float) -> float:
    return ((beta + lam) / beta) ** k * (1.0 - 1.0 / erlang_A(k, lam, beta))


def erlang_U(k: int, lam: float, beta: float) -> float | None:
    """Busy-period bound ``U`` for Erlang service with the mean condition at equality.

    ``None`` when ``k lam >= beta`` (unstable queue).
    """
    if k * lam >= beta:
        return None
    return 1.0 / (erlang_A(k, lam, beta) - 1.0) - k * lam / (beta - k * lam)


def busy_period_bound(sys: MG1System, x: DiscretePMF | str = "auto") -> BoundReport:
    """Compound geometric bound for the number of customers served in a busy period, minus one.

    ``x="auto"`` realizes ``X`` as the two-point law on adjacent integers whose
    mean meets the mean condition with equality (or 1 if that is larger).
    The report carries ``U = value / H_p(X)``.
    """
    sys.require_stable()
    lam, s, rho = sys.lam, sys.service, sys.rho
    p = s.laplace(lam)
    theta = kyprianou_theta(sys)
    delta_tilde = p * theta
    delta = delta_from_alt(delta_tilde)
    ew = rho / (1 - rho)
    ex_target = max(1.0, (1 - delta_tilde) / ((1 - p) * theta))
    if isinstance(x, str):
        if x != "auto":
            raise ValueError(f"unknown X choice {x!r}")
        x = point_mass(1) if ex_target == 1.0 else adjacent_mixture(ex_target)
    report = theorem_main_bound(p, delta, ew, x, provenance="busy-period")
    h = report.ingredients["H"]
    extra = {"theta": theta, "delta_tilde": delta_tilde, "rho": rho, "ex_target": ex_target, "U": report.value / h}
    report = report.replace(ingredients={**report.ingredients, **extra})
    if s.ifr is not True:
        return report.replace(valid=False, reason="service IFR")
    return report
