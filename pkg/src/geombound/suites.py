"""Property suites shared by the command line and the tests.

Each suite returns a list of :class:`Check`; a suite passes when all do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import (
    BoundReport,
    mixed_poisson_hazard_bound,
    pmf_hazard_bound,
    poisson_process_bounds,
    three_state_example,
    translated_bound,
)
from .markov import (
    BirthDeathSpec,
    CountableMarkovChain,
    bd_extinction_bound,
    birth_death_chain,
    hitting_time_pmf,
)
from .metrics import Interval, kolmogorov_distance, tv_distance
from .montecarlo import sample_mixed_poisson, simulate_busy_period_customers, simulate_mg1
from .pmf import (
    CompoundGeometricSpec,
    DiscretePMF,
    compound_geometric_pmf,
    conditional_shift,
    geometric_pmf,
    mixed_poisson_gamma_pmf,
    moments,
    polya_pmf,
)
from .queueing import (
    MG1System,
    busy_period_chain,
    corollary_q1_bound,
    deterministic,
    erlang,
    exponential,
    gamma_service,
    mg1_equilibrium,
)
from .reliability import Classification, failure_rates, hazard_order_leq, stochastic_order_leq
from .stein import (
    EVEN,
    Cofinite,
    exhaustive_smoothness,
    reconstruct_main_bound,
    sharpness_instance,
    solve_fA,
    stein_residual,
)
from .tables import POLYA_ROWS

SOUNDNESS_SLACK = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def approximant_pmf(report: BoundReport, like: DiscretePMF) -> DiscretePMF:
    """Materialize a report's approximant far enough to compare with ``like``."""
    a = report.approximant
    level = max(len(like) + 50, 200)
    if a["kind"] == "geometric":
        return geometric_pmf(a["p"], L=level)
    x = DiscretePMF(np.asarray(a["x_probs"]))
    return compound_geometric_pmf(CompoundGeometricSpec(a["p"], x), L=level)


def exact_interval(report: BoundReport, w: DiscretePMF) -> Interval:
    y = approximant_pmf(report, w)
    if report.metric == "Kolmogorov":
        return kolmogorov_distance(w, y)
    return tv_distance(w, y)


def _sound(name: str, report: BoundReport, w: DiscretePMF) -> Check:
    exact = exact_interval(report, w)
    if not report.valid:
        return Check(name, True, f"skipped, invalid ({report.reason})")
    ok = report.value >= exact.lo - SOUNDNESS_SLACK
    return Check(name, ok, f"bound {report.value:.6g} vs exact [{exact.lo:.6g}, {exact.hi:.6g}]")


# instance generators -------------------------------------------------------


def three_state_chain(a1, b1, e1, a2, b2, e2) -> CountableMarkovChain:
    P = np.array([[1.0, 0.0, 0.0], [a1, b1, e1], [a2, b2, e2]])
    return CountableMarkovChain(P, np.zeros(3), start_state=2)


def random_three_state_params(rng: np.random.Generator, count: int) -> list[tuple]:
    """Parameter sets meeting the sufficient IFR conditions
    ``a1 >= a2`` and ``b1 (b2 + e2) >= b2 (b1 + e1)``."""
    out = []
    while len(out) < count:
        r1, r2 = rng.dirichlet((1.0, 1.0, 1.0), size=2)
        if min(r1.min(), r2.min()) < 1e-3:
            continue
        a1, b1, e1 = r1
        a2, b2, e2 = r2
        if a1 >= a2 and b1 * (b2 + e2) >= b2 * (b1 + e1):
            out.append((a1, b1, e1, a2, b2, e2))
    return out


def random_tp2_birth_death(rng: np.random.Generator, count: int, length: int = 6) -> list[BirthDeathSpec]:
    """Specs with ``r_j >= 1/2`` throughout and ``p < q`` in the repeating tail."""
    out = []
    while len(out) < count:
        q = rng.uniform(0.08, 0.4, size=length)
        p = rng.uniform(0.0, 1.0, size=length) * (0.5 - q)
        p[-1] = min(p[-1], 0.3 * q[-1])
        out.append(BirthDeathSpec.from_arrays(p, q))
    return out


def pmf_from_alt_rates(alt: np.ndarray) -> DiscretePMF:
    """Pmf with ``P(W=j)/P(W>=j) = alt[j]``; ``alt[-1]`` is forced to 1."""
    alt = np.array(alt, dtype=float)
    alt[-1] = 1.0
    surv = np.concatenate([[1.0], np.cumprod(1.0 - alt[:-1])])
    probs = surv * alt
    return DiscretePMF(probs / math.fsum(probs), 0.0)


# suites --------------------------------------------------------------------


def soundness_suite(seed: int = 0) -> list[Check]:
    from .bounds import polya_bounds

    checks: list[Check] = []
    for m, d in POLYA_ROWS:
        w = polya_pmf(m, d)
        b = polya_bounds(m, d)
        checks.append(_sound(f"polya({m},{d}) tv", b["upper_tv"], w))
        checks.append(_sound(f"polya({m},{d}) kolmogorov", b["upper_k_obretenov"], w))
        lo = tv_distance(w, geometric_pmf(b["p"])).lo
        checks.append(Check(f"polya({m},{d}) lower", b["lower_tv"] <= lo + SOUNDNESS_SLACK, f"{b['lower_tv']:.6g} <= {lo:.6g}"))

    for alpha in (1, 2, 5):
        for beta in (0.5, 1.0):
            for lam in (0.1, 0.5):
                t = gamma_service(alpha, beta)
                w = mixed_poisson_gamma_pmf(alpha, beta, lam, L=3000)
                tag = f"mixed-poisson({alpha},{beta},{lam})"
                pp = poisson_process_bounds(lam, t)
                checks.append(_sound(tag + " tv", pp["tv"], w))
                checks.append(_sound(tag + " kolmogorov", pp["kolmogorov"], w))
                for p in (t.laplace(lam), 1.0 / (1.0 + lam * t.mean)):
                    checks.append(_sound(tag + f" hazard p={p:.4f}", mixed_poisson_hazard_bound(lam, p, t), w))
                    checks.append(_sound(tag + f" pmf hazard p={p:.4f}", pmf_hazard_bound(w, p), w))

    rng = np.random.default_rng(seed)
    for i, params in enumerate(random_three_state_params(rng, 20)):
        w = hitting_time_pmf(three_state_chain(*params), 100_000)
        report = translated_bound(w, 1, structure="IFR")
        checks.append(_sound(f"three-state #{i} translated", report, conditional_shift(w, 1)))
        ex = three_state_example(*params)
        agree = abs(ex["bound"] - report.value) <= 1e-10
        checks.append(Check(f"three-state #{i} closed form", agree, f"{ex['bound']:.12g} vs {report.value:.12g}"))

    for i, spec in enumerate(random_tp2_birth_death(rng, 10)):
        report = bd_extinction_bound(spec, bd3=True)
        level = report.ingredients.get("state_level")
        w = hitting_time_pmf(birth_death_chain(spec, level), 200_000)
        checks.append(_sound(f"birth-death #{i}", report, w))
        if not report.valid:
            checks.append(Check(f"birth-death #{i} validity", False, f"invalid: {report.reason}"))
    return checks


STEIN_SPECS = (
    (0.5, (0.0, 0.5, 0.5)),
    (0.3, (0.0, 1.0)),
    (0.2, (0.0, 0.0, 1.0)),
    (0.7, (0.0, 0.2, 0.5, 0.3)),
    (0.1, (0.0, 0.25, 0.25, 0.25, 0.25)),
)

RECONSTRUCTION_PMFS = (
    ("polya(5,4)", lambda: polya_pmf(5, 4)),
    ("polya(8,3)", lambda: polya_pmf(8, 3)),
    ("decreasing", lambda: DiscretePMF([0.4, 0.3, 0.2, 0.1])),
    ("halving", lambda: DiscretePMF([0.5, 0.25, 0.125, 0.125])),
    ("binomial(6,0.3)", lambda: _binomial(6, 0.3)),
)


def _binomial(n: int, q: float) -> DiscretePMF:
    from scipy import stats

    probs = stats.binom(n, q).pmf(np.arange(n + 1))
    return DiscretePMF(probs / math.fsum(probs))


def stein_suite(seed: int = 0, residual_tol: float = 1e-8) -> list[Check]:
    checks: list[Check] = []
    rng = np.random.default_rng(seed)
    for p, xp in STEIN_SPECS:
        spec = CompoundGeometricSpec(p, DiscretePMF(np.array(xp)))
        tag = f"p={p} X={xp[1:]}"
        family = [set(), {a for a in range(40)}, EVEN, Cofinite(frozenset({0, 3}))]
        family += [{a} for a in range(13)]
        family += [set(np.flatnonzero(rng.random(13) < 0.5).tolist()) for _ in range(10)]
        worst = 0.0
        for A in family:
            sol = solve_fA(spec, A, 40)
            worst = max(worst, float(stein_residual(spec, A, sol).max()))
        checks.append(Check(f"residual {tag}", worst < residual_tol, f"max residual {worst:.3g}"))
        smooth = exhaustive_smoothness(spec)
        checks.append(Check(f"smoothness {tag}", smooth.ok, f"sup {smooth.sup_increment:.10g} <= {smooth.bound:.10g}"))
    for p in (0.1, 0.3, 0.5, 0.8):
        sharp = sharpness_instance(p)
        status = "equality attained" if sharp.attained else "not attained"
        ok = sharp.attained and abs(sharp.sup_increment - 1.0 / p) <= 1e-8
        checks.append(Check(f"sharpness p={p}", ok, f"{status}: sup {sharp.sup_increment:.12g}, 1/p {1 / p:.12g}"))
    for name, make in RECONSTRUCTION_PMFS:
        r = reconstruct_main_bound(make())
        ok = r["ok"] and r["mean_condition"]
        checks.append(Check(f"reconstruction {name}", ok, f"max gap {r['max_gap']:.6g} <= {r['bound']:.6g}"))
    return checks


def random_hazard_pairs(rng: np.random.Generator, count: int, max_len: int = 12) -> list[tuple[DiscretePMF, DiscretePMF]]:
    """Pairs ``(a, b)`` for which the hazard check returns true.

    Half are built from pointwise ordered alternative rates; the rest are
    unconstrained random pmfs that happen to pass the check.
    """
    pairs = []
    while len(pairs) < count // 2:
        n = int(rng.integers(2, max_len + 1))
        rb = rng.uniform(0.02, 0.9, size=n)
        ra = rb + rng.uniform(0.0, 1.0, size=n) * (1.0 - rb)
        a, b = pmf_from_alt_rates(ra), pmf_from_alt_rates(rb)
        if hazard_order_leq(a, b):
            pairs.append((a, b))
    while len(pairs) < count:
        n = int(rng.integers(2, 5))
        a = DiscretePMF(rng.dirichlet(np.ones(n)))
        b = DiscretePMF(rng.dirichlet(np.ones(int(rng.integers(n, n + 3)))))
        if hazard_order_leq(a, b):
            pairs.append((a, b))
    return pairs


def orders_suite(seed: int = 0) -> list[Check]:
    checks: list[Check] = []
    rng = np.random.default_rng(seed)
    pairs = random_hazard_pairs(rng, 100)
    bad = sum(1 for a, b in pairs if stochastic_order_leq(a, b) is not True)
    checks.append(Check("hazard implies stochastic (100 pairs)", bad == 0, f"{bad} counterexamples"))
    for m, d in ((10, 10), (10, 200), (200, 10), (200, 200)):
        w = polya_pmf(m, d)
        prof = failure_rates(w)
        checks.append(Check(f"polya({m},{d}) IFR", prof.classification is Classification.IFR, prof.classification.value))
        p = (d - 1) / (d + m - 1)
        st = stochastic_order_leq(w, geometric_pmf(p))
        checks.append(Check(f"polya({m},{d}) <=st Geom", st is True, str(st)))
    return checks


SIM_SERVICES = (
    ("exponential", lambda rho: exponential(1.0)),
    ("erlang2", lambda rho: erlang(2, 2.0)),
    ("deterministic", lambda rho: deterministic(1.0)),
)


def _replication_check(name: str, values, errors, target: float) -> Check:
    """At least 95% of replications within 3 standard errors, and the pooled mean within 3."""
    values, errors = np.asarray(values), np.asarray(errors)
    inside = float(np.mean(np.abs(values - target) <= 3.0 * errors))
    pooled_z = (values.mean() - target) / (values.std(ddof=1) / math.sqrt(values.size))
    ok = bool(inside >= 0.95 and abs(pooled_z) <= 3.0)
    return Check(name, ok, f"{inside:.0%} within 3se, pooled z {pooled_z:+.2f}")


def simulation_suite(
    seed: int = 0,
    replications: int = 20,
    horizon: float = 50_000.0,
    warmup: float = 500.0,
    busy_periods: int = 10**6,
    mixed_samples: int = 10**6,
) -> list[Check]:
    """Closed forms against seeded simulation."""
    checks: list[Check] = []
    seeds = iter(np.random.SeedSequence(seed).generate_state(replications * 16))
    for rho in (0.3, 0.5):
        for name, make in SIM_SERVICES:
            sys = MG1System(rho, make(rho))
            eq = mg1_equilibrium(sys)
            runs = [simulate_mg1(sys, horizon, warmup, seed=int(next(seeds))) for _ in range(replications)]
            tag = f"mg1 {name} rho={rho}"
            checks.append(_replication_check(tag + " EW", [r.mean for r in runs], [r.mean_se for r in runs], eq.ew))
            checks.append(_replication_check(tag + " P(W=0)", [r.p0 for r in runs], [r.p0_se for r in runs], eq.p0))
            # soundness at simulation scale: TV of the pooled pmf, with 3 standard
            # errors per coordinate as slack on the L1 distance
            n = max(r.pmf.probs.size for r in runs)
            stack = np.array([r.pmf.padded(n) for r in runs])
            pooled = DiscretePMF.from_probs(stack.mean(axis=0))
            tv = tv_distance(pooled, geometric_pmf(1.0 - rho)).lo
            slack = 0.5 * float(np.sum(3.0 * stack.std(axis=0, ddof=1) / math.sqrt(replications)))
            bound = corollary_q1_bound(sys).value
            checks.append(Check(tag + " TV to Geom", bool(tv - slack <= bound), f"TV {tv:.4g} slack {slack:.2g} bound {bound:.4g}"))
    for name, make in SIM_SERVICES[:2]:
        sys = MG1System(0.3, make(0.3))
        w = hitting_time_pmf(busy_period_chain(sys, 400), 100_000)
        worst = 0.0
        means, mean_se, ones, ones_se = [], [], [], []
        for _ in range(replications):
            sim = simulate_busy_period_customers(sys, busy_periods, seed=int(next(seeds)))
            worst = max(worst, tv_distance(sim.pmf, w).hi)
            means.append(sim.mean)
            mean_se.append(sim.mean_se)
            q = float(sim.pmf.probs[0])
            ones.append(q)
            ones_se.append(math.sqrt(q * (1 - q) / sim.periods))
        tag = f"busy period {name} rho=0.3"
        checks.append(Check(tag + " TV", worst < 0.01, f"worst TV {worst:.4g} over {replications} runs"))
        # counts minus one, so the mean is rho/(1-rho)
        checks.append(_replication_check(tag + " mean", means, mean_se, 0.3 / 0.7))
        checks.append(_replication_check(tag + " P(count=1)", ones, ones_se, sys.service.laplace(sys.lam)))
    for alpha, beta, lam in ((1.0, 1.0, 0.5), (2.0, 0.5, 0.5)):
        exact = mixed_poisson_gamma_pmf(alpha, beta, lam)
        sims = [sample_mixed_poisson(alpha, beta, lam, mixed_samples, seed=int(next(seeds))) for _ in range(replications)]
        tag = f"mixed poisson ({alpha:g},{beta:g},{lam:g})"
        worst = max(tv_distance(sim, exact).hi for sim in sims)
        checks.append(Check(tag + " TV", worst < 0.01, f"worst TV {worst:.4g}"))
        ms = [moments(sim) for sim in sims]
        checks.append(
            _replication_check(
                tag + " mean", [m.mean for m in ms], [math.sqrt(m.variance / mixed_samples) for m in ms], lam * alpha / beta
            )
        )
    return checks


SUITES = {
    "soundness": soundness_suite,
    "stein": stein_suite,
    "orders": orders_suite,
    "simulation": simulation_suite,
}
