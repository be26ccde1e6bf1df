import numpy as np
import pytest

from geombound.markov import hitting_time_pmf
from geombound.metrics import tv_distance
from geombound.montecarlo import (
    _departures,
    binomial_interval,
    empirical_pmf,
    sample_mixed_poisson,
    simulate_busy_period_customers,
    simulate_mg1,
)
from geombound.pmf import geometric_pmf, mixed_poisson_gamma_pmf
from geombound.queueing import MG1System, busy_period_chain, erlang, exponential, mg1_equilibrium


def test_departures_match_loop():
    rng = np.random.default_rng(1)
    arrivals = np.cumsum(rng.exponential(1.0, 500))
    services = rng.exponential(0.8, 500)
    dep, prev = np.empty(500), 0.0
    for i in range(500):
        prev = max(arrivals[i], prev) + services[i]
        dep[i] = prev
    np.testing.assert_allclose(_departures(arrivals, services), dep, rtol=1e-12)


def test_empirical_pmf():
    w = empirical_pmf(np.array([0, 0, 1, 3]))
    np.testing.assert_allclose(w.probs, [0.5, 0.25, 0, 0.25])


def test_binomial_interval_covers():
    lo, hi = binomial_interval(50, 100)
    assert lo < 0.5 < hi


def test_determinism():
    sys = MG1System(0.5, exponential(1.0))
    a = simulate_mg1(sys, 2000, 100, seed=7)
    b = simulate_mg1(sys, 2000, 100, seed=7)
    np.testing.assert_array_equal(a.pmf.probs, b.pmf.probs)
    assert (a.mean, a.mean_se, a.p0, a.customers) == (b.mean, b.mean_se, b.p0, b.customers)
    c = simulate_busy_period_customers(sys, 1000, seed=3)
    d = simulate_busy_period_customers(sys, 1000, seed=3)
    np.testing.assert_array_equal(c.pmf.probs, d.pmf.probs)
    e = simulate_busy_period_customers(sys, 1000, seed=4)
    assert c.mean != e.mean


def test_unstable_refused():
    with pytest.raises(ValueError):
        simulate_mg1(MG1System(1.2, exponential(1.0)), 100, 0)


def test_mm1_idle_fraction():
    sys = MG1System(0.5, exponential(1.0))
    r = simulate_mg1(sys, 40_000, 500, seed=11)
    assert abs(r.p0 - 0.5) <= 3 * r.p0_se + 1e-3
    assert abs(r.mean - mg1_equilibrium(sys).ew) <= 3 * r.mean_se + 1e-3
    assert abs(r.pmf.probs.sum() - 1.0) < 1e-9


def test_busy_period_against_chain():
    sys = MG1System(0.3, erlang(2, 2.0))
    sim = simulate_busy_period_customers(sys, 200_000, seed=5)
    w = hitting_time_pmf(busy_period_chain(sys, 300), 50_000)
    assert sim.periods == 200_000
    assert tv_distance(sim.pmf, w).hi < 0.01
    assert abs(sim.mean - 0.3 / 0.7) <= 3 * sim.mean_se


def test_mixed_poisson_sampling():
    sim = sample_mixed_poisson(1.0, 1.0, 0.5, 200_000, seed=2)
    assert tv_distance(sim, geometric_pmf(1 / 1.5)).hi < 0.01
    sim = sample_mixed_poisson(2.0, 0.5, 0.5, 200_000, seed=3)
    assert tv_distance(sim, mixed_poisson_gamma_pmf(2.0, 0.5, 0.5)).hi < 0.01
