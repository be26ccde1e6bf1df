import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geombound.markov import BirthDeathSpec, birth_death_chain
from geombound.pmf import DiscretePMF, geometric_pmf, mixed_poisson_gamma_pmf, polya_pmf
from geombound.queueing import deterministic, erlang, exponential, gamma_service
from geombound.reliability import (
    Classification,
    delta_from_alt,
    exponential_hazard_comparison,
    failure_rates,
    hazard_order_leq,
    mean_residual_life,
    nbue_check,
    stochastic_order_leq,
    tp2_check,
)
from geombound.suites import random_hazard_pairs


def test_rate_conventions():
    w = DiscretePMF([0.2, 0.3, 0.5])
    prof = failure_rates(w)
    np.testing.assert_allclose(prof.rates, [0.2 / 0.8, 0.3 / 0.5])
    np.testing.assert_allclose(prof.alt_rates, [0.2, 0.3 / 0.8])
    np.testing.assert_allclose(prof.alt_rates, prof.rates / (1 + prof.rates))
    assert prof.classification is Classification.IFR
    assert prof.inf_rate == pytest.approx(0.25)


def test_geometric_rates_are_constant():
    prof = failure_rates(geometric_pmf(0.3), structure="IFR")
    np.testing.assert_allclose(prof.rates, 0.3 / 0.7, rtol=1e-9)
    assert prof.classification is Classification.IFR
    assert prof.inf_rate_certified


def test_truncated_without_structure_is_undetermined():
    prof = failure_rates(geometric_pmf(0.3))
    assert prof.trend is Classification.IFR
    assert prof.classification is Classification.UNDETERMINED
    assert not prof.inf_rate_certified


def test_nonmonotone():
    assert failure_rates(DiscretePMF([0.3, 0.1, 0.3, 0.3])).classification is Classification.NONMONOTONE


def test_dfr_mixed_poisson():
    w = mixed_poisson_gamma_pmf(0.5, 1.0, 1.0)
    assert failure_rates(w, structure="DFR").classification is Classification.DFR


@pytest.mark.parametrize("m,d", [(10, 10), (10, 200), (200, 10), (200, 200)])
def test_polya_ifr_and_below_geometric(m, d):
    w = polya_pmf(m, d)
    assert failure_rates(w).classification is Classification.IFR
    assert stochastic_order_leq(w, geometric_pmf((d - 1) / (d + m - 1))) is True


def test_delta_from_alt():
    assert delta_from_alt(0.25) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        delta_from_alt(1.0)


def test_stochastic_order_between_geometrics():
    small, large = geometric_pmf(0.6), geometric_pmf(0.4)
    assert stochastic_order_leq(small, large) is True
    assert stochastic_order_leq(large, small) is False
    # each law's unresolved tail could still reorder the rates
    assert hazard_order_leq(small, large) is None
    exact_small, exact_large = DiscretePMF([0.6, 0.3, 0.1]), DiscretePMF([0.4, 0.3, 0.2, 0.1])
    assert hazard_order_leq(exact_small, exact_large) is True
    assert hazard_order_leq(exact_large, exact_small) is False


def test_undetermined_order_under_truncation():
    a = DiscretePMF([0.5, 0.2], 0.3)
    b = DiscretePMF([0.4, 0.2], 0.4)
    assert stochastic_order_leq(a, b) is None


@given(st.integers(0, 10**6))
def test_hazard_order_implies_stochastic_order(seed):
    for a, b in random_hazard_pairs(np.random.default_rng(seed), 3):
        assert hazard_order_leq(a, b) is True
        assert stochastic_order_leq(a, b) is True


def test_tp2_for_birth_death():
    chain = birth_death_chain(BirthDeathSpec((0.2, 0.25, 0.3), (0.4, 0.35, 0.3)), 30)
    assert tp2_check(chain)


def test_tp2_fails_for_reversed_rows():
    from geombound.markov import CountableMarkovChain

    P = np.array([[1.0, 0, 0], [0, 0, 1.0], [0, 1.0, 0]])
    assert not tp2_check(CountableMarkovChain(P, np.zeros(3)))


def test_nbue():
    assert nbue_check(exponential(1.0)).holds
    assert nbue_check(deterministic(2.0)).holds
    assert nbue_check(erlang(3, 1.0)).holds
    assert not nbue_check(gamma_service(0.5, 1.0)).holds


@pytest.mark.parametrize("shape", [0.5, 1.0, 2.0, 5.0])
def test_mean_residual_life(shape):
    s = gamma_service(shape, 2.0)
    assert mean_residual_life(s, 0.0) == pytest.approx(s.mean, rel=1e-12)
    later = mean_residual_life(s, 3.0)
    assert (later <= s.mean + 1e-12) == (shape >= 1)
    assert mean_residual_life(exponential(2.0), 5.0) == pytest.approx(0.5)
    assert math.isclose(mean_residual_life(deterministic(2.0), 0.5), 1.5)


def test_exponential_hazard_comparison():
    assert exponential_hazard_comparison(exponential(1.0), 1.0) == "T<=exp"
    assert exponential_hazard_comparison(gamma_service(2.0, 1.0), 1.0) == "exp<=T"
    assert exponential_hazard_comparison(gamma_service(2.0, 1.0), 0.5) is None
    assert exponential_hazard_comparison(gamma_service(0.5, 1.0), 1.0) == "T<=exp"
