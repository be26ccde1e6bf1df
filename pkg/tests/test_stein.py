import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geombound.pmf import CompoundGeometricSpec, DiscretePMF, adjacent_mixture, point_mass, polya_pmf
from geombound.stein import (
    EVEN,
    Cofinite,
    exhaustive_smoothness,
    literal_series,
    reconstruct_main_bound,
    sharpness_instance,
    singleton_increments,
    solve_fA,
    stein_residual,
    verify_smoothness_lemma,
)

SPEC = CompoundGeometricSpec(0.4, DiscretePMF([0.0, 0.3, 0.7]))


@pytest.mark.parametrize("A", [set(), {0}, {2, 5, 7}, set(range(20)), EVEN, Cofinite(frozenset({1, 4}))])
def test_residual(A):
    sol = solve_fA(SPEC, A, 50)
    assert sol.f[0] == 0.0
    assert stein_residual(SPEC, A, sol).max() < 1e-12


def test_probability_of_set():
    # P(Y = 0) = p
    assert solve_fA(SPEC, {0}, 10).prob_y == pytest.approx(0.4, rel=1e-12)
    assert solve_fA(SPEC, Cofinite(frozenset({0})), 10).prob_y == pytest.approx(0.6, rel=1e-12)


def test_complement_negates():
    a = solve_fA(SPEC, {1, 3}, 20)
    b = solve_fA(SPEC, Cofinite(frozenset({1, 3})), 20)
    np.testing.assert_allclose(a.f, -b.f, atol=1e-15)


def test_unknown_preset():
    with pytest.raises(ValueError):
        solve_fA(SPEC, "odd", 10)


@given(st.sets(st.integers(0, 15), max_size=8))
def test_literal_series_has_same_increments(A):
    sol = solve_fA(SPEC, A, 25)
    lit = literal_series(SPEC, A, 25)
    np.testing.assert_allclose(np.diff(lit), sol.increments, atol=1e-11)


@given(st.floats(0.05, 0.95), st.floats(1.0, 4.0), st.sets(st.integers(0, 12)))
def test_increments_within_smoothness_bound(p, mean, A):
    spec = CompoundGeometricSpec(p, adjacent_mixture(mean))
    check = verify_smoothness_lemma(spec, [A], 30)
    assert check.ok


def test_increments_are_additive():
    D = singleton_increments(SPEC, 6, 10)
    np.testing.assert_allclose(D[[1, 4]].sum(axis=0), solve_fA(SPEC, {1, 4}, 10).increments, atol=1e-13)


def test_exhaustive():
    check = exhaustive_smoothness(SPEC, support=10)
    assert check.ok and check.sup_increment <= check.bound


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_sharpness(p):
    check = sharpness_instance(p)
    assert check.attained
    assert check.sup_increment == pytest.approx(1 / p, abs=1e-8)


def test_unit_summand_is_not_attained_at_the_bound_for_even():
    spec = CompoundGeometricSpec(0.5, point_mass(1))
    check = verify_smoothness_lemma(spec, [EVEN], 30)
    assert check.ok


@pytest.mark.parametrize("w", [polya_pmf(5, 4), DiscretePMF([0.4, 0.3, 0.2, 0.1])])
def test_reconstruction(w):
    out = reconstruct_main_bound(w)
    assert out["mean_condition"] and out["ok"]
    assert 0.0 <= out["max_gap"] <= out["bound"] + 1e-12
