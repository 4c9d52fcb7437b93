from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bds.errors import ConvergenceError, DivergenceError, DomainError, IntegrabilityError
from bds.functions import get_function
from bds.params import ShapeParams
from bds.quadrature import (
    QuadratureConfig,
    b_monomial_moment,
    beta_weighted_integrals,
    integrate_b_weighted,
    transformed_integrand,
)


def test_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=1e-15)
    with pytest.raises(DomainError):
        QuadratureConfig(max_refinements=0)


def test_reference_values():
    assert integrate_b_weighted(ShapeParams.of(2, 1), 1, lambda t: t, growth_mu=1) == pytest.approx(0.5, rel=1e-13)
    assert integrate_b_weighted(ShapeParams.of(6, 1), 2, lambda t: t * t, growth_mu=2) == pytest.approx(0.2, rel=1e-13)


def test_b_monomial_moment_values():
    p = ShapeParams.of(6, 1)
    assert b_monomial_moment(p, 2, 0) == 1
    assert b_monomial_moment(p, 2, 2) == Fraction(1, 5)
    for k in (1, 4, 9):
        assert b_monomial_moment(ShapeParams.of(7, "1/2"), k, 1) == Fraction(k, 7)


def test_b_monomial_moment_against_gamma_ratio():
    import math
    p, k, j = ShapeParams.of(9, "3/2"), 4, 3
    c, g = 6.0, 1.5
    ref = math.gamma(k + j) * math.gamma(c + 1 - j) / (math.gamma(k) * math.gamma(c + 1) * g ** j)
    assert float(b_monomial_moment(p, k, j)) == pytest.approx(ref, rel=1e-14)


def test_divergence():
    with pytest.raises(DivergenceError):
        b_monomial_moment(ShapeParams.of(2, 1), 1, 3)
    with pytest.raises(IntegrabilityError):
        integrate_b_weighted(ShapeParams.of(2, 1), 1, get_function("t3"))


@given(st.sampled_from([(16, "1"), (24, "2"), (20, "1/2"), (11, "1")]), st.integers(1, 30), st.integers(0, 6))
def test_quadrature_vs_exact(ng, k, j):
    p = ShapeParams.of(*ng)
    if p.c - j <= 1:
        return
    exact = b_monomial_moment(p, k, j)
    got = integrate_b_weighted(p, k, lambda t: t ** j, growth_mu=j)
    assert abs(got - float(exact)) / float(exact) < 1e-10


def test_refinement_is_cauchy_and_reports_error():
    p = ShapeParams.of("3/2", 1)  # non-integer exponent at u = 1
    value, err = integrate_b_weighted(p, 3, get_function("inv1p"), full_output=True)
    assert err <= 1e-13 * abs(value) + 1e-15


def test_nonconvergence_raises():
    cfg = QuadratureConfig(rel_tol=1e-14, max_refinements=1)
    with pytest.raises(ConvergenceError):
        # rapid oscillation is beyond the rule at level 1
        integrate_b_weighted(ShapeParams.of(4, 1), 2, lambda t: np.sin(400 * t), cfg)


def test_oscillatory_low_order_reports_failure():
    # cos(t) against a weight decaying only like t^-(c+2) cannot reach 1e-13
    with pytest.raises(ConvergenceError):
        integrate_b_weighted(ShapeParams.of(3, 1), 1, np.cos)


def test_batched_matches_single():
    p = ShapeParams.of(10, 1)
    ks = np.arange(1, 25, dtype=float)
    res = beta_weighted_integrals(p.c, p.gamma, ks, np.cos)
    single = [integrate_b_weighted(p, int(k), np.cos) for k in ks]
    np.testing.assert_allclose(res.values, single, rtol=1e-15, atol=1e-16)
    assert res.levels.min() >= 1


def test_transformed_integrand_endpoints():
    p = ShapeParams.of(6, 2)
    one = get_function("t0")
    assert transformed_integrand(p, 1, one, [0.0])[0] == pytest.approx(4.0)
    assert transformed_integrand(p, 2, one, [0.0])[0] == 0.0
    assert transformed_integrand(p, 3, get_function("t2"), [1.0])[0] == 0.0
    u = np.linspace(0.0, 1.0, 2001)
    vals = transformed_integrand(p, 3, get_function("t2"), u)
    assert np.all(np.isfinite(vals))
    # behaves like (1 - u)^(c - 2) near u = 1, so it decays towards the limit 0
    assert vals[-2] < vals[-20] < vals[-200]
