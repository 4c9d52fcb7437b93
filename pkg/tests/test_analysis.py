from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bds.analysis import (
    ModulusQuery,
    error_bound_ratio,
    loglog_slope,
    modulus_of_continuity,
    moment_order_fit,
    parallel_map,
    pointwise_convergence_check,
    ratio_bounded,
    resolve_jobs,
    richardson,
    voronovskaja_check,
    voronovskaja_coefficients,
    voronovskaja_exact_sequence,
    voronovskaja_limit,
    voronovskaja_rhs,
)
from bds.errors import DomainError, InstabilityError, OrderError, ParameterError
from bds.functions import get_function
from bds.params import ShapeParams
from bds.polys import RationalPoly

SHORT_GRID = tuple(2 ** e for e in range(6, 12))


# --- moduli ------------------------------------------------------------------

def test_modulus_examples():
    iv = (0.5, 2.0)
    assert modulus_of_continuity(ModulusQuery(get_function("t1"), 1, 0.1, iv)) == pytest.approx(0.1, rel=1e-12)
    assert modulus_of_continuity(ModulusQuery(get_function("affine"), 2, 0.3, iv)) == pytest.approx(0, abs=1e-13)
    assert modulus_of_continuity(ModulusQuery(get_function("t2"), 2, 0.2, iv)) == pytest.approx(0.08, rel=1e-10)


def test_modulus_empty_domain():
    with pytest.raises(DomainError):
        ModulusQuery(get_function("t2"), 2, 0.8, (0.5, 2.0))
    with pytest.raises(DomainError):
        ModulusQuery(get_function("t2"), 1, 0.1, (0.0, 2.0))
    with pytest.raises(DomainError):
        ModulusQuery(get_function("t2"), 3, 0.1, (0.5, 2.0))
    with pytest.raises(DomainError):
        modulus_of_continuity(ModulusQuery(get_function("t2"), 1, 0.1, (0.5, 2.0)), grid_points=10)


def test_modulus_domain_keeps_points_inside():
    # sqrt-like growth near the left end: sampling outside [a, b] would blow up
    f = lambda t: np.where(t >= 1.0, np.sqrt(np.abs(t - 1.0)), np.nan)
    val = modulus_of_continuity(ModulusQuery(f, 2, 0.5, (1.0, 2.0)))
    assert np.isfinite(val)


@given(st.sampled_from(["sin", "exp_neg", "t2", "inv1p"]), st.floats(0.01, 0.3), st.sampled_from([1, 2]))
def test_modulus_monotone_and_zero(fid, delta, order):
    f = get_function(fid)
    iv = (0.5, 2.0)
    small = modulus_of_continuity(ModulusQuery(f, order, delta, iv))
    big = modulus_of_continuity(ModulusQuery(f, order, delta * 2, iv))
    assert small <= big * (1 + 1e-4)
    assert modulus_of_continuity(ModulusQuery(f, order, 0.0, iv)) == 0.0


@given(st.sampled_from(["sin", "exp_neg", "t2", "inv1p", "t3"]), st.floats(0.01, 0.3))
def test_modulus_subadditive(fid, delta):
    f = get_function(fid)
    iv = (0.5, 2.0)
    w1 = modulus_of_continuity(ModulusQuery(f, 1, delta, iv))
    w2 = modulus_of_continuity(ModulusQuery(f, 1, 2 * delta, iv))
    assert w2 <= 2 * w1 * (1 + 1e-4)


# --- Voronovskaja --------------------------------------------------------------

def test_rhs_examples():
    p = ShapeParams.of(64)
    f2 = get_function("t2")
    assert voronovskaja_rhs(p, f2, 0, 1.0) == pytest.approx(4.0)
    for ab in [(0, 0), (1, 2), (2, 5)]:
        q = ShapeParams.of(64, 3, *ab)
        assert voronovskaja_rhs(q, get_function("t1"), 1, 1.7) == pytest.approx(-ab[1])
    x = 0.6
    q = ShapeParams.of(64, 2, 1, 3)
    f = get_function("exp_neg")
    assert voronovskaja_rhs(q, f, 0, x) == pytest.approx((1 - 3 * x) * -np.exp(-x) + x * (1 + 2 * x) * np.exp(-x))


def test_rhs_order_error():
    with pytest.raises(OrderError):
        voronovskaja_rhs(ShapeParams.of(64), get_function("spline_c1"), 0, 1.0)


def test_stated_and_derived_forms():
    p = ShapeParams.of(64, 2)
    assert voronovskaja_coefficients(p, 1, 1.0, "stated")[1] == 6
    assert voronovskaja_coefficients(p, 1, 1.0, "derived")[1] == 5
    q = ShapeParams.of(64, 1, 1, 2)
    for r in range(4):
        assert voronovskaja_coefficients(q, r, 0.7, "stated") == voronovskaja_coefficients(q, r, 0.7, "derived")
    for r in (0,):
        assert voronovskaja_coefficients(p, r, 0.7, "stated") == voronovskaja_coefficients(p, r, 0.7, "derived")


def _richardson_limit(ns, seq):
    return richardson(ns, [float(s) for s in seq])[0]


def test_exact_sequence_r0():
    ns = SHORT_GRID
    seq = voronovskaja_exact_sequence(ShapeParams.of(64), RationalPoly([0, 0, 1]), 0, 1, ns)
    for n, s in zip(ns, seq):
        assert s == Fraction(4 * n, n - 1)
    assert _richardson_limit(ns, seq) == pytest.approx(4.0, rel=1e-8)


@pytest.mark.parametrize("g", ["1", "2", "1/2"])
@pytest.mark.parametrize("ab", [(0, 0), (1, 2)])
@pytest.mark.parametrize("r", [0, 1, 2])
def test_exact_sequences_converge_to_derived_limit(g, ab, r):
    params = ShapeParams.of(64, g, *ab)
    poly = RationalPoly([1, -2, 1, 3, 1])  # degree r + 2 is covered for r <= 2
    f = get_function("t0")
    ns = tuple(2 ** e for e in range(6, 15))
    seq = voronovskaja_exact_sequence(params, poly, r, Fraction(3, 4), ns)
    from bds.functions import Polynomial
    fp = Polynomial(list(poly.coefficients))
    lim = voronovskaja_limit(params, fp, r, 0.75)
    residual = [float(s) - lim for s in seq]
    assert _richardson_limit(ns, seq) == pytest.approx(lim, rel=1e-6, abs=1e-6)
    slope = loglog_slope(ns, residual)
    assert slope == pytest.approx(-1, abs=0.2)


def test_exact_residual_against_stated_form_gamma1():
    params = ShapeParams.of(64, 1, 1, 2)
    poly = RationalPoly([0, 0, 0, 1])
    from bds.functions import Polynomial
    ns = tuple(2 ** e for e in range(6, 15))
    seq = voronovskaja_exact_sequence(params, poly, 1, 1, ns)
    rhs = voronovskaja_rhs(params, Polynomial([0, 0, 0, 1]), 1, 1.0)
    assert loglog_slope(ns, [float(s) - rhs for s in seq]) == pytest.approx(-1, abs=0.2)


def test_richardson_instability():
    ns = [64, 128, 256, 512]
    with pytest.raises(InstabilityError):
        richardson(ns, [1.0, -5.0, 9.0, -20.0])
    with pytest.raises(ParameterError):
        richardson(ns[:2], [1.0, 2.0])


def test_voronovskaja_check_r0():
    rep = voronovskaja_check(ShapeParams.of(64), get_function("t2"), 0, 1.0, n_grid=SHORT_GRID)
    assert rep.passed and rep.rel_deviation < 5e-3
    assert rep.fitted_rate == pytest.approx(-1, abs=0.2)


def test_voronovskaja_check_zero_target():
    rep = voronovskaja_check(ShapeParams.of(64, 1, 1, 2), get_function("t2"), 1, 1.0, n_grid=SHORT_GRID)
    assert rep.target == 0 and rep.abs_deviation < 0.05 and rep.passed


def test_voronovskaja_constant():
    rep = voronovskaja_check(ShapeParams.of(64), get_function("t0"), 0, 1.0, n_grid=SHORT_GRID)
    assert max(abs(v) for v in rep.observed) < 1e-8


# --- pointwise convergence ---------------------------------------------------------

def test_pointwise_linear_exact():
    rep = pointwise_convergence_check(ShapeParams.of(64), get_function("t1"), 0, 1.3, n_grid=SHORT_GRID)
    assert rep.passed and max(rep.observed) < 1e-12


def test_pointwise_rate_t2():
    rep = pointwise_convergence_check(ShapeParams.of(64, 1, 1, 2), get_function("t2"), 1, 1.0, n_grid=SHORT_GRID)
    assert rep.passed
    assert rep.fitted_rate == pytest.approx(-2, abs=0.2)


def test_pointwise_rate_exp():
    rep = pointwise_convergence_check(ShapeParams.of(64), get_function("exp_neg"), 2, 1.0, n_grid=SHORT_GRID)
    assert rep.passed and rep.fitted_rate == pytest.approx(-1, abs=0.1)


# --- error bound -------------------------------------------------------------------

def test_error_bound_affine():
    rows = error_bound_ratio(ShapeParams.of(64), get_function("affine"), 0, (0.2, 3.0, 0.5, 2.0), n_grid=(64, 128, 256))
    assert all(r.lhs < 1e-11 for r in rows)


def test_error_bound_t2():
    rows = error_bound_ratio(ShapeParams.of(64), get_function("t2"), 0, (0.2, 3.0, 0.5, 2.0), n_grid=(64, 128, 256, 512))
    assert ratio_bounded(rows) and ratio_bounded(rows, outer=True)
    # omega_2(t^2, n^-1/2) = 2/n
    assert rows[0].rhs == pytest.approx(2 / 64 + 1 / 64, rel=1e-3)


def test_error_bound_validation():
    with pytest.raises(DomainError):
        error_bound_ratio(ShapeParams.of(64), get_function("t2"), 0, (0.5, 3.0, 0.2, 2.0))


# --- order fits, plumbing --------------------------------------------------------

def test_moment_order_fit_m1_exact_slope():
    fits = moment_order_fit(ShapeParams.of(64, 1, 1, 2), 1, orders=(1, 2, 4))
    assert fits[1].slope == pytest.approx(-1, abs=0.01)
    assert fits[2].slope == pytest.approx(-1, abs=0.15)
    assert fits[4].slope == pytest.approx(-2, abs=0.15)


def test_moment_order_fit_drops_zero():
    fits = moment_order_fit(ShapeParams.of(64), 1, orders=(1, 2), kind="U")
    assert fits[1].slope is None and len(fits[1].dropped) == 9


def test_moment_order_fit_pole():
    with pytest.raises(ParameterError):
        moment_order_fit(ShapeParams.of(64, 2), 1, n_grid=(4, 8), orders=(2,))


def test_parallel_map_matches_serial():
    items = list(range(6))
    assert parallel_map(abs, items, jobs=2) == [abs(i) for i in items]


def test_parallel_voronovskaja_deterministic():
    args = (ShapeParams.of(64), get_function("exp_neg"), 0, 1.0)
    a = voronovskaja_check(*args, n_grid=SHORT_GRID, jobs=1)
    b = voronovskaja_check(*args, n_grid=SHORT_GRID, jobs=2)
    assert a.to_json() == b.to_json()


def test_resolve_jobs(monkeypatch):
    monkeypatch.setenv("BDS_JOBS", "3")
    assert resolve_jobs(8) == 3
    monkeypatch.delenv("BDS_JOBS")
    assert resolve_jobs(2) == 2 and resolve_jobs() >= 1
    monkeypatch.setenv("BDS_JOBS", "x")
    with pytest.raises(ParameterError):
        resolve_jobs()
