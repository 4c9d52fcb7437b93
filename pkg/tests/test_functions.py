import pickle

import numpy as np
import pytest

from bds.errors import DomainError, OrderError
from bds.functions import REGISTRY, LinearCombination, Polynomial, get_function, monomial, norm_mu, self_check


@pytest.mark.parametrize("fid", sorted(REGISTRY))
def test_registry_self_check(fid):
    assert self_check(REGISTRY[fid]) <= 1e-6


@pytest.mark.parametrize("fid", sorted(REGISTRY))
def test_derivative_zero_is_evaluate(fid):
    f = REGISTRY[fid]
    t = np.linspace(0, 3, 7)
    np.testing.assert_array_equal(f.derivative(0)(t), f.evaluate(t))


@pytest.mark.parametrize("fid", sorted(REGISTRY))
def test_picklable(fid):
    f = REGISTRY[fid]
    g = pickle.loads(pickle.dumps(f))
    assert g.id == f.id
    np.testing.assert_array_equal(g.evaluate(np.arange(3.0)), f.evaluate(np.arange(3.0)))


def test_monomials_exact():
    f = monomial(5)
    assert f.poly.coefficients[-1] == 1 and f.poly.degree == 5
    assert f.derivative(5)(2.0) == pytest.approx(120.0)
    assert f.derivative(6)(2.0) == 0.0
    assert f.growth_mu == 5


def test_spline_is_only_c1():
    f = get_function("spline_c1")
    assert f.max_order == 1
    with pytest.raises(OrderError):
        f.derivative(2)


def test_unknown_id():
    with pytest.raises(DomainError):
        get_function("t9")


def test_linear_combination():
    h = LinearCombination([(2.0, get_function("sin")), (-1.0, get_function("t2"))])
    t = np.linspace(0, 2, 5)
    np.testing.assert_allclose(h.derivative(1)(t), 2 * np.cos(t) - 2 * t)
    assert h.growth_mu == 2


def test_norm_mu():
    assert norm_mu(get_function("sin")) == pytest.approx(1.0, abs=1e-6)
    assert norm_mu(get_function("t2")) <= 1.0
    assert norm_mu(Polynomial([1, 1]), mu=1) == pytest.approx(1.0)
