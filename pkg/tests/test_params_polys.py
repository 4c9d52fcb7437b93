from fractions import Fraction

import math
import pytest
from hypothesis import given, strategies as st

from bds.errors import ParameterError
from bds.params import LogValue, ShapeParams, to_fraction
from bds.polys import RationalPoly, TrivariatePoly

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def test_to_fraction_parses_strings_exactly():
    assert to_fraction("3/2") == Fraction(3, 2)
    assert to_fraction("0.1") == Fraction(1, 10)
    assert to_fraction(0.5) == Fraction(1, 2)
    with pytest.raises(ParameterError):
        to_fraction("abc")


@pytest.mark.parametrize("args", [(0, 1), (-1, 1), (4, 0), (4, 1, 2, 1), (4, 1, -1, 0)])
def test_shape_params_rejects_invalid(args):
    with pytest.raises(ParameterError):
        ShapeParams.of(*args)


def test_shape_params_json_roundtrip():
    p = ShapeParams.of("33/2", "1/2", 1, 2)
    assert ShapeParams.from_json(p.to_json()) == p
    assert p.c == 33
    assert p.shifted(1).n == Fraction(35, 2)


def test_log_value():
    assert float(LogValue.zero()) == 0.0
    assert LogValue.from_float(-2.5).value == pytest.approx(-2.5)
    with pytest.raises(ValueError):
        LogValue(0.0, 0)
    with pytest.raises(ValueError):
        LogValue(-math.inf, 1)


@given(st.lists(small, max_size=5), st.lists(small, max_size=5), small)
def test_rational_poly_ring(a, b, x):
    p, q = RationalPoly(a), RationalPoly(b)
    assert (p * q)(x) == p(x) * q(x)
    assert (p + q)(x) == p(x) + q(x)
    assert (p - q)(x) == p(x) - q(x)


@given(st.lists(small, max_size=6))
def test_rational_poly_strings_roundtrip(a):
    p = RationalPoly(a)
    assert RationalPoly.from_strings(p.to_strings()) == p


def test_rational_poly_derivative_and_strip():
    p = RationalPoly([1, 2, 3, 0, 0])
    assert p.degree == 2
    assert p.derivative() == RationalPoly([2, 6])
    assert p.derivative(3) == RationalPoly()
    assert RationalPoly().degree == -1


@given(small, small, small)
def test_trivariate_shift(x, y, n):
    s = TrivariatePoly({(1, 2, 0): 3, (0, 1, 1): -1, (2, 0, 0): Fraction(1, 2)})
    # y -> y + n x
    assert s.substitute_y_shift().evaluate(x, y, n) == s.evaluate(x, y + n * x, n)
    d = s.diff_x()
    assert d.evaluate(x, y, n) == 3 * y * y + x
