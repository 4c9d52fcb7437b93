"""Test functions with analytic derivatives and a declared growth exponent.

Every function here is a small picklable object so it can be shipped to
worker processes. ``evaluate`` and ``derivative(j)`` accept scalars or
numpy arrays.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Dict, Sequence

import numpy as np

from .errors import DomainError, OrderError
from .polys import RationalPoly

UNLIMITED = 64


class FunctionSpec:
    """Base class: ``f`` on ``[0, inf)`` with ``|f(t)| <= M (1+t)**growth_mu``."""

    id: str = ""
    max_order: int = 0
    growth_mu: float = 0.0

    def _derivative(self, order: int, t):
        raise NotImplementedError

    def evaluate(self, t):
        return self._derivative(0, t)

    def __call__(self, t):
        return self.evaluate(t)

    def derivative(self, order: int) -> Callable:
        """The ``order``-th derivative as a callable."""
        if order < 0 or order > self.max_order:
            raise OrderError(f"{self.id}: derivative of order {order} exceeds max_order {self.max_order}")
        return lambda t: self._derivative(order, t)

    def derivative_growth(self, order: int) -> float:
        """Growth exponent assumed for ``f^(order)``."""
        return max(self.growth_mu - order, 0.0)

    def __repr__(self):
        return f"{type(self).__name__}({self.id!r})"


class Polynomial(FunctionSpec):
    """``sum_i coeffs[i] t**i``. Exact coefficients are kept when given."""

    def __init__(self, coeffs: Sequence, fid: str | None = None):
        if all(isinstance(c, (int, Fraction)) for c in coeffs):
            self.poly = RationalPoly(coeffs)
            coeffs = [float(c) for c in self.poly.coefficients]
        else:
            self.poly = None
        self.coeffs = np.trim_zeros(np.asarray(coeffs, dtype=float), "b")
        self.degree = max(len(self.coeffs) - 1, 0)
        self.id = fid or "poly[" + ",".join(repr(float(c)) for c in self.coeffs) + "]"
        self.max_order = UNLIMITED
        self.growth_mu = float(self.degree)

    def _derivative(self, order, t):
        cs = np.polynomial.polynomial.polyder(self.coeffs, order) if order else self.coeffs
        t = np.asarray(t, dtype=float)
        if len(cs) == 0:
            return np.zeros_like(t) if t.ndim else 0.0
        out = np.polynomial.polynomial.polyval(t, cs)
        return np.zeros_like(t) + out if t.ndim else float(out)

    def __reduce__(self):
        coeffs = list(self.poly.coefficients) if self.poly is not None else list(self.coeffs)
        return (Polynomial, (coeffs, self.id))


def monomial(m: int) -> Polynomial:
    return Polynomial([0] * m + [1], fid=f"t{m}")


def affine(a=0, b=1) -> Polynomial:
    return Polynomial([a, b], fid=f"affine[{a},{b}]")


class ExpNeg(FunctionSpec):
    id = "exp_neg"
    max_order = UNLIMITED
    growth_mu = 0.0

    def _derivative(self, order, t):
        return (-1.0) ** order * np.exp(-np.asarray(t, dtype=float))


class InvOnePlus(FunctionSpec):
    id = "inv1p"
    max_order = UNLIMITED
    growth_mu = 0.0

    def _derivative(self, order, t):
        t = np.asarray(t, dtype=float)
        return (-1.0) ** order * math.factorial(order) / (1.0 + t) ** (order + 1)


class Sine(FunctionSpec):
    id = "sin"
    max_order = UNLIMITED
    growth_mu = 0.0

    def _derivative(self, order, t):
        t = np.asarray(t, dtype=float)
        return np.sin(t + order * math.pi / 2)


class C1Spline(FunctionSpec):
    """``max(t - 1, 0)**2``: once but not twice continuously differentiable."""

    id = "spline_c1"
    max_order = 1
    growth_mu = 2.0

    def _derivative(self, order, t):
        s = np.maximum(np.asarray(t, dtype=float) - 1.0, 0.0)
        return s * s if order == 0 else 2.0 * s


class LinearCombination(FunctionSpec):
    """``sum_i a_i f_i``."""

    def __init__(self, terms):
        self.terms = tuple((float(a), f) for a, f in terms)
        if not self.terms:
            raise DomainError("empty linear combination")
        self.id = "+".join(f"{a!r}*{f.id}" for a, f in self.terms)
        self.max_order = min(f.max_order for _, f in self.terms)
        self.growth_mu = max(f.growth_mu for _, f in self.terms)

    def _derivative(self, order, t):
        return sum(a * f._derivative(order, t) for a, f in self.terms)

    def derivative_growth(self, order):
        return max(f.derivative_growth(order) for _, f in self.terms)


def _build_registry() -> Dict[str, FunctionSpec]:
    reg = {f"t{m}": monomial(m) for m in range(9)}
    for f in (ExpNeg(), InvOnePlus(), Sine(), C1Spline(), affine(1, 2)):
        reg[f.id] = f
    reg["affine"] = reg.pop("affine[1,2]")
    reg["affine"].id = "affine"
    return reg


REGISTRY: Dict[str, FunctionSpec] = _build_registry()


def get_function(fid: str) -> FunctionSpec:
    try:
        return REGISTRY[fid]
    except KeyError:
        raise DomainError(f"unknown function id {fid!r}; known: {', '.join(sorted(REGISTRY))}") from None


def self_check(f: FunctionSpec, grid=None, step: float = 1e-6, tol: float = 1e-6, max_order: int = 4):
    """Compare ``f^(j)`` with central differences of ``f^(j-1)``.

    Returns the largest scaled discrepancy ``|fd - d| / max(1, |d|)`` over
    the grid and orders ``1..min(max_order, f.max_order)``; raises
    ``AssertionError`` if it exceeds ``tol``.
    """
    if grid is None:
        grid = np.linspace(0.05, 4.0, 37)
    grid = np.asarray(grid, dtype=float)
    worst = 0.0
    for j in range(1, min(max_order, f.max_order) + 1):
        lower = f.derivative(j - 1)
        fd = (lower(grid + step) - lower(grid - step)) / (2 * step)
        d = f.derivative(j)(grid)
        worst = max(worst, float(np.max(np.abs(fd - d) / np.maximum(1.0, np.abs(d)))))
    if worst > tol:
        raise AssertionError(f"{f.id}: derivative self-check failed, discrepancy {worst:.3g}")
    return worst


def norm_mu(f: FunctionSpec, mu: float | None = None, t_max: float = 1e4, points: int = 4001) -> float:
    """Sampled ``sup_t |f(t)| / (1+t)**mu``."""
    mu = f.growth_mu if mu is None else mu
    t = np.unique(np.concatenate([np.linspace(0.0, 10.0, points), np.geomspace(10.0, t_max, points)]))
    return float(np.max(np.abs(f.evaluate(t)) / (1.0 + t) ** mu))
