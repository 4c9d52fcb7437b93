"""Integrals against ``b_{n,k,gamma}`` on ``[0, inf)``.

The substitution ``u = gamma t / (1 + gamma t)`` turns ``b_{n,k,gamma}(t) dt``
into the Beta(k, n/gamma + 1) density on ``[0, 1]``; the remaining smooth
integrand is handled by composite Gauss-Legendre rules whose panel count
doubles until two successive estimates agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import kernels
from .errors import ConvergenceError, DivergenceError, DomainError, IntegrabilityError
from .params import ShapeParams, to_fraction

CHUNK = 2048


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-13
    abs_tol: float = 1e-15
    max_refinements: int = 8

    def __post_init__(self):
        if not self.rel_tol >= 1e-14:
            raise DomainError(f"rel_tol must be >= 1e-14, got {self.rel_tol}")
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if self.max_refinements < 1:
            raise DomainError("max_refinements must be >= 1")

    def to_json(self):
        return {"rel_tol": self.rel_tol, "abs_tol": self.abs_tol,
                "max_refinements": self.max_refinements}


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class QuadratureResult:
    values: np.ndarray
    errors: np.ndarray
    levels: np.ndarray


def _evaluator(g) -> Callable:
    return g.evaluate if hasattr(g, "evaluate") else g


def _growth(g, growth_mu):
    if growth_mu is not None:
        return float(growth_mu)
    return float(getattr(g, "growth_mu", 0.0))


def check_integrable(c: float, growth_mu: float):
    if growth_mu >= c + 1.0:
        raise IntegrabilityError(
            f"growth exponent {growth_mu} >= n/gamma + 1 = {c + 1.0}: integral diverges"
        )


def _rule_sum(ks, c, gamma, level, g):
    t, w, owner = kernels.beta_rule(ks, c, gamma, level)
    vals = np.asarray(g(t), dtype=float)
    return np.bincount(owner, weights=w * vals, minlength=len(ks))


def beta_weighted_integrals(c, gamma, ks, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
                            growth_mu: float = 0.0) -> QuadratureResult:
    """``int_0^inf b(t) g(t) dt`` for every ``k`` in ``ks`` at order ``c = n/gamma``.

    ``g`` must accept numpy arrays. Each ``k`` is refined independently;
    the reported error is the last difference between successive levels.
    """
    c = float(c)
    gamma = float(gamma)
    check_integrable(c, growth_mu)
    ks = np.asarray(ks, dtype=float)
    if ks.size and ks.min() < 1:
        raise DomainError("k must be >= 1; the k = 0 term is the point mass")
    values = np.empty(ks.size)
    errors = np.empty(ks.size)
    levels = np.empty(ks.size, dtype=int)
    for start in range(0, ks.size, CHUNK):
        sl = slice(start, start + CHUNK)
        kc = ks[sl]
        prev = _rule_sum(kc, c, gamma, 0, g)
        pending = np.arange(kc.size)
        val = np.empty(kc.size)
        err = np.empty(kc.size)
        lev = np.empty(kc.size, dtype=int)
        for level in range(1, cfg.max_refinements + 1):
            cur = _rule_sum(kc[pending], c, gamma, level, g)
            diff = np.abs(cur - prev)
            done = diff <= np.maximum(cfg.rel_tol * np.abs(cur), cfg.abs_tol)
            idx = pending[done]
            val[idx] = cur[done]
            err[idx] = diff[done]
            lev[idx] = level
            pending = pending[~done]
            prev = cur[~done]
            if not pending.size:
                break
        if pending.size:
            bad = kc[pending[0]]
            raise ConvergenceError(
                f"quadrature for k={int(bad)} (n/gamma={c}) did not converge "
                f"after {cfg.max_refinements} refinements"
            )
        values[sl], errors[sl], levels[sl] = val, err, lev
    return QuadratureResult(values, errors, levels)


def integrate_b_weighted(params: ShapeParams, k: int, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
                         growth_mu=None, full_output: bool = False):
    """``int_0^inf b_{n,k,gamma}(t) g(t) dt``.

    ``g`` is a vectorised callable or a :class:`~bds.functions.FunctionSpec`
    (whose ``growth_mu`` is then used for the integrability check).
    """
    if k < 1:
        raise DomainError("k must be >= 1; the k = 0 term is the point mass")
    res = beta_weighted_integrals(params.c, params.gamma, [k], _evaluator(g), cfg,
                                  _growth(g, growth_mu))
    if full_output:
        return float(res.values[0]), float(res.errors[0])
    return float(res.values[0])


def integrate_b_weighted_many(params: ShapeParams, ks, g, cfg: QuadratureConfig = DEFAULT_CONFIG,
                              growth_mu=None) -> QuadratureResult:
    return beta_weighted_integrals(params.c, params.gamma, ks, _evaluator(g), cfg,
                                   _growth(g, growth_mu))


def b_monomial_moment(params: ShapeParams, k: int, j: int) -> Fraction:
    """``int_0^inf b_{n,k,gamma}(t) t^j dt`` exactly.

    Equals ``Gamma(k+j) Gamma(c+1-j) / (Gamma(k) Gamma(c+1) gamma^j)`` with
    ``c = n/gamma``, i.e. the rising factorial ``k^(j)`` over the falling
    factorial ``c (c-1) ... (c-j+1)`` times ``gamma^j``.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    c = params.c
    if j >= c + 1:
        raise DivergenceError(f"moment of order {j} diverges for n/gamma = {c}")
    num = Fraction(1)
    den = Fraction(1)
    for i in range(j):
        num *= k + i
        den *= c - i
    return num / (den * params.gamma ** j)


def transformed_integrand(params: ShapeParams, k: int, g, u, growth_mu=None):
    """Beta(k, c+1) density times ``g(t(u))`` on ``[0, 1]`` with endpoint limits.

    At ``u = 1`` the value is the limit ``0`` when ``growth < n/gamma`` and
    ``inf`` otherwise; at ``u = 0`` it is ``(c+1) g(0)`` for ``k = 1`` and
    ``0`` for larger ``k``.
    """
    ev = _evaluator(g)
    mu = _growth(g, growth_mu)
    c = float(params.c)
    gamma = float(params.gamma)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty_like(u)
    interior = (u > 0) & (u < 1)
    ui = u[interior]
    v = 1.0 - ui
    a, b = float(k), c + 1.0
    logd = math.log(a + b - 1.0) + kernels.log_dbinom_raw(a - 1.0, a + b - 2.0, ui, v)
    out[interior] = np.exp(logd) * ev(ui / (gamma * v))
    out[u <= 0] = (c + 1.0) * float(ev(np.array([0.0]))[0]) if k == 1 else 0.0
    out[u >= 1] = 0.0 if mu < c else math.inf
    return out


def params_from_order(c, gamma) -> ShapeParams:
    """Shape parameters with ``n = c * gamma`` (Stancu shifts zero)."""
    gamma = to_fraction(gamma)
    return ShapeParams(to_fraction(c) * gamma, gamma)
