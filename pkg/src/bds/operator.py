"""Evaluation of ``B_{n,gamma}^{alpha,beta}(f, x)`` and its derivatives in ``x``.

``B(f, x) = sum_{k>=1} p_{n,k,gamma}(x) int b_{n,k,gamma}(t) f(s(t)) dt
+ p_{n,0,gamma}(x) f(s(0))`` with the Stancu map ``s(t) = (nt+alpha)/(n+beta)``.
The integrals do not depend on ``x``, so grid evaluations share them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from . import kernels
from .basis import series_window
from .errors import OrderError, ParameterError
from .functions import FunctionSpec
from .params import ShapeParams
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, beta_weighted_integrals


@dataclass(frozen=True)
class OperatorResult:
    """``value`` of the operator at one point.

    ``truncation_k`` is the last series index used. ``tail_bound`` is the
    truncation bound of the weighted basis sum times the largest scaled
    integral in the window, plus the accumulated quadrature error estimates. ``atom_weight`` is
    ``p_{n,0,gamma}(x)`` (for derivatives, that of the shifted basis).
    """

    value: float
    truncation_k: int
    tail_bound: float
    atom_weight: float


def stancu_map(params: ShapeParams, t):
    """``(n t + alpha) / (n + beta)``; exact for rational ``t``."""
    if isinstance(t, (int, Fraction)):
        return (params.n * t + params.alpha) / (params.n + params.beta)
    n, _, a, b = params.as_floats()
    return (n * np.asarray(t, dtype=float) + a) / (n + b) if np.ndim(t) else (n * float(t) + a) / (n + b)


def derivative_prefactor(params: ShapeParams, r: int) -> Fraction:
    """``n^r Gamma(c+r) Gamma(c-r+1) / ((n+beta)^r Gamma(c+1) Gamma(c))``, ``c = n/gamma``.

    Written as ``(n/(n+beta))^r`` times a rising over a falling factorial
    of ``c``, which is exact for rational parameters.
    """
    c = params.c
    if r >= c + 1:
        raise ParameterError(f"prefactor needs n/gamma > r - 1, got n/gamma={c}, r={r}")
    out = (params.n / (params.n + params.beta)) ** r
    for i in range(r):
        out *= (c + i) / (c - i)
    return out


def _integrals(order, gamma, ks, g, growth, cfg):
    if ks.size == 0:
        return np.empty(0), np.empty(0)
    res = beta_weighted_integrals(order, gamma, ks, g, cfg, growth)
    return res.values, res.errors


def _series_grid(params: ShapeParams, xs: Sequence[float], include_zero: bool, growth: float):
    """Windows for every ``x`` plus the union index range."""
    windows = [series_window(params, float(x), growth=growth) for x in xs]
    live = [w for w in windows if w.kmax >= w.kmin]
    lo = min((w.kmin for w in live), default=1)
    hi = max((w.kmax for w in live), default=0)
    if include_zero and (lo == 1 or len(live) < len(windows)):
        lo = 0
    return windows, lo, hi


def _scale(iv, w, kmin=None):
    """``max_k |I_k| / (k+1)^growth`` over the window."""
    kmin = w.kmin if kmin is None else kmin
    ks = np.arange(kmin, kmin + iv.size, dtype=float)
    return float(np.max(np.abs(iv) / (ks + 1.0) ** w.growth))


def _check_x(xs):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if np.any(xs < 0) or not np.all(np.isfinite(xs)):
        raise ParameterError("x must be finite and nonnegative")
    return xs


def apply_grid(params: ShapeParams, f: FunctionSpec, xs, cfg: QuadratureConfig = DEFAULT_CONFIG) -> List[OperatorResult]:
    """:func:`apply` at every point of ``xs`` with shared integrals."""
    xs = _check_x(xs)
    windows, lo, hi = _series_grid(params, xs, False, f.growth_mu)
    ks = np.arange(lo, hi + 1, dtype=float)
    g = lambda t: f.evaluate(stancu_map(params, t))
    vals, errs = _integrals(params.c, params.gamma, ks, g, f.growth_mu, cfg)
    atom_value = float(f.evaluate(stancu_map(params, 0.0)))
    out = []
    for x, w in zip(xs, windows):
        atom = math.exp(w.atom_log_weight)
        if w.kmax < w.kmin:
            out.append(OperatorResult(atom * atom_value, 0, 0.0, atom))
            continue
        sl = slice(w.kmin - lo, w.kmax - lo + 1)
        weights = w.weights
        iv = vals[sl]
        value = float(np.dot(weights, iv)) + atom * atom_value
        tail = w.tail_bound * _scale(iv, w) + float(np.dot(weights, errs[sl]))
        out.append(OperatorResult(value, w.kmax, tail, atom))
    return out


def apply(params: ShapeParams, f: FunctionSpec, x: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> OperatorResult:
    """``B_{n,gamma}^{alpha,beta}(f, x)``.

    The ``k = 0`` point mass is added analytically. At ``x = 0`` the series
    is empty and the value is ``f(alpha/(n+beta))``.
    """
    return apply_grid(params, f, [x], cfg)[0]


def _check_derivative(params: ShapeParams, f: FunctionSpec, r: int):
    if r < 0:
        raise OrderError(f"derivative order must be nonnegative, got {r}")
    if r > f.max_order:
        raise OrderError(f"{f.id}: order {r} exceeds max_order {f.max_order}")
    if params.n <= params.gamma * r:
        raise ParameterError(f"n <= gamma*r: need n > {params.gamma * r}, got n={params.n}")
    if params.n <= f.growth_mu + params.gamma * r:
        raise ParameterError(
            f"n <= mu + gamma*r: need n > {f.growth_mu + float(params.gamma * r)}, got n={params.n}"
        )


def apply_derivative_grid(params: ShapeParams, f: FunctionSpec, r: int, xs,
                          cfg: QuadratureConfig = DEFAULT_CONFIG) -> List[OperatorResult]:
    """``D^r B(f, x)`` at every point of ``xs``.

    Uses the closed form: ``derivative_prefactor * sum_{k>=0}
    p_{n+gamma r,k,gamma}(x) int b_{n-gamma r,k+r,gamma}(t) f^(r)(s(t)) dt``.
    """
    _check_derivative(params, f, r)
    if r == 0:
        return apply_grid(params, f, xs, cfg)
    xs = _check_x(xs)
    shifted = params.shifted(params.gamma * r)
    growth = f.derivative_growth(r)
    windows, lo, hi = _series_grid(shifted, xs, True, growth)
    ks = np.arange(lo, hi + 1, dtype=float)
    fr = f.derivative(r)
    g = lambda t: fr(stancu_map(params, t))
    vals, errs = _integrals(params.c - r, params.gamma, ks + r, g, growth, cfg)
    pref = float(derivative_prefactor(params, r))
    out = []
    for x, w in zip(xs, windows):
        atom = math.exp(w.atom_log_weight)
        if w.kmax < w.kmin:
            # x = 0: only k = 0 survives
            value = pref * float(vals[0])
            out.append(OperatorResult(value, 0, 0.0, atom))
            continue
        kmin = 0 if w.kmin == 1 else w.kmin
        sl = slice(kmin - lo, w.kmax - lo + 1)
        logp = w.log_p if kmin else np.concatenate([[w.atom_log_weight], w.log_p])
        weights = np.exp(logp)
        iv = vals[sl]
        value = pref * float(np.dot(weights, iv))
        scale = _scale(iv, w, kmin)
        tail = w.tail_bound * scale + (atom * scale if kmin else 0.0)
        tail = pref * (tail + float(np.dot(weights, errs[sl])))
        out.append(OperatorResult(value, w.kmax, tail, atom))
    return out


def apply_derivative(params: ShapeParams, f: FunctionSpec, r: int, x: float,
                     cfg: QuadratureConfig = DEFAULT_CONFIG) -> OperatorResult:
    """``D^r B_{n,gamma}^{alpha,beta}(f, x)`` for ``n > mu + gamma r``."""
    return apply_derivative_grid(params, f, r, [x], cfg)[0]
