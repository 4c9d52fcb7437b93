"""Numerical checks of the convergence results for the operator.

Covers moduli of continuity, the Voronovskaja-type limit for derivatives,
pointwise convergence of derivatives, the ``omega_2`` error estimate, and
log-log fits of moment orders. Work over an ``n`` grid can be spread over
a process pool; results are always assembled in grid order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .errors import DomainError, InstabilityError, OrderError, ParameterError
from .functions import FunctionSpec, Polynomial, norm_mu
from .moments import baskakov_U_moments, central_moments, exact_operator_poly
from .operator import apply_derivative, apply_derivative_grid
from .params import ShapeParams, to_fraction
from .polys import RationalPoly
from .quadrature import DEFAULT_CONFIG, QuadratureConfig

DEFAULT_N_GRID = tuple(2 ** e for e in range(6, 15))


def resolve_jobs(jobs: int | None = None) -> int:
    """Worker count: ``BDS_JOBS`` if set, else ``jobs``, else the CPU count."""
    env = os.environ.get("BDS_JOBS")
    if env:
        try:
            jobs = int(env)
        except ValueError:
            raise ParameterError(f"BDS_JOBS must be an integer, got {env!r}") from None
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ParameterError("jobs must be >= 1")
    return jobs


def parallel_map(func: Callable, items: Sequence, jobs: int = 1) -> list:
    """``[func(i) for i in items]``, optionally on a process pool."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(i) for i in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(func, items))


def _check_grid(n_grid) -> List[Fraction]:
    ns = [to_fraction(n) for n in n_grid]
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ParameterError("n grid must be nonempty and strictly increasing")
    return ns


def loglog_slope(ns, values) -> float | None:
    """Least-squares slope of ``log|values|`` against ``log ns``; zeros are skipped."""
    pts = [(math.log(float(n)), math.log(abs(float(v)))) for n, v in zip(ns, values)
           if v != 0 and abs(float(v)) > 1e-300 and math.isfinite(float(v))]
    if len(pts) < 2:
        return None
    xs, ys = np.array(pts).T
    return float(np.polyfit(xs, ys, 1)[0])


# ---------------------------------------------------------------------------
# moduli of continuity


@dataclass(frozen=True)
class ModulusQuery:
    """``omega_order(f, delta, [a, b])``; ``f`` is a FunctionSpec or a vectorised callable."""

    f: object
    order: int
    delta: float
    interval: Tuple[float, float]

    def __post_init__(self):
        a, b = self.interval
        if self.order not in (1, 2):
            raise DomainError(f"order must be 1 or 2, got {self.order}")
        if not 0 < a < b:
            raise DomainError(f"need 0 < a < b, got [{a}, {b}]")
        if not self.delta >= 0:
            raise DomainError("delta must be nonnegative")
        if self.delta > (b - a) / self.order:
            raise DomainError(
                f"delta={self.delta} > (b-a)/order: no step keeps x, x+{self.order}h inside [{a}, {b}]")


def _forward_difference(f, x, h, m):
    return sum((-1) ** (m - i) * math.comb(m, i) * f(x + i * h) for i in range(m + 1))


def modulus_of_continuity(q: ModulusQuery, grid_points: int = 64, rtol: float = 1e-4,
                          max_points: int = 4096) -> float:
    """``sup |Delta_h^m f(x)|`` over ``0 < |h| <= delta`` with ``x, x + m h`` in ``[a, b]``.

    Negative steps are covered by symmetry. Nested ``(h, x)`` grids are
    doubled until the estimate changes by less than ``rtol`` (relative).
    """
    if grid_points < 64:
        raise DomainError("grid_points must be >= 64")
    if q.delta == 0:
        return 0.0
    f = q.f.evaluate if hasattr(q.f, "evaluate") else q.f
    a, b = q.interval
    m = q.order
    prev = None
    points = grid_points
    while True:
        s = np.linspace(0.0, 1.0, points + 1)
        h = q.delta * s[1:, None]
        x = a + (b - a - m * h) * s[None, :]
        est = float(np.max(np.abs(_forward_difference(f, x, h, m))))
        if prev is not None and abs(est - prev) <= rtol * max(abs(est), 1e-300):
            return est
        if prev is not None and est == prev == 0.0:
            return est
        if points >= max_points:
            return est
        prev = est
        points *= 2


def omega2(f, delta: float, interval) -> float:
    return modulus_of_continuity(ModulusQuery(f, 2, delta, tuple(interval)))


# ---------------------------------------------------------------------------
# Voronovskaja-type limits


def voronovskaja_coefficients(params: ShapeParams, r: int, x: float, form: str = "stated"):
    """Coefficients of ``f^(r)``, ``f^(r+1)``, ``f^(r+2)`` in the limit of
    ``n (D^r B(f, x) - f^(r)(x))``.

    ``form="stated"`` uses ``r gamma (1 + 2x)`` in the middle coefficient,
    as published; ``form="derived"`` uses ``r (1 + 2 gamma x)``, which is what
    differentiating ``(alpha - beta x) f' + x (1 + gamma x) f''`` ``r`` times
    gives. The two agree when ``gamma = 1`` or ``r = 0``.
    """
    _, g, a, b = params.as_floats()
    c0 = r * (g * (r - 1) - b)
    if form == "stated":
        c1 = r * g * (1 + 2 * x) + a - b * x
    elif form == "derived":
        c1 = r * (1 + 2 * g * x) + a - b * x
    else:
        raise ParameterError(f"unknown form {form!r}")
    return c0, c1, x * (1 + g * x)


def _limit(params, f, r, x, form):
    if r < 0:
        raise OrderError("r must be nonnegative")
    if r + 2 > f.max_order:
        raise OrderError(f"{f.id}: need derivatives up to order {r + 2}, max_order is {f.max_order}")
    c = voronovskaja_coefficients(params, r, x, form)
    return sum(ci * float(f.derivative(r + i)(x)) for i, ci in enumerate(c))


def voronovskaja_rhs(params: ShapeParams, f: FunctionSpec, r: int, x: float) -> float:
    """``r(gamma(r-1) - beta) f^(r) + {r gamma (1+2x) + alpha - beta x} f^(r+1)
    + x(1 + gamma x) f^(r+2)`` at ``x``, as published."""
    return _limit(params, f, r, x, "stated")


def voronovskaja_limit(params: ShapeParams, f: FunctionSpec, r: int, x: float) -> float:
    """The ``r``-th derivative of ``(alpha - beta x) f' + x(1 + gamma x) f''`` at ``x``."""
    return _limit(params, f, r, x, "derived")


def voronovskaja_exact_sequence(params: ShapeParams, poly: RationalPoly, r: int, x, n_grid) -> List[Fraction]:
    """Exact ``n (D^r B(f, x) - f^(r)(x))`` for polynomial ``f`` and rational ``x``."""
    x = to_fraction(x)
    target = poly.derivative(r)(x)
    return [n * (exact_operator_poly(params.with_n(n), poly).derivative(r)(x) - target)
            for n in _check_grid(n_grid)]


def richardson(ns, values, cauchy_rtol: float = 1e-2):
    """Extrapolate ``values[i] ~ L + C1/n + C2/n^2`` to ``n -> inf``.

    Returns ``(limit, steps)``. One-step (linear in ``1/n``) extrapolation
    from the last two points is used unless the one-step estimates still
    drift in one direction, in which case the quadratic through the last
    three points is used. Raises :class:`InstabilityError` when the last two
    estimates of the chosen scheme disagree by more than ``cauchy_rtol``.
    """
    h = [1.0 / float(n) for n in ns]
    v = [float(s) for s in values]
    if len(v) < 3:
        raise ParameterError("Richardson extrapolation needs at least three points")

    def lin(i):
        return (h[i - 1] * v[i] - h[i] * v[i - 1]) / (h[i - 1] - h[i])

    def quad(i):
        idx = (i - 2, i - 1, i)
        return sum(v[j] * math.prod(h[k] / (h[k] - h[j]) for k in idx if k != j) for j in idx)

    e1 = [lin(i) for i in range(1, len(v))]
    d1 = np.diff(e1)
    scale = max(1.0, abs(e1[-1]))
    trending = len(d1) >= 2 and d1[-1] * d1[-2] > 0 and abs(d1[-1]) > 1e-9 * scale
    if trending and len(v) >= 4:
        est = [quad(i) for i in range(2, len(v))]
        steps = 2
    else:
        est = e1
        steps = 1
    if abs(est[-1] - est[-2]) > cauchy_rtol * max(1.0, abs(est[-1])):
        raise InstabilityError(
            f"extrapolated sequence not Cauchy: last estimates {est[-2]:.6g}, {est[-1]:.6g}")
    return est[-1], steps


@dataclass(frozen=True)
class ConvergenceReport:
    """Sequence observed over an ``n`` grid and its extrapolated limit."""

    param_grid: Tuple[float, ...]
    observed: Tuple[float, ...]
    fitted_rate: float | None
    extrapolated_limit: float
    target: float
    rel_deviation: float
    passed: bool = True
    extra: Dict = field(default_factory=dict)

    @property
    def abs_deviation(self) -> float:
        return abs(self.extrapolated_limit - self.target)

    def to_json(self) -> dict:
        return {
            "param_grid": list(self.param_grid),
            "observed": list(self.observed),
            "fitted_rate": self.fitted_rate,
            "extrapolated_limit": self.extrapolated_limit,
            "target": self.target,
            "rel_deviation": self.rel_deviation,
            "abs_deviation": self.abs_deviation,
            "passed": self.passed,
            "extra": self.extra,
        }


def _rel_dev(value, target):
    return abs(value - target) / max(abs(target), 1e-12)


def _derivative_task(args):
    params, f, r, xs, cfg = args
    return [res.value for res in apply_derivative_grid(params, f, r, xs, cfg)]


def _derivative_values(params, f, r, x, ns, cfg, jobs):
    tasks = [(params.with_n(n), f, r, [x], cfg) for n in ns]
    return [vals[0] for vals in parallel_map(_derivative_task, tasks, jobs)]


def voronovskaja_check(params: ShapeParams, f: FunctionSpec, r: int, x: float,
                       cfg: QuadratureConfig = DEFAULT_CONFIG, n_grid=DEFAULT_N_GRID,
                       jobs: int = 1, form: str = "stated", rtol: float = 1e-2) -> ConvergenceReport:
    """``n (D^r B(f, x) - f^(r)(x))`` over ``n_grid``, extrapolated and compared
    with :func:`voronovskaja_rhs` (or :func:`voronovskaja_limit` for ``form="derived"``).

    ``passed`` means relative deviation ``<= rtol`` (absolute when the
    target is zero).
    """
    ns = _check_grid(n_grid)
    target = _limit(params, f, r, x, form)
    fr = float(f.derivative(r)(x))
    values = _derivative_values(params, f, r, x, ns, cfg, jobs)
    seq = [float(n) * (v - fr) for n, v in zip(ns, values)]
    limit, steps = richardson(ns, seq)
    dev = _rel_dev(limit, target)
    passed = (abs(limit - target) <= rtol) if target == 0 else dev <= rtol
    return ConvergenceReport(
        tuple(float(n) for n in ns), tuple(seq), loglog_slope(ns, [s - limit for s in seq]),
        limit, target, dev, passed,
        {"richardson_steps": steps, "form": form, "derivative_values": values, "f_r": fr},
    )


def pointwise_convergence_check(params: ShapeParams, f: FunctionSpec, r: int, x: float,
                                cfg: QuadratureConfig = DEFAULT_CONFIG, n_grid=DEFAULT_N_GRID,
                                jobs: int = 1, noise: float = 1e-11) -> ConvergenceReport:
    """Errors ``e_n = |D^r B(f, x) - f^(r)(x)|`` over ``n_grid``.

    Passes when the errors above the noise floor ``noise (1 + |f^(r)(x)|)``
    decrease over the last three grid points and the final error is below
    ``1e-2 (1 + |f^(r)(x)|)``.
    """
    ns = _check_grid(n_grid)
    fr = float(f.derivative(r)(x))
    values = _derivative_values(params, f, r, x, ns, cfg, jobs)
    errors = [abs(v - fr) for v in values]
    floor = noise * (1 + abs(fr))
    tail = [max(e, floor) for e in errors[-3:]]
    decreasing = all(b <= a for a, b in zip(tail, tail[1:]))
    passed = decreasing and errors[-1] < 1e-2 * (1 + abs(fr))
    rate = loglog_slope(ns, [e if e > floor else 0.0 for e in errors])
    return ConvergenceReport(tuple(float(n) for n in ns), tuple(errors), rate, values[-1], fr,
                             _rel_dev(values[-1], fr), passed, {"values": values})


# ---------------------------------------------------------------------------
# omega_2 error estimate


@dataclass(frozen=True)
class ErrorBoundRow:
    n: float
    lhs: float
    rhs: float
    ratio: float
    rhs_outer: float
    ratio_outer: float


def _error_bound_task(args):
    params, f, r, grid, cfg = args
    vals = np.array([res.value for res in apply_derivative_grid(params, f, r, grid, cfg)])
    return float(np.max(np.abs(vals - f.derivative(r)(grid))))


def error_bound_ratio(params: ShapeParams, f: FunctionSpec, r: int, intervals, n_grid=tuple(2 ** e for e in range(6, 13)),
                      cfg: QuadratureConfig = DEFAULT_CONFIG, jobs: int = 1, grid_points: int = 64):
    """Rows ``(n, lhs, rhs, ratio)`` for the ``omega_2`` estimate with constants dropped.

    ``lhs`` is the sup of ``|D^r B(f) - f^(r)|`` over ``grid_points`` points of
    ``[a1, b1]``; ``rhs = omega_2(f^(r), n^-1/2, [a1, b1]) + ||f||_mu / n``.
    The same with ``omega_2`` over ``[a, b]`` is reported as ``rhs_outer``.
    """
    a, b, a1, b1 = (float(v) for v in intervals)
    if not 0 < a < a1 < b1 < b:
        raise DomainError(f"need 0 < a < a1 < b1 < b, got {intervals}")
    if r > f.max_order:
        raise OrderError(f"{f.id}: order {r} exceeds max_order {f.max_order}")
    ns = _check_grid(n_grid)
    grid = np.linspace(a1, b1, grid_points)
    lhs = parallel_map(_error_bound_task, [(params.with_n(n), f, r, grid, cfg) for n in ns], jobs)
    fr = f.derivative(r)
    norm = norm_mu(f)
    rows = []
    for n, l in zip(ns, lhs):
        delta = float(n) ** -0.5
        tail = norm / float(n)
        rhs = omega2(fr, delta, (a1, b1)) + tail
        rhs_outer = omega2(fr, delta, (a, b)) + tail
        rows.append(ErrorBoundRow(float(n), l, rhs, l / rhs, rhs_outer, l / rhs_outer))
    return rows


def ratio_bounded(rows, factor: float = 2.0, outer: bool = False) -> bool:
    """Last ratio at most ``factor`` times the median ratio."""
    ratios = [r.ratio_outer if outer else r.ratio for r in rows]
    return ratios[-1] <= factor * float(np.median(ratios))


# ---------------------------------------------------------------------------
# moment orders


@dataclass(frozen=True)
class OrderFit:
    m: int
    slope: float | None
    expected: int
    n_used: Tuple[float, ...]
    dropped: Tuple[float, ...]


def moment_order_fit(params: ShapeParams, x, n_grid=tuple(2 ** e for e in range(6, 15)),
                     orders=(1, 2, 3, 4), kind: str = "central") -> Dict[int, OrderFit]:
    """Slopes of ``log|mu_{n,m,gamma}(x)|`` (or ``U``) against ``log n``.

    Points where the moment vanishes or underflows are dropped and reported.
    """
    ns = _check_grid(n_grid)
    x = to_fraction(x)
    top = max(orders)
    values = {m: [] for m in orders}
    for n in ns:
        p = params.with_n(n)
        if n <= p.gamma * top:
            raise ParameterError(f"need n > gamma*m for every grid point, got n={n}, m={top}")
        if kind == "central":
            seq = central_moments(p, top).central
        elif kind == "U":
            seq = baskakov_U_moments(n, p.gamma, top)
        else:
            raise ParameterError(f"unknown kind {kind!r}")
        for m in orders:
            values[m].append(seq[m](x))
    out = {}
    for m in orders:
        keep = [(n, v) for n, v in zip(ns, values[m]) if v != 0 and abs(float(v)) > 1e-300]
        dropped = tuple(float(n) for n, v in zip(ns, values[m]) if not (v != 0 and abs(float(v)) > 1e-300))
        slope = loglog_slope([n for n, _ in keep], [v for _, v in keep])
        out[m] = OrderFit(m, slope, -((m + 1) // 2), tuple(float(n) for n, _ in keep), dropped)
    return out
