"""Basis functions ``p_{n,k,gamma}`` and ``b_{n,k,gamma}``.

Floating evaluation goes through log space; the exact path (derivative
polynomials and the rational derivative oracle) works over
:class:`fractions.Fraction` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple

import numpy as np

from . import kernels
from .errors import DomainError, StructureError
from .params import LogValue, ShapeParams, to_fraction
from .polys import RationalFunction, RationalPoly, TrivariatePoly

TAIL_RTOL = 1e-14
# Terms below exp(-LOWER_LOG_CUTOFF) times the largest one are skipped on the
# low side of the mode; their mass is reported in the tail bound.
LOWER_LOG_CUTOFF = 46.0
MAX_TERMS = 50_000_000


def eval_p(params: ShapeParams, k: int, x: float) -> LogValue:
    """``p_{n,k,gamma}(x)`` in log space."""
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    if x == 0:
        return LogValue(0.0, 1) if k == 0 else LogValue.zero()
    c = float(params.c)
    gx = float(params.gamma) * float(x)
    return LogValue(float(kernels.log_nb_terms(c, gx, k, k)[0]), 1)


def eval_b(params: ShapeParams, k: int, t: float) -> LogValue:
    """``b_{n,k,gamma}(t)`` in log space, for ``k >= 1``.

    With ``u = gamma t/(1 + gamma t)`` this is ``gamma (1-u)**2`` times the
    Beta(k, n/gamma + 1) density at ``u``.
    """
    if k < 1:
        raise DomainError("b_{n,k,gamma} is defined for k >= 1; k = 0 is the point mass")
    if t < 0:
        raise DomainError(f"t must be nonnegative, got {t}")
    c = float(params.c)
    g = float(params.gamma)
    gt = g * float(t)
    if gt == 0:
        if k == 1:
            return LogValue(math.log(g * (c + 1.0)), 1)
        return LogValue.zero()
    if math.isinf(gt):
        return LogValue.zero()
    u = gt / (1.0 + gt)
    v = 1.0 / (1.0 + gt)
    a, b = float(k), c + 1.0
    logdens = math.log(a + b - 1.0) + float(kernels.log_dbinom_raw(a - 1.0, a + b - 2.0, u, v))
    return LogValue(math.log(g) + 2.0 * math.log(v) + logdens, 1)


def p_ratio(params: ShapeParams, k: int, x: float) -> float:
    """``p_{n,k+1,gamma}(x) / p_{n,k,gamma}(x)``."""
    if x <= 0:
        raise DomainError(f"p_ratio needs x > 0, got {x}")
    c = float(params.c)
    gx = float(params.gamma) * x
    return (c + k) / (k + 1.0) * gx / (1.0 + gx)


def p_ratio_sup(params: ShapeParams, k: int, x: float) -> float:
    """``sup_{j >= k} p_ratio(j)``; the ratio is monotone in ``j`` with limit ``gamma x/(1+gamma x)``."""
    gx = float(params.gamma) * x
    return max(p_ratio(params, k, x), gx / (1.0 + gx))


@dataclass(frozen=True)
class SeriesWindow:
    """Index range and log-weights of the truncated discrete basis at one ``x``.

    ``tail_bound`` bounds the neglected part of ``sum_k p_k (k+1)^growth``
    (plain basis mass when ``growth = 0``).
    """

    kmin: int
    kmax: int
    log_p: np.ndarray
    tail_bound: float
    atom_log_weight: float
    growth: float = 0.0

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_p)


def series_window(params: ShapeParams, x: float, tol: float = TAIL_RTOL, growth: float = 0.0) -> SeriesWindow:
    """Truncate ``sum_k p_{n,k,gamma}(x) a_k`` to ``k in [kmin, kmax]`` (``k >= 1``).

    The summands are assumed to grow at most like ``a_k ~ (k+1)^growth``.
    With ``s_k = p_k (k+1)^growth``, the upper cut is the first ``K`` past
    the mode with ``s_K rho/(1 - rho) < tol * sum_{k<=K} s_k``. Here ``rho``
    bounds ``s_{j+1}/s_j`` for ``j >= K``: :func:`p_ratio` decreases to
    ``gamma x/(1+gamma x)`` and ``((j+2)/(j+1))^growth`` decreases to 1, so
    the geometric tail bound is rigorous. Terms far below the peak on the
    low side are dropped too, and their weighted mass is added to
    ``tail_bound``. The ``k = 0`` point mass is returned separately.
    """
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    c = float(params.c)
    if x == 0:
        return SeriesWindow(1, 0, np.empty(0), 0.0, 0.0, growth)
    gx = float(params.gamma) * x
    q = gx / (1.0 + gx)
    mean = c * gx
    sd = math.sqrt(c * gx * (1.0 + gx))
    mode = max(0, math.floor((c - 1.0) * gx)) if c > 1 else 0
    guess = int(mean + 12.0 * sd + 32 + 4 * growth)
    while True:
        logp = kernels.log_nb_terms(c, gx, 0, guess)
        logs = logp + growth * np.log1p(np.arange(guess + 1.0))
        peak = float(logs.max())
        top = int(np.argmax(logs))
        start = max(mode, top)
        csum = np.cumsum(np.exp(logs - peak))
        ks = np.arange(start, guess + 1)
        rho = np.maximum((c + ks) / (ks + 1.0) * q, q) * ((ks + 2.0) / (ks + 1.0)) ** growth
        with np.errstate(divide="ignore", over="ignore"):
            bound = np.where(rho < 1.0, np.exp(logs[start:] - peak) * rho / (1.0 - rho), np.inf)
        ok = np.nonzero(bound < tol * csum[start:])[0]
        if ok.size:
            kmax = int(start + ok[0])
            upper = float(bound[ok[0]]) * math.exp(peak)
            break
        if guess > MAX_TERMS:
            raise DomainError(f"series truncation exceeded {MAX_TERMS} terms at x={x}")
        guess *= 2
    lo = np.nonzero(logs[: top + 1] >= peak - LOWER_LOG_CUTOFF)[0]
    kmin = max(1, int(lo[0]) if lo.size else 1)
    lower = (kmin - 1) * math.exp(float(logs[kmin - 1])) if kmin > 1 else 0.0
    return SeriesWindow(kmin, kmax, logp[kmin: kmax + 1], upper + lower, float(logp[0]), growth)


# ---------------------------------------------------------------------------
# exact path


def s_polynomials(r: int, gamma) -> TrivariatePoly:
    """``S_r`` with ``{x(1+gamma x)}^r D^r p_{n,k,gamma} = S_r p_{n,k,gamma}``.

    Returned in the variables ``(x, k, n)``. Differentiating the defining
    identity once gives

        S_{r+1} = x(1+gamma x) dS_r/dx + (k - n x) S_r - r (1 + 2 gamma x) S_r,

    with ``S_0 = 1``.
    """
    if r < 0:
        raise DomainError("r must be nonnegative")
    g = to_fraction(gamma)
    P = TrivariatePoly({(1, 0, 0): 1, (2, 0, 0): g})
    w = TrivariatePoly({(0, 1, 0): 1, (1, 0, 1): -1})
    s = TrivariatePoly.monomial()
    for j in range(r):
        dP = TrivariatePoly({(0, 0, 0): 1, (1, 0, 0): 2 * g})
        s = P * s.diff_x() + w * s - dP * s * j
    return s


def q_decomposition(s: TrivariatePoly, r: int) -> Dict[Tuple[int, int], RationalPoly]:
    """Split ``S_r`` as ``sum n^i (k - n x)^j Q_{i,j}(x)``.

    ``s`` is in ``(x, k, n)``; ``k`` is rewritten as ``w + n x`` and the
    result is grouped by powers of ``n`` and ``w``. Raises
    :class:`~bds.errors.StructureError` if any term has ``2i + j > r``.
    """
    shifted = s.substitute_y_shift()
    table: Dict[Tuple[int, int], list] = {}
    for (ix, j, i), v in shifted.terms.items():
        if 2 * i + j > r:
            raise StructureError(
                f"term n^{i} w^{j} x^{ix} violates 2i + j <= {r}; the S recursion is wrong"
            )
        coeffs = table.setdefault((i, j), [])
        if len(coeffs) <= ix:
            coeffs.extend([Fraction(0)] * (ix + 1 - len(coeffs)))
        coeffs[ix] += v
    out = {key: RationalPoly(c) for key, c in table.items()}
    return {key: q for key, q in sorted(out.items()) if q.coefficients}


def q_table(r: int, gamma) -> Dict[Tuple[int, int], RationalPoly]:
    return q_decomposition(s_polynomials(r, gamma), r)


def _iroot(value: int, degree: int):
    """Exact integer ``degree``-th root of ``value`` or ``None``."""
    if value < 0:
        return None
    if value < 2:
        return value
    guess = int(round(value ** (1.0 / degree)))
    for cand in (guess - 1, guess, guess + 1):
        if cand >= 0 and cand ** degree == value:
            return cand
    lo, hi = 0, 1 << (value.bit_length() // degree + 1)
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** degree < value:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** degree == value else None


def rational_power(base: Fraction, exponent: Fraction):
    """``base ** exponent`` as a Fraction when it is rational, else ``None``."""
    base, exponent = Fraction(base), Fraction(exponent)
    if exponent.denominator == 1:
        return base ** exponent.numerator
    d = exponent.denominator
    num = _iroot(base.numerator, d)
    den = _iroot(base.denominator, d)
    if num is None or den is None:
        return None
    return Fraction(num, den) ** exponent.numerator


def p_exact(params: ShapeParams, k: int, x) -> Fraction:
    """``p_{n,k,gamma}(x)`` exactly, when ``(1+gamma x)^(-n/gamma)`` is rational."""
    x = to_fraction(x)
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    c = params.c
    gx = params.gamma * x
    rising = Fraction(1)
    for i in range(k):
        rising *= c + i
    head = rising / math.factorial(k) * gx ** k / (1 + gx) ** k
    tail = rational_power(1 + gx, -c)
    if tail is None:
        raise DomainError(
            f"(1 + gamma x)^(-n/gamma) = ({1 + gx})^({-c}) is irrational; use dr_p_ratio_exact"
        )
    return head * tail


def dr_p_ratio_exact(params: ShapeParams, k: int, r: int, x) -> Fraction:
    """``D^r p_{n,k,gamma}(x) / p_{n,k,gamma}(x)`` exactly.

    Built from the logarithmic derivative of the closed form,
    ``k/x - (n/gamma + k) gamma/(1 + gamma x)``, by the quotient rule; no
    structure of the ``S_r`` polynomials is used.
    """
    x = to_fraction(x)
    if x <= 0:
        raise DomainError("x must be positive")
    c, g = params.c, params.gamma
    logd = (
        RationalFunction(RationalPoly([k]), RationalPoly([0, 1]))
        + RationalFunction(RationalPoly([-(c + k) * g]), RationalPoly([1, g]))
    )
    ratio = RationalFunction(RationalPoly([1]))
    for _ in range(r):
        ratio = ratio.derivative() + ratio * logd
    return ratio(x)


def dr_p_exact(params: ShapeParams, k: int, r: int, x) -> Fraction:
    """``D^r p_{n,k,gamma}(x)`` as an exact rational."""
    return dr_p_ratio_exact(params, k, r, x) * p_exact(params, k, x)


def q_identity_sides(params: ShapeParams, k: int, r: int, x) -> Tuple[Fraction, Fraction]:
    """Both sides of ``{x(1+gamma x)}^r D^r p = sum n^i (k-nx)^j Q_{i,j,r,gamma}(x) p``.

    The left side comes from :func:`dr_p_exact`, the right from
    :func:`q_table`. When ``p`` itself is irrational the common factor ``p``
    is divided out of both sides.
    """
    x = to_fraction(x)
    n, g = params.n, params.gamma
    try:
        p = p_exact(params, k, x)
    except DomainError:
        p = Fraction(1)
    lhs = (x * (1 + g * x)) ** r * dr_p_ratio_exact(params, k, r, x) * p
    rhs = sum((n ** i * (k - n * x) ** j * q(x) for (i, j), q in q_table(r, g).items()), Fraction(0)) * p
    return lhs, rhs
