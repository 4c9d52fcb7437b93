"""Exact moments of the operator as polynomials in ``x``.

Two independent routes are provided. :func:`central_moments` runs the
three-term recurrence for ``mu_{n,m,gamma}(x) = B((t-x)^m, x)``.
:func:`raw_moments` computes ``B(t^m, x)`` from closed forms: Beta-integral
moments of ``b_{n,k,gamma}`` and the factorial moments of the negative
binomial weights ``p_{n,k,gamma}``. :func:`central_from_raw` connects the two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

from .errors import DivergenceError, MomentValidityError, ParameterError
from .params import ShapeParams, to_fraction
from .polys import RationalPoly

X = RationalPoly.x()
ONE = RationalPoly.constant(1)


@lru_cache(maxsize=None)
def stirling2(i: int, l: int) -> int:
    """Stirling numbers of the second kind ``S(i, l)``."""
    if i == l:
        return 1
    if l == 0 or l > i:
        return 0
    return l * stirling2(i - 1, l) + stirling2(i - 1, l - 1)


@lru_cache(maxsize=None)
def rising_in_falling(j: int) -> Tuple[int, ...]:
    """Coefficients ``e_l`` with ``k (k+1) ... (k+j-1) = sum_l e_l k(k-1)...(k-l+1)``."""
    power = [1]  # coefficients of k^(rising j) in powers of k
    for i in range(j):
        nxt = [0] * (len(power) + 1)
        for p, c in enumerate(power):
            nxt[p + 1] += c
            nxt[p] += i * c
        power = nxt
    return tuple(sum(power[p] * stirling2(p, l) for p in range(l, len(power))) for l in range(j + 1))


def _rising(c: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= c + i
    return out


def _falling(c: Fraction, j: int) -> Fraction:
    out = Fraction(1)
    for i in range(j):
        out *= c - i
    return out


# ---------------------------------------------------------------------------
# central moments by recurrence


@dataclass(frozen=True)
class MomentTable:
    """``mu_{n,m,gamma}`` for ``m = 0..max_order``.

    ``central[m]`` is ``None`` where the entry is not available; the
    recurrence reaches ``mu_m`` only while ``n > gamma (m - 1)``.
    """

    params: ShapeParams
    max_order: int
    central: Tuple[RationalPoly | None, ...]
    validity: Tuple[bool, ...] = field(default=())

    def __getitem__(self, m: int) -> RationalPoly:
        entry = self.central[m]
        if entry is None:
            raise MomentValidityError(
                f"mu_{m} unavailable: n <= gamma*(m-1) is a recurrence pole "
                f"(n={self.params.n}, gamma={self.params.gamma})", table=self)
        return entry

    @property
    def valid_order(self) -> int:
        return sum(self.validity) - 1

    def to_json(self) -> dict:
        return {
            "params": self.params.to_json(),
            "max_order": self.max_order,
            "central": [None if p is None else p.to_strings() for p in self.central],
            "validity": list(self.validity),
        }

    @classmethod
    def from_json(cls, data: dict) -> "MomentTable":
        central = tuple(None if p is None else RationalPoly.from_strings(p) for p in data["central"])
        return cls(ShapeParams.from_json(data["params"]), int(data["max_order"]), central,
                   tuple(bool(v) for v in data["validity"]))


def max_valid_order(params: ShapeParams) -> int:
    """Largest ``m`` with ``n > gamma (m-1)``, i.e. ``m < n/gamma + 1``.

    Both the recurrence and the closed-form route reach exactly this order.
    """
    c = params.c
    m = math.ceil(c)  # m < c + 1
    return m if m < c + 1 else m - 1


def central_moments(params: ShapeParams, M: int, strict: bool = True) -> MomentTable:
    """Central moments up to order ``M`` by the exact three-term recurrence.

    Step ``m -> m+1`` divides by ``(n - gamma m)(n + beta)``. If it vanishes
    or changes sign (``n <= gamma m``) the table stops there: with
    ``strict`` a :class:`MomentValidityError` carrying the partial table is
    raised, otherwise the partial table is returned.
    """
    if M < 0:
        raise ParameterError("M must be nonnegative")
    n, g, a, b = params.n, params.gamma, params.alpha, params.beta
    shift = RationalPoly([a / (n + b), -1])  # alpha/(n+beta) - x
    px = RationalPoly([0, n, n * g])  # n x (1 + gamma x)
    mus: List[RationalPoly] = [ONE]
    if M >= 1:
        mus.append(RationalPoly([a, -b]) / (n + b))
    failed = False
    for m in range(1, M):
        if n <= g * m:
            failed = True
            break
        mu, prev = mus[m], mus[m - 1]
        lin = RationalPoly([m * n - (2 * g * m - n) * a, n * n + (2 * g * m - n) * (n + b)])
        quad = shift * shift * (m * g * (n + b)) - shift * (m * n)
        rhs = px * (mu.derivative() + prev * m) + lin * mu + quad * prev
        mus.append(rhs / ((n - g * m) * (n + b)))
    central = tuple(mus) + (None,) * (M + 1 - len(mus))
    table = MomentTable(params, M, central, tuple(p is not None for p in central))
    if failed and strict:
        raise MomentValidityError(
            f"n <= gamma*m: recurrence pole at m={len(mus) - 1} "
            f"(n={n}, gamma={g}); mu_{len(mus)} and beyond unavailable", table=table)
    return table


# ---------------------------------------------------------------------------
# raw moments from closed forms


def nb_rising_moment(params: ShapeParams, j: int) -> RationalPoly:
    """``sum_k p_{n,k,gamma}(x) k(k+1)...(k+j-1)`` as a polynomial in ``x``.

    Uses ``E[k(k-1)...(k-l+1)] = c(c+1)...(c+l-1) (gamma x)^l``, ``c = n/gamma``.
    """
    c, g = params.c, params.gamma
    coeffs = [Fraction(0)] * (j + 1)
    for l, e in enumerate(rising_in_falling(j)):
        if e:
            coeffs[l] += e * _rising(c, l) * g ** l
    return RationalPoly(coeffs)


def raw_moments(params: ShapeParams, M: int) -> List[RationalPoly]:
    """``B(t^m, x)`` for ``m = 0..M`` exactly.

    ``((nt+alpha)/(n+beta))^m`` is expanded binomially; ``int b t^j`` equals
    ``k^(rising j) / (gamma^j c^(falling j))``, which vanishes at ``k = 0``
    for ``j >= 1``, so the point mass only enters through ``j = 0``.
    """
    c = params.c
    if M >= c + 1:
        raise DivergenceError(f"B(t^{M}) diverges: need m < n/gamma + 1 = {c + 1}")
    n, g, a, b = params.n, params.gamma, params.alpha, params.beta
    inner = [nb_rising_moment(params, j) / (g ** j * _falling(c, j)) for j in range(M + 1)]
    out = []
    for m in range(M + 1):
        acc = RationalPoly()
        for j in range(m + 1):
            acc = acc + inner[j] * (math.comb(m, j) * n ** j * a ** (m - j))
        out.append(acc / (n + b) ** m)
    return out


def central_from_raw(raw: Sequence[RationalPoly], M: int) -> List[RationalPoly]:
    """``mu_m = sum_j C(m,j) (-x)^(m-j) B(t^j, x)``."""
    if M >= len(raw):
        raise ParameterError(f"need raw moments up to order {M}, have {len(raw) - 1}")
    mx = RationalPoly([0, -1])
    return [sum((raw[j] * mx ** (m - j) * math.comb(m, j) for j in range(m + 1)), RationalPoly())
            for m in range(M + 1)]


def exact_operator_poly(params: ShapeParams, poly: RationalPoly) -> RationalPoly:
    """``B(f, x)`` for a polynomial ``f`` with rational coefficients."""
    if poly.degree < 0:
        return RationalPoly()
    raw = raw_moments(params, poly.degree)
    return sum((raw[m] * cm for m, cm in enumerate(poly.coefficients)), RationalPoly())


# ---------------------------------------------------------------------------
# Baskakov moments


def baskakov_U_moments(n, gamma, M: int) -> List[RationalPoly]:
    """``U_{n,m,gamma}(x) = sum_k p_{n,k,gamma}(x) (k/n - x)^m`` for ``m = 0..M``.

    ``n U_{m+1} = x(1+gamma x) (U_m' + m U_{m-1})``.
    """
    n, gamma = to_fraction(n), to_fraction(gamma)
    if n <= 0 or gamma <= 0:
        raise ParameterError("n and gamma must be positive")
    px = RationalPoly([0, 1, gamma])
    us = [ONE, RationalPoly()][: M + 1]
    for m in range(1, M):
        us.append(px * (us[m].derivative() + us[m - 1] * m) / n)
    return us


# ---------------------------------------------------------------------------
# comparison with the leading-order expansion of B(t^m, x)


def expansion_coefficients(params: ShapeParams, m: int) -> Tuple[Fraction, Fraction]:
    """Leading ``x^m`` and ``x^(m-1)`` coefficients of the published expansion.

    ``A = n^m G(c+m) G(c-m+1) / ((n+beta)^m G(c+1) G(c))`` and
    ``B = m n^(m-1) G(c+m-1) G(c-m+1) / ((n+beta)^m G(c+1) G(c))
    * (n(m-1) + alpha(c-m+1))`` with ``G`` the Gamma function.
    """
    n, a, b, c = params.n, params.alpha, params.beta, params.c
    if m == 0:
        return Fraction(1), Fraction(0)
    lead = (n / (n + b)) ** m * _rising(c, m) / _falling(c, m)
    sub = (m * n ** (m - 1) * _rising(c, m - 1) / ((n + b) ** m * _falling(c, m))
           * (n * (m - 1) + a * (c - m + 1)))
    return lead, sub


@dataclass(frozen=True)
class ExpansionRow:
    n: Fraction
    exact_lead: Fraction
    stated_lead: Fraction
    exact_sub: Fraction
    stated_sub: Fraction

    @property
    def lead_diff(self) -> Fraction:
        return self.exact_lead - self.stated_lead

    @property
    def sub_diff(self) -> Fraction:
        return self.exact_sub - self.stated_sub


@dataclass(frozen=True)
class ExpansionReport:
    m: int
    rows: Tuple[ExpansionRow, ...]
    lead_decay: float | None
    sub_decay: float | None

    @property
    def lead_exact(self) -> bool:
        return all(r.lead_diff == 0 for r in self.rows)

    @property
    def sub_exact(self) -> bool:
        return all(r.sub_diff == 0 for r in self.rows)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "lead_decay": self.lead_decay,
            "sub_decay": self.sub_decay,
            "lead_exact": self.lead_exact,
            "sub_exact": self.sub_exact,
            "rows": [{"n": str(r.n), "exact_lead": str(r.exact_lead), "stated_lead": str(r.stated_lead),
                      "exact_sub": str(r.exact_sub), "stated_sub": str(r.stated_sub)} for r in self.rows],
        }


def _decay(ns, diffs):
    pts = [(math.log(float(n)), math.log(abs(float(d)))) for n, d in zip(ns, diffs) if d != 0]
    if len(pts) < 2:
        return None
    xs, ys = zip(*pts)
    xm, ym = sum(xs) / len(xs), sum(ys) / len(ys)
    return sum((u - xm) * (v - ym) for u, v in zip(xs, ys)) / sum((u - xm) ** 2 for u in xs)


def asymptotic_raw_check(params: ShapeParams, m: int, n_grid=None) -> ExpansionReport:
    """Compare exact ``B(t^m, x)`` coefficients with the leading-order expansion.

    For each ``n`` (default ``2^4 .. 2^12``, other parameters from
    ``params``) the exact ``x^m`` and ``x^(m-1)`` coefficients are set
    against the expansion's; the decay order is the log-log slope of the
    nonzero differences in ``n`` (``None`` when they all vanish).
    """
    if m < 0 or m > 4:
        raise ParameterError("asymptotic_raw_check supports 0 <= m <= 4")
    n_grid = [Fraction(2) ** e for e in range(4, 13)] if n_grid is None else [to_fraction(v) for v in n_grid]
    rows = []
    for n in n_grid:
        p = params.with_n(n)
        if n <= p.gamma * m:
            raise ParameterError(f"need n > gamma*m, got n={n}")
        raw = raw_moments(p, m)[m]
        lead, sub = expansion_coefficients(p, m)
        rows.append(ExpansionRow(n, raw.coefficient(m), lead,
                                 raw.coefficient(m - 1) if m else Fraction(0), sub))
    return ExpansionReport(m, tuple(rows), _decay(n_grid, [r.lead_diff for r in rows]),
                           _decay(n_grid, [r.sub_diff for r in rows]))
