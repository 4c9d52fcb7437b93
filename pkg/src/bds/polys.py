"""Exact polynomial arithmetic over :class:`fractions.Fraction`."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, Tuple

Exponent = Tuple[int, int, int]


class RationalPoly:
    """Dense univariate polynomial in ``x`` with exact rational coefficients.

    ``coefficients[i]`` multiplies ``x**i``. Trailing zeros are stripped, so
    the zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Iterable = ()):
        coeffs = [Fraction(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self.coefficients = tuple(coeffs)

    @classmethod
    def constant(cls, value) -> "RationalPoly":
        return cls([value])

    @classmethod
    def x(cls) -> "RationalPoly":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, power: int) -> Fraction:
        if 0 <= power < len(self.coefficients):
            return self.coefficients[power]
        return Fraction(0)

    def __eq__(self, other):
        if not isinstance(other, RationalPoly):
            if isinstance(other, (int, Fraction)):
                other = RationalPoly([other])
            else:
                return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"RationalPoly([{', '.join(str(c) for c in self.coefficients)}])"

    def __str__(self):
        if not self.coefficients:
            return "0"
        terms = []
        for i, c in enumerate(self.coefficients):
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and c == 1:
                terms.append(mono)
            elif mono:
                terms.append(f"({c})*{mono}")
            else:
                terms.append(f"({c})")
        return " + ".join(terms)

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            return other
        return RationalPoly([other])

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return RationalPoly(
            (a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(-c for c in self.coefficients)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalPoly):
            s = Fraction(other)
            return RationalPoly(c * s for c in self.coefficients)
        a, b = self.coefficients, other.coefficients
        if not a or not b:
            return RationalPoly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return RationalPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        s = Fraction(scalar)
        return RationalPoly(c / s for c in self.coefficients)

    def __pow__(self, power: int):
        result = RationalPoly([1])
        for _ in range(power):
            result = result * self
        return result

    def derivative(self, order: int = 1) -> "RationalPoly":
        coeffs = list(self.coefficients)
        for _ in range(order):
            coeffs = [i * c for i, c in enumerate(coeffs)][1:]
        return RationalPoly(coeffs)

    def __call__(self, x):
        """Horner evaluation; exact for rational ``x``, float for float ``x``."""
        if isinstance(x, float) or hasattr(x, "dtype"):
            acc = 0.0 * x
            for c in reversed(self.coefficients):
                acc = acc * x + float(c)
            return acc
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coefficients):
            acc = acc * x + c
        return acc

    def to_strings(self):
        return [str(c) for c in self.coefficients] or ["0"]

    @classmethod
    def from_strings(cls, items) -> "RationalPoly":
        return cls(Fraction(s) for s in items)


class TrivariatePoly:
    """Sparse polynomial in three variables with exact coefficients.

    Monomials are keyed by exponent triples ``(i_x, i_y, i_n)``. What the
    middle variable stands for is up to the caller: :func:`bds.basis.s_polynomials`
    uses it for ``k`` and :func:`bds.basis.q_decomposition` for ``w = k - n x``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Exponent, Fraction] | None = None):
        self.terms = {e: Fraction(c) for e, c in (terms or {}).items() if c != 0}

    @classmethod
    def monomial(cls, ix=0, iy=0, i_n=0, coeff=1) -> "TrivariatePoly":
        return cls({(ix, iy, i_n): Fraction(coeff)})

    def __eq__(self, other):
        return isinstance(other, TrivariatePoly) and self.terms == other.terms

    def __repr__(self):
        body = ", ".join(f"{e}: {c}" for e, c in sorted(self.terms.items()))
        return f"TrivariatePoly({{{body}}})"

    def __add__(self, other):
        out = defaultdict(Fraction, self.terms)
        for e, c in other.terms.items():
            out[e] += c
        return TrivariatePoly(out)

    def __neg__(self):
        return TrivariatePoly({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, TrivariatePoly):
            s = Fraction(other)
            return TrivariatePoly({e: c * s for e, c in self.terms.items()})
        out = defaultdict(Fraction)
        for (a1, b1, c1), v1 in self.terms.items():
            for (a2, b2, c2), v2 in other.terms.items():
                out[(a1 + a2, b1 + b2, c1 + c2)] += v1 * v2
        return TrivariatePoly(out)

    __rmul__ = __mul__

    def diff_x(self) -> "TrivariatePoly":
        return TrivariatePoly(
            {(a - 1, b, c): v * a for (a, b, c), v in self.terms.items() if a > 0}
        )

    def substitute_y_shift(self) -> "TrivariatePoly":
        """Rewrite ``y`` as ``y + n*x`` and expand."""
        out = defaultdict(Fraction)
        for (a, b, c), v in self.terms.items():
            for j in range(b + 1):
                out[(a + b - j, j, c + b - j)] += v * comb(b, j)
        return TrivariatePoly(out)

    def evaluate(self, x, y, n):
        return sum(
            (v * Fraction(x) ** a * Fraction(y) ** b * Fraction(n) ** c
             for (a, b, c), v in self.terms.items()),
            Fraction(0),
        )


class RationalFunction:
    """Quotient of two :class:`RationalPoly`; no gcd reduction is attempted."""

    __slots__ = ("num", "den")

    def __init__(self, num: RationalPoly, den: RationalPoly | None = None):
        self.num = num
        self.den = den if den is not None else RationalPoly([1])
        if not self.den.coefficients:
            raise ZeroDivisionError("zero denominator")

    def __add__(self, other):
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    def __mul__(self, other):
        return RationalFunction(self.num * other.num, self.den * other.den)

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def __call__(self, x):
        return self.num(x) / self.den(x)
