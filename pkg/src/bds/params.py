"""Shape parameters and the log-space value type."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError, ParameterError

Rational = Union[int, str, Fraction, float]


def to_fraction(value: Rational) -> Fraction:
    """Convert ``value`` to an exact :class:`~fractions.Fraction`.

    Strings such as ``"3/2"`` or ``"0.25"`` are parsed exactly; floats are
    converted through their exact binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rational parameters")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value.strip() if isinstance(value, str) else value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"cannot parse rational {value!r}") from exc
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ParameterError(f"parameter must be finite, got {value}")
        return Fraction(value)
    return Fraction(value)


@dataclass(frozen=True)
class ShapeParams:
    """The tuple ``(n, gamma, alpha, beta)`` carried by every operator call.

    All fields are exact rationals. ``c = n / gamma`` is the negative
    binomial order of the discrete basis.
    """

    n: Fraction
    gamma: Fraction
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)

    def __post_init__(self):
        for name in ("n", "gamma", "alpha", "beta"):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if self.n <= 0:
            raise ParameterError(f"n must be positive, got {self.n}")
        if self.gamma <= 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")
        if not 0 <= self.alpha <= self.beta:
            raise ParameterError(
                f"need 0 <= alpha <= beta, got alpha={self.alpha}, beta={self.beta}"
            )

    @classmethod
    def of(cls, n, gamma=1, alpha=0, beta=0) -> "ShapeParams":
        return cls(to_fraction(n), to_fraction(gamma), to_fraction(alpha), to_fraction(beta))

    @property
    def c(self) -> Fraction:
        return self.n / self.gamma

    def with_n(self, n) -> "ShapeParams":
        return ShapeParams(to_fraction(n), self.gamma, self.alpha, self.beta)

    def shifted(self, dn) -> "ShapeParams":
        """Same parameters with ``n`` replaced by ``n + dn``."""
        return ShapeParams(self.n + to_fraction(dn), self.gamma, self.alpha, self.beta)

    def as_floats(self):
        return float(self.n), float(self.gamma), float(self.alpha), float(self.beta)

    def to_json(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("n", "gamma", "alpha", "beta")}

    @classmethod
    def from_json(cls, data: dict) -> "ShapeParams":
        return cls.of(data["n"], data["gamma"], data.get("alpha", 0), data.get("beta", 0))


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_magnitude)``."""

    log_magnitude: float
    sign: int

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise DomainError(f"sign must be -1, 0 or 1, got {self.sign}")
        if (self.sign == 0) != (self.log_magnitude == -math.inf):
            raise DomainError("sign is 0 exactly when log_magnitude is -inf")

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(-math.inf, 0)

    @classmethod
    def from_float(cls, value: float) -> "LogValue":
        if value == 0:
            return cls.zero()
        return cls(math.log(abs(value)), 1 if value > 0 else -1)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    @property
    def value(self) -> float:
        return float(self)
