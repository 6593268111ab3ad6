"""Uncertain intervals from finite digit prefixes.

Knowing only the first ``m`` digits of a real number ``x`` pins it to the
half-open interval ``[b, b + base**-m)`` where ``b`` is the truncated
expansion. Endpoints are exact :class:`~fractions.Fraction` values; floats
appear only when the interval is pushed through ``cos**2``, and there the
result is widened outward by a small explicit pad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from limitlab.errors import DomainError, ParameterError
from limitlab.extreal import as_rational

# outward pad for float cos^2 endpoints; covers argument rounding plus libm error
COS2_PAD = 4 * math.ulp(1.0)
# largest double not above pi/2, as an exact rational
HALF_PI_FLOOR = Fraction(math.pi / 2)


@dataclass(frozen=True)
class DigitPrefix:
    digits: tuple[int, ...]
    base: int = 10
    integer_part: int = 0

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if isinstance(self.base, bool) or not isinstance(self.base, int) or self.base < 2:
            raise ParameterError(f"base must be an integer >= 2, got {self.base!r}")
        if not self.digits:
            raise ParameterError("a prefix needs at least one digit")
        for d in self.digits:
            if not 0 <= d < self.base:
                raise ParameterError(f"digit {d} out of range for base {self.base}")
        if self.integer_part < 0:
            raise ParameterError("integer part must be nonnegative")

    @classmethod
    def from_string(cls, text: str, base: int = 10) -> "DigitPrefix":
        """``"0.141"`` -> digits (1, 4, 1). A bare ``".7"`` is accepted too."""
        text = text.strip()
        whole, dot, frac = text.partition(".")
        if not dot or not frac:
            raise ParameterError(f"prefix {text!r} needs at least one digit after the point")
        try:
            ip = int(whole, base) if whole else 0
            digits = tuple(int(ch, base) for ch in frac)
        except ValueError as exc:
            raise ParameterError(f"bad digit in prefix {text!r} for base {base}") from exc
        return cls(digits, base, ip)

    @property
    def length(self) -> int:
        return len(self.digits)

    @property
    def lower(self) -> Fraction:
        num = 0
        for d in self.digits:
            num = num * self.base + d
        return self.integer_part + Fraction(num, self.base**self.length)

    def __str__(self):
        if self.base <= 10:
            body = "".join(str(d) for d in self.digits)
        else:
            body = "".join("0123456789abcdefghijklmnopqrstuvwxyz"[d] for d in self.digits)
        return f"{self.integer_part}.{body}"


@dataclass(frozen=True)
class UncertainInterval:
    """``[lo, hi)`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= as_rational(x) < self.hi

    __contains__ = contains

    def issubset(self, other: "UncertainInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self):
        return f"[{self.lo}, {self.hi})"

    def to_dict(self) -> dict:
        return {"lo": str(self.lo), "hi": str(self.hi), "width": str(self.width)}


def uncertain_interval(p: DigitPrefix) -> UncertainInterval:
    lo = p.lower
    return UncertainInterval(lo, lo + Fraction(1, p.base**p.length))


def refine(p: DigitPrefix, next_digit: int) -> DigitPrefix:
    if not 0 <= next_digit < p.base:
        raise ParameterError(f"digit {next_digit} out of range for base {p.base}")
    return DigitPrefix(p.digits + (next_digit,), p.base, p.integer_part)


def contains(p: DigitPrefix, x) -> bool:
    return uncertain_interval(p).contains(x)


@dataclass(frozen=True)
class ProbabilityRange:
    """``(lo, hi]``: left end open, right end closed."""

    lo: float
    hi: float

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo < x <= self.hi

    __contains__ = contains

    def issubset(self, other: "ProbabilityRange") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self):
        return f"({self.lo!r}, {self.hi!r}]"

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "lo_open": True, "hi_closed": True, "pad": COS2_PAD}


def _cos2(x: Fraction) -> float:
    return math.cos(float(x)) ** 2


def transmission_range(theta: DigitPrefix | UncertainInterval) -> ProbabilityRange:
    """Image of an angle interval (radians) under ``cos**2``.

    ``cos**2`` decreases on ``[0, pi/2]``, so ``[b, s)`` maps onto
    ``(cos(s)**2, cos(b)**2]``. The float endpoints are moved outward by
    :data:`COS2_PAD` and clamped to ``[0, 1]``.
    """
    iv = uncertain_interval(theta) if isinstance(theta, DigitPrefix) else theta
    if iv.lo < 0 or iv.hi > HALF_PI_FLOOR:
        raise DomainError(f"angle interval {iv} leaves [0, pi/2]; cos^2 is not monotone there")
    lo = max(0.0, _cos2(iv.hi) - COS2_PAD)
    hi = min(1.0, _cos2(iv.lo) + COS2_PAD)
    return ProbabilityRange(lo, hi)
