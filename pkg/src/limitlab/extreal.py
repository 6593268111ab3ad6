"""Points of the extended real line and finitely supported probability measures.

A :class:`DiscreteMeasure` carries its masses either as exact
:class:`fractions.Fraction` values ("exact" mode) or as floats ("float" mode).
Exact mode is what makes the pmf identities checkable with zero tolerance;
float mode is for long convergence scans and for distributions with
irrational masses (Poisson).
"""

from __future__ import annotations

import enum
import functools
import json
import math
from bisect import bisect_left, bisect_right
from fractions import Fraction
from numbers import Rational, Real
from typing import Iterable, Mapping, Union

Number = Union[Fraction, float]

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)

FLOAT_MASS_TOL = 1e-12


def as_rational(x) -> Fraction:
    """Parse ``x`` as an exact rational.

    Strings may be ``"p/q"`` or decimals (``"0.3"``, ``"1e-3"``). Floats are
    read through their shortest repr, so ``0.3`` becomes ``3/10`` rather
    than the binary expansion of the double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"not a finite number: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


class Kind(str, enum.Enum):
    FINITE = "finite"
    PLUS_INF = "+inf"
    MINUS_INF = "-inf"


_RANK = {Kind.MINUS_INF: -1, Kind.FINITE: 0, Kind.PLUS_INF: 1}


@functools.total_ordering
class ExtendedReal:
    """A point of the extended real line.

    Finite values are kept as given (Fraction or float); ints are promoted to
    Fraction. Comparison between finite values is exact, so ``1/10`` and the
    double ``0.1`` are different points.
    """

    __slots__ = ("kind", "value", "_k", "_h")

    def __init__(self, kind: Kind, value: Number | None = None):
        if type(kind) is not Kind:
            kind = Kind(kind)
        if kind is Kind.FINITE and type(value) in (Fraction, int):
            value = value if type(value) is Fraction else Fraction(value)
        elif kind is Kind.FINITE:
            if value is None:
                raise ValueError("finite point needs a value")
            if isinstance(value, bool):
                raise TypeError("booleans are not points")
            if isinstance(value, (int, Rational)) and not isinstance(value, Fraction):
                value = Fraction(value)
            elif isinstance(value, float):
                if math.isnan(value):
                    raise ValueError("nan is not a point of the extended line")
                if math.isinf(value):
                    raise ValueError("use PLUS_INF / MINUS_INF for infinite points")
            elif not isinstance(value, Fraction):
                raise TypeError(f"unsupported point value {value!r}")
        else:
            value = None
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "value", value)
        # sort key, cached: comparisons dominate bisection over atoms
        object.__setattr__(self, "_k", (_RANK[kind], value if value is not None else 0))

    def __setattr__(self, name, value):
        raise AttributeError("ExtendedReal is immutable")

    def __reduce__(self):
        return (ExtendedReal, (self.kind, self.value))

    @classmethod
    def of(cls, x) -> "ExtendedReal":
        """Coerce numbers, numeric strings and ``"+inf"``-style strings."""
        if type(x) is ExtendedReal:
            return x
        if type(x) is int:
            # integer points recur across the members of a family; share them
            p = _INT_POINTS.get(x)
            if p is None:
                p = cls(Kind.FINITE, x)
                if len(_INT_POINTS) < _INT_POINTS_MAX:
                    _INT_POINTS[x] = p
            return p
        if isinstance(x, ExtendedReal):
            return x
        if isinstance(x, str):
            s = x.strip().lower().replace("∞", "inf")
            if s in ("inf", "+inf", "infinity", "+infinity", "oo", "+oo"):
                return PLUS_INF
            if s in ("-inf", "-infinity", "-oo"):
                return MINUS_INF
            return cls(Kind.FINITE, Fraction(s))
        if isinstance(x, float) and math.isinf(x):
            return PLUS_INF if x > 0 else MINUS_INF
        return cls(Kind.FINITE, x)

    @property
    def is_finite(self) -> bool:
        return self.kind is Kind.FINITE

    def _key(self):
        return self._k

    def __eq__(self, other):
        if type(other) is ExtendedReal:
            return self._k == other._k
        if not isinstance(other, ExtendedReal):
            if isinstance(other, (Real, str)):
                try:
                    other = ExtendedReal.of(other)
                except (TypeError, ValueError):
                    return NotImplemented
            else:
                return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        if type(other) is not ExtendedReal:
            other = ExtendedReal.of(other)
        a, b = self._k, other._k
        return a[1] < b[1] if a[0] == b[0] else a[0] < b[0]

    def __gt__(self, other):
        if type(other) is not ExtendedReal:
            other = ExtendedReal.of(other)
        a, b = self._k, other._k
        return a[1] > b[1] if a[0] == b[0] else a[0] > b[0]

    def __le__(self, other):
        if type(other) is not ExtendedReal:
            other = ExtendedReal.of(other)
        a, b = self._k, other._k
        return a[1] <= b[1] if a[0] == b[0] else a[0] <= b[0]

    def __ge__(self, other):
        if type(other) is not ExtendedReal:
            other = ExtendedReal.of(other)
        a, b = self._k, other._k
        return a[1] >= b[1] if a[0] == b[0] else a[0] >= b[0]

    def __hash__(self):
        try:
            return self._h
        except AttributeError:
            h = hash(self._k)
            object.__setattr__(self, "_h", h)
            return h

    def __float__(self):
        if self.kind is Kind.PLUS_INF:
            return math.inf
        if self.kind is Kind.MINUS_INF:
            return -math.inf
        return float(self.value)

    def __neg__(self):
        if self.kind is Kind.PLUS_INF:
            return MINUS_INF
        if self.kind is Kind.MINUS_INF:
            return PLUS_INF
        return ExtendedReal(Kind.FINITE, -self.value)

    def __add__(self, delta):
        if isinstance(delta, ExtendedReal):
            if not delta.is_finite:
                raise TypeError("only finite shifts are supported")
            delta = delta.value
        if not self.is_finite:
            return self
        return ExtendedReal(Kind.FINITE, self.value + delta)

    __radd__ = __add__

    def __sub__(self, delta):
        return self + (-delta)

    def __str__(self):
        if self.kind is Kind.PLUS_INF:
            return "+inf"
        if self.kind is Kind.MINUS_INF:
            return "-inf"
        if isinstance(self.value, float):
            return repr(self.value)
        return str(self.value)

    def __repr__(self):
        return f"ExtendedReal({self})"


_INT_POINTS: dict[int, ExtendedReal] = {}
_INT_POINTS_MAX = 1 << 16

PLUS_INF = ExtendedReal(Kind.PLUS_INF)
MINUS_INF = ExtendedReal(Kind.MINUS_INF)


def _mass(x, mode: str) -> Number:
    if mode == EXACT:
        if type(x) is Fraction:
            return x
        if isinstance(x, float):
            raise TypeError("float mass in an exact measure; use mode='float'")
        return Fraction(x)
    return float(x)


def _common_denominator(values, denom=None):
    """Rewrite fractions as integer numerators over one denominator."""
    if denom is None:
        denom = 1
        for v in values:
            d = v.denominator
            if denom % d:
                denom = denom * d // math.gcd(denom, d)
    return denom, [v.numerator * (denom // v.denominator) for v in values]


def exact_sum(values) -> Fraction:
    """Sum of fractions without normalising after every addition."""
    values = [v if type(v) is Fraction else Fraction(v) for v in values]
    if not values:
        return Fraction(0)
    denom, nums = _common_denominator(values)
    return Fraction(sum(nums), denom)


def _infer_mode(masses) -> str:
    return FLOAT if any(isinstance(m, float) for m in masses) else EXACT


class DiscreteMeasure:
    """A probability measure with finitely many atoms on the extended line.

    ``atoms`` may be a mapping ``point -> mass`` or an iterable of pairs.
    Repeated points are merged and zero masses dropped, so two measures are
    equal exactly when they assign the same mass to every point.
    """

    __slots__ = ("_points", "_masses", "_mode", "_denom", "_prefix", "_suffix")

    def __init__(self, atoms: Mapping | Iterable, mode: str | None = None):
        pairs = list(atoms.items()) if isinstance(atoms, Mapping) else list(atoms)
        if mode is None:
            mode = _infer_mode(m for _, m in pairs)
        if mode not in MODES:
            raise ValueError(f"unknown arithmetic mode {mode!r}")
        converted = []
        for point, mass in pairs:
            point = ExtendedReal.of(point)
            mass = _mass(mass, mode)
            if mass < 0:
                raise ValueError(f"negative mass {mass} at {point}")
            converted.append((point, mass))
        # merge repeated points after sorting; avoids hashing every point
        converted.sort(key=lambda pm: pm[0]._k)
        items = []
        for point, mass in converted:
            if items and items[-1][0]._k == point._k:
                items[-1] = (items[-1][0], items[-1][1] + mass)
            else:
                items.append((point, mass))
        items = [pm for pm in items if pm[1] != 0]
        if not items:
            raise ValueError("a probability measure needs at least one atom")
        masses = tuple(m for _, m in items)
        denom = None
        if mode == EXACT:
            denom, nums = _common_denominator(masses)
            if sum(nums) != denom:
                raise ValueError(f"masses sum to {Fraction(sum(nums), denom)}, not 1")
        else:
            total = math.fsum(masses)
            if abs(total - 1.0) > FLOAT_MASS_TOL:
                raise ValueError(f"masses sum to {total!r}, not 1 within {FLOAT_MASS_TOL}")
        object.__setattr__(self, "_points", tuple(p for p, _ in items))
        object.__setattr__(self, "_masses", masses)
        object.__setattr__(self, "_mode", mode)
        object.__setattr__(self, "_denom", denom)
        object.__setattr__(self, "_prefix", None)
        object.__setattr__(self, "_suffix", None)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteMeasure is immutable")

    def __reduce__(self):
        return (DiscreteMeasure, (self.atoms, self._mode))

    @property
    def mode(self) -> str:
        return self._mode

    @property
    def points(self) -> tuple[ExtendedReal, ...]:
        return self._points

    @property
    def masses(self) -> tuple[Number, ...]:
        return self._masses

    @property
    def atoms(self) -> tuple[tuple[ExtendedReal, Number], ...]:
        return tuple(zip(self._points, self._masses))

    def __len__(self):
        return len(self._points)

    def __iter__(self):
        return iter(self.atoms)

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        return self._points == other._points and self._masses == other._masses

    def __hash__(self):
        return hash((self._points, self._masses))

    def __repr__(self):
        body = ", ".join(f"({p}, {m})" for p, m in self.atoms)
        return f"DiscreteMeasure({{{body}}}, mode={self._mode!r})"

    def _zero(self):
        return 0.0 if self._mode == FLOAT else Fraction(0)

    def _sum(self, values):
        return math.fsum(values) if self._mode == FLOAT else exact_sum(values)

    # Cumulative sums are computed on first use; instances stay logically immutable.
    # Exact mode keeps them as integer numerators over one common denominator.
    def _cumulative(self):
        if self._prefix is None:
            if self._mode == EXACT:
                _, terms = _common_denominator(self._masses, self._denom)
            else:
                terms = self._masses
            prefix, acc = [0], 0
            for t in terms:
                acc += t
                prefix.append(acc)
            suffix, acc = [0], 0
            for t in reversed(terms):
                acc += t
                suffix.append(acc)
            suffix.reverse()
            object.__setattr__(self, "_prefix", prefix)
            object.__setattr__(self, "_suffix", suffix)
        return self._prefix, self._suffix

    def _out(self, cum):
        if self._mode == EXACT:
            return Fraction(cum, self._denom)
        return float(cum)

    def mass_at(self, point) -> Number:
        point = ExtendedReal.of(point)
        i = bisect_left(self._points, point)
        if i < len(self._points) and self._points[i] == point:
            return self._masses[i]
        return self._zero()

    def cdf(self, x) -> Number:
        """Mass of ``[-inf, x]``."""
        prefix, _ = self._cumulative()
        return self._out(prefix[bisect_right(self._points, ExtendedReal.of(x))])

    def mass_below(self, x, strict: bool = True) -> Number:
        """Mass of ``[-inf, x)`` (or ``[-inf, x]`` when not strict)."""
        prefix, _ = self._cumulative()
        x = ExtendedReal.of(x)
        i = bisect_left(self._points, x) if strict else bisect_right(self._points, x)
        return self._out(prefix[i])

    def mass_above(self, x, strict: bool = True) -> Number:
        """Mass of ``(x, +inf]`` (or ``[x, +inf]`` when not strict).

        Summed from the top, so tiny tails keep their relative precision.
        """
        _, suffix = self._cumulative()
        x = ExtendedReal.of(x)
        i = bisect_right(self._points, x) if strict else bisect_left(self._points, x)
        return self._out(suffix[i])

    def mass_outside(self, b) -> Number:
        """Mass off the closed window ``[-b, b]``, atoms at infinity included."""
        b = ExtendedReal.of(b)
        return self.mass_off(-b, b)

    def mass_off(self, lo, hi) -> Number:
        """Mass off the closed window ``[lo, hi]``."""
        prefix, suffix = self._cumulative()
        i = bisect_left(self._points, ExtendedReal.of(lo))
        j = bisect_right(self._points, ExtendedReal.of(hi))
        return self._out(prefix[i] + suffix[j])

    def restricted(self, lo, hi) -> tuple[tuple[ExtendedReal, Number], ...]:
        """Atoms inside the closed window ``[lo, hi]`` (a sub-probability)."""
        lo, hi = ExtendedReal.of(lo), ExtendedReal.of(hi)
        i, j = bisect_left(self._points, lo), bisect_right(self._points, hi)
        return tuple(zip(self._points[i:j], self._masses[i:j]))

    def __call__(self, event) -> Number:
        return measure_of_event(self, event)

    @property
    def mass_at_infinity(self) -> Number:
        return self.mass_at(PLUS_INF) + self.mass_at(MINUS_INF)

    @property
    def is_on_real_line(self) -> bool:
        return self.mass_at_infinity == 0

    @property
    def finite_points(self) -> tuple[ExtendedReal, ...]:
        return tuple(p for p in self._points if p.is_finite)

    def to_float(self) -> "DiscreteMeasure":
        if self._mode == FLOAT:
            return self
        return DiscreteMeasure(((p, float(m)) for p, m in self.atoms), mode=FLOAT)

    def to_dict(self) -> dict:
        return {
            "atoms": [{"point": str(p), "mass": _mass_str(m)} for p, m in self.atoms],
            "mode": self._mode,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping) -> "DiscreteMeasure":
        mode = data.get("mode", EXACT)
        atoms = []
        for atom in data["atoms"]:
            point = ExtendedReal.of(atom["point"])
            mass = Fraction(atom["mass"]) if mode == EXACT else float(atom["mass"])
            atoms.append((point, mass))
        return cls(atoms, mode=mode)

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        return cls.from_dict(json.loads(text))


def _mass_str(m: Number) -> str:
    return repr(m) if isinstance(m, float) else str(m)


def dirac(point, mode: str = EXACT) -> DiscreteMeasure:
    return DiscreteMeasure([(point, 1)], mode=mode)


def measure_of_event(m: DiscreteMeasure, e) -> Number:
    """Total mass of the atoms of ``m`` lying in the event ``e``.

    ``e`` is anything with ``components`` made of intervals exposing
    ``lo``, ``hi``, ``lo_closed`` and ``hi_closed`` (see :mod:`limitlab.events`).
    """
    points, masses = m.points, m.masses
    parts = []
    for c in e.components:
        i = bisect_left(points, c.lo) if c.lo_closed else bisect_right(points, c.lo)
        j = bisect_right(points, c.hi) if c.hi_closed else bisect_left(points, c.hi)
        parts.extend(masses[i:j])
    return m._sum(parts)


def tv_distance(a: DiscreteMeasure, b: DiscreteMeasure) -> Number:
    """Total variation distance, half the l1 distance of the pmfs.

    Measures in different modes are compared in float mode.
    """
    if a.mode != b.mode:
        a, b = a.to_float(), b.to_float()
    pa, pb = dict(a.atoms), dict(b.atoms)
    zero = a._zero()
    diffs = [abs(pa.get(x, zero) - pb.get(x, zero)) for x in set(pa) | set(pb)]
    return a._sum(diffs) / 2
