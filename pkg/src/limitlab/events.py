"""Events on the extended real line and recursively generated event sequences.

An :class:`EventSet` is a finite union of intervals, each endpoint open or
closed. Infinite endpoints are ordinary endpoints: ``(-inf, 3)`` excludes
``-inf`` while ``[-inf, 3)`` contains it. The real line is therefore the open
interval ``(-inf, +inf)`` and the extended line the closed one.

An :class:`EventRule` produces ``E_n`` by applying a step map ``n - 1`` times
to a seed event, and carries a *declared* limit event.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from limitlab.extreal import MINUS_INF, PLUS_INF, ExtendedReal

R = "R"
RBAR = "Rbar"


@dataclass(frozen=True)
class Interval:
    lo: ExtendedReal
    hi: ExtendedReal
    lo_closed: bool = True
    hi_closed: bool = True

    @classmethod
    def make(cls, lo, hi, lo_closed=True, hi_closed=True) -> "Interval":
        return cls(ExtendedReal.of(lo), ExtendedReal.of(hi), bool(lo_closed), bool(hi_closed))

    @property
    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi and self.lo_closed and self.hi_closed

    def contains(self, x) -> bool:
        x = ExtendedReal.of(x)
        above = x > self.lo or (self.lo_closed and x == self.lo)
        below = x < self.hi or (self.hi_closed and x == self.hi)
        return above and below

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lo_closed, hi_closed)

    def shift(self, delta) -> "Interval":
        return Interval(self.lo + delta, self.hi + delta, self.lo_closed, self.hi_closed)

    def __str__(self):
        if self.is_singleton:
            return "{" + str(self.lo) + "}"
        return f"{'[' if self.lo_closed else '('}{self.lo},{self.hi}{']' if self.hi_closed else ')'}"


def _touches(a: Interval, b: Interval) -> bool:
    # a starts no later than b
    if a.hi > b.lo:
        return True
    return a.hi == b.lo and (a.hi_closed or b.lo_closed)


def _canonical(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    live = sorted((i for i in intervals if not i.is_empty), key=lambda i: (i.lo, not i.lo_closed))
    out: list[Interval] = []
    for cur in live:
        if out and _touches(out[-1], cur):
            prev = out[-1]
            if cur.hi > prev.hi:
                hi, hi_closed = cur.hi, cur.hi_closed
            elif cur.hi < prev.hi:
                hi, hi_closed = prev.hi, prev.hi_closed
            else:
                hi, hi_closed = prev.hi, prev.hi_closed or cur.hi_closed
            out[-1] = Interval(prev.lo, hi, prev.lo_closed, hi_closed)
        else:
            out.append(cur)
    return tuple(out)


class EventSet:
    """Finite union of intervals, kept sorted, disjoint and non-adjacent."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Interval] = ()):
        object.__setattr__(self, "components", _canonical(components))

    def __setattr__(self, name, value):
        raise AttributeError("EventSet is immutable")

    def __reduce__(self):
        return (EventSet, (self.components,))

    def __eq__(self, other):
        if not isinstance(other, EventSet):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __str__(self):
        if not self.components:
            return "{}"
        return " u ".join(str(c) for c in self.components)

    def __repr__(self):
        return f"EventSet({self})"

    @property
    def is_empty(self) -> bool:
        return not self.components

    def contains(self, x) -> bool:
        return any(c.contains(x) for c in self.components)

    __contains__ = contains

    def member(self, x, universe: str = RBAR) -> bool:
        """Membership of ``x`` with the universe made explicit.

        Points at infinity are not members of anything when the universe is R.
        """
        x = ExtendedReal.of(x)
        if universe == R and not x.is_finite:
            return False
        return self.contains(x)

    def union(self, other: "EventSet") -> "EventSet":
        return EventSet(self.components + other.components)

    __or__ = union

    def intersection(self, other: "EventSet") -> "EventSet":
        return EventSet(a.intersect(b) for a in self.components for b in other.components)

    __and__ = intersection

    def complement(self, universe: str = R) -> "EventSet":
        return complement(self, universe)

    def difference(self, other: "EventSet") -> "EventSet":
        return self.intersection(complement(other, RBAR))

    def issubset(self, other: "EventSet") -> bool:
        return self.difference(other).is_empty

    def shift(self, delta) -> "EventSet":
        return EventSet(c.shift(delta) for c in self.components)

    def canonicalize(self) -> "EventSet":
        return EventSet(self.components)

    @property
    def sup(self) -> Optional[ExtendedReal]:
        return self.components[-1].hi if self.components else None


REAL_LINE = EventSet([Interval(MINUS_INF, PLUS_INF, False, False)])
EXTENDED_LINE = EventSet([Interval(MINUS_INF, PLUS_INF, True, True)])
EMPTY = EventSet()

_UNIVERSES = {R: REAL_LINE, RBAR: EXTENDED_LINE}


def universe_set(universe: str) -> EventSet:
    try:
        return _UNIVERSES[universe]
    except KeyError:
        raise ValueError(f"universe must be {R!r} or {RBAR!r}, got {universe!r}") from None


def interval(lo, hi, closed: str = "[]") -> EventSet:
    """``interval(0, 1, "[)")`` is ``[0, 1)``."""
    if len(closed) != 2 or closed[0] not in "[(" or closed[1] not in "])":
        raise ValueError(f"bad closure {closed!r}; use one of '[]', '[)', '(]', '()'")
    return EventSet([Interval.make(lo, hi, closed[0] == "[", closed[1] == "]")])


def singleton(*xs) -> EventSet:
    return EventSet(Interval.make(x, x) for x in xs)


def ray_below(b, closed: bool = False) -> EventSet:
    """``(-inf, b)``, or ``(-inf, b]`` when closed."""
    return EventSet([Interval.make(MINUS_INF, b, False, closed)])


def complement(e: EventSet, universe: str = R) -> EventSet:
    u = universe_set(universe).components[0]
    inside = e.intersection(universe_set(universe))
    gaps = []
    lo, lo_closed = u.lo, u.lo_closed
    for c in inside.components:
        gaps.append(Interval(lo, c.lo, lo_closed, not c.lo_closed))
        lo, lo_closed = c.hi, not c.hi_closed
    gaps.append(Interval(lo, u.hi, lo_closed, u.hi_closed))
    return EventSet(gaps)


_TOKEN = re.compile(r"\s*(?:([\[(])\s*([^,\s]+)\s*,\s*([^\])\s]+)\s*([\])])|\{([^}]*)\}|(Rbar|R|empty))\s*")


def parse_event(text: str) -> EventSet:
    """Parse the textual syntax, e.g. ``"(-inf,3)"``, ``"{5}"``, ``"[0,1) u {4}"``.

    Also accepts ``R``, ``Rbar``, ``empty`` and ``{}``; ``u`` and ``∪`` both
    denote union.
    """
    parts = re.split(r"\s+[uU]\s+|∪", text.strip())
    pieces: list[Interval] = []
    for part in parts:
        m = _TOKEN.fullmatch(part)
        if not m:
            raise ValueError(f"cannot parse event component {part!r}")
        open_, lo, hi, close, points, word = m.groups()
        if open_:
            pieces.append(Interval.make(lo, hi, open_ == "[", close == "]"))
        elif points is not None:
            pieces.extend(Interval.make(x, x) for x in points.split(",") if x.strip())
        elif word == "R":
            pieces.extend(REAL_LINE.components)
        elif word == "Rbar":
            pieces.extend(EXTENDED_LINE.components)
    return EventSet(pieces)


class LimitKind(str, enum.Enum):
    IN_R = "in_R"
    IN_RBAR_ONLY = "in_Rbar_only"
    NO_LIMIT = "no_limit"


@dataclass(frozen=True)
class LimitEvent:
    kind: LimitKind
    event: Optional[EventSet] = None

    @classmethod
    def in_r(cls, e: EventSet) -> "LimitEvent":
        return cls(LimitKind.IN_R, e)

    @classmethod
    def in_rbar_only(cls, e: EventSet) -> "LimitEvent":
        return cls(LimitKind.IN_RBAR_ONLY, e)

    @classmethod
    def none(cls) -> "LimitEvent":
        return cls(LimitKind.NO_LIMIT, None)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "event": None if self.event is None else str(self.event)}


@dataclass(frozen=True)
class EventRule:
    """Seed event, step map and declared limit event of an event sequence."""

    name: str
    seed: EventSet
    step: Callable[[EventSet], EventSet]
    declared_limit: LimitEvent
    closed_form: Optional[Callable[[int], EventSet]] = None


def iterate_rule(rule: EventRule, n: int) -> EventSet:
    if n < 1:
        raise ValueError("event index starts at 1")
    e = rule.seed
    for _ in range(n - 1):
        e = rule.step(e)
    return e


def apply_rule(rule: EventRule, n: int) -> EventSet:
    """``E_n``: the seed for ``n = 1``, otherwise the step applied ``n - 1`` times."""
    if n < 1:
        raise ValueError("event index starts at 1")
    if rule.closed_form is not None:
        return rule.closed_form(n)
    return iterate_rule(rule, n)


def rule_events(rule: EventRule, N: int) -> list[EventSet]:
    """``[E_1, ..., E_N]`` by iteration (one pass, no closed form needed)."""
    out = [rule.seed]
    for _ in range(N - 1):
        out.append(rule.step(out[-1]))
    return out


def limit_event(rule: EventRule) -> LimitEvent:
    return rule.declared_limit


def check_declared_limit(rule: EventRule, N: int = 100) -> str:
    """Sanity-check a declared limit by monotone inclusion over ``n <= N``.

    Returns ``"consistent"`` when ``E_n`` increases and the declared limit
    contains every ``E_n``, ``"violated"`` when an increasing sequence escapes
    it, and ``"not_monotone"`` when the check does not apply.
    """
    events = rule_events(rule, N)
    increasing = all(a.issubset(b) for a, b in zip(events, events[1:]))
    if not increasing:
        return "not_monotone"
    limit = rule.declared_limit.event
    if limit is None:
        return "violated"
    return "consistent" if all(e.issubset(limit) for e in events) else "violated"


def singleton_shift() -> EventRule:
    """``E_1 = {1}``, ``E_n = {n}``; the points run off to ``+inf``."""
    return EventRule(
        name="singleton_shift",
        seed=singleton(1),
        step=lambda e: e.shift(1),
        declared_limit=LimitEvent.in_rbar_only(singleton(PLUS_INF)),
        closed_form=lambda n: singleton(n),
    )


def identity_rule(seed: EventSet) -> EventRule:
    return EventRule(
        name="identity",
        seed=seed,
        step=lambda e: e,
        declared_limit=LimitEvent.in_r(seed),
        closed_form=lambda n: seed,
    )


def _grow_ray(e: EventSet) -> EventSet:
    top = e.sup
    if top is None or not top.is_finite:
        raise ValueError(f"ray growth needs a finite upper end, got {e}")
    return e.union(interval(top, top + 1, "[)"))


def ray_growth() -> EventRule:
    """``E_1 = (-inf, 1)`` and ``E_n = E_{n-1} u [n-1, n) = (-inf, n)``."""
    return EventRule(
        name="ray_growth",
        seed=ray_below(1),
        step=_grow_ray,
        declared_limit=LimitEvent.in_r(REAL_LINE),
        closed_form=lambda n: ray_below(n),
    )


RULES = {
    "singleton_shift": singleton_shift,
    "identity": identity_rule,
    "ray_growth": ray_growth,
}


def make_rule(name: str, seed: EventSet | str | None = None) -> EventRule:
    """Look up a built-in rule; ``identity`` needs a seed event."""
    if name not in RULES:
        raise ValueError(f"unknown rule {name!r}; choose from {sorted(RULES)}")
    if name == "identity":
        if seed is None:
            raise ValueError("the identity rule needs a seed event")
        return identity_rule(parse_event(seed) if isinstance(seed, str) else seed)
    return RULES[name]()
