"""Limits of measure sequences, tightness, escaped mass and limit probabilities.

Two kinds of limit are kept apart throughout:

* the *numeric* limit of the real sequence ``rho_n(E_n)``, and
* the *measure-side* value ``rho(E)``, where ``rho`` is a verified weak
  limit of ``rho_n`` and ``E`` is the declared limit event of ``E_n``.

The weak limit can be taken on the real line or, with escaped mass parked
at ``+inf``/``-inf``, on the extended line. :func:`coincidence_report`
classifies how the two sides relate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

from limitlab.events import (
    REAL_LINE,
    EventRule,
    EventSet,
    LimitKind,
    apply_rule,
    identity_rule,
    interval,
    ray_growth,
    rule_events,
    singleton,
)
from limitlab.extreal import (
    EXACT,
    FLOAT,
    MINUS_INF,
    PLUS_INF,
    DiscreteMeasure,
    ExtendedReal,
    Number,
    measure_of_event,
)
from limitlab.families import (
    MeasureFamily,
    bernoulli_family,
    record_index_family,
    running_max_family,
    _check_q,
)

DEFAULT_TOL = 1e-9
DEFAULT_WINDOW = 20


def _f(x) -> Optional[float]:
    return None if x is None else float(x)


def _num_out(x):
    """JSON-friendly number: exact values as strings, floats as floats."""
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    return float(x)


# ---------------------------------------------------------------------------
# numeric limits of real sequences


@dataclass(frozen=True)
class NumericLimit:
    value: Optional[Number]
    spread: Number
    window: int

    @property
    def converged(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        return {"value": _num_out(self.value), "spread": float(self.spread), "window": self.window}


def numeric_limit(seq: Sequence[Number], tol: float = DEFAULT_TOL, window: int = DEFAULT_WINDOW) -> NumericLimit:
    """Tail-window Cauchy test.

    The last ``window`` terms must all lie within ``tol`` of each other; the
    limit is then their mean. A sequence shorter than the window is judged on
    all of its terms. Slowly divergent sequences can pass, so this is only
    trustworthy for paths that settle geometrically.
    """
    if not seq:
        raise ValueError("numeric_limit needs a non-empty sequence")
    tail = list(seq[-window:])
    spread = max(tail) - min(tail)
    if spread < tol:
        mean = sum(tail, Fraction(0)) / len(tail) if all(isinstance(x, Fraction) for x in tail) else math.fsum(tail) / len(tail)
        return NumericLimit(mean, spread, len(tail))
    return NumericLimit(None, spread, len(tail))


def probability_path(family: MeasureFamily, rule: EventRule, N: int) -> list[Number]:
    """``[rho_n(E_n) for n = 1..N]``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    events = [apply_rule(rule, n) for n in range(1, N + 1)] if rule.closed_form else rule_events(rule, N)
    return [measure_of_event(family(n), e) for n, e in zip(range(1, N + 1), events)]


# ---------------------------------------------------------------------------
# tightness


@dataclass(frozen=True)
class Witness:
    b: Number
    n: int
    mass_outside: Number

    def to_dict(self) -> dict:
        return {"b": _num_out(self.b), "n": self.n, "mass_outside": _num_out(self.mass_outside)}


@dataclass(frozen=True)
class TightnessVerdict:
    tight: bool
    epsilon: float
    N: int
    b_max: Number
    interval: Optional[EventSet] = None
    sup_outside: Optional[Number] = None
    witness: tuple[Witness, ...] = ()

    @property
    def outcome(self) -> str:
        return "tight" if self.tight else "not_tight"

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "epsilon": self.epsilon,
            "scan_bounds": {"N": self.N, "b_max": _num_out(self.b_max)},
            "interval": None if self.interval is None else str(self.interval),
            "sup_outside": _num_out(self.sup_outside),
            "witness": [w.to_dict() for w in self.witness],
        }


def tightness_check(family: MeasureFamily, epsilon: float, N: int = 200, b_max=None) -> TightnessVerdict:
    """Scan windows ``[-b, b]`` for ``b <= b_max`` across ``n <= N``.

    Returns ``tight`` with the hull of the atoms kept by the smallest window
    whose complement carries less than ``epsilon`` for every scanned ``n``.
    Otherwise ``not_tight``, with one witness per scanned window: the first
    ``n`` putting mass ``>= epsilon`` outside it.

    ``b_max`` defaults to ``N // 2`` so that windows stay well inside the
    scanned range and mass drifting outward still has room to show itself.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if b_max is None:
        b_max = max(1, N // 2)
    b_max_x = ExtendedReal.of(b_max)
    measures = family.measures(N)
    points = set()
    for m in measures:
        points.update(p for p, _ in m.restricted(-b_max_x, b_max_x))
    radii = {abs(p.value) for p in points}
    radii.add(Fraction(0) if family.mode == EXACT else 0.0)
    candidates = sorted(radii)

    witnesses = []
    for b in candidates:
        hi = ExtendedReal.of(b)
        lo = -hi
        worst, hit = None, None
        for i, m in enumerate(measures, start=1):
            v = m.mass_off(lo, hi)
            if v >= epsilon:
                hit = Witness(b, i, v)
                break
            worst = v if worst is None or v > worst else worst
        if hit is None:
            kept = [p for m in measures for p, _ in m.restricted(-b, b)]
            hull = interval(min(kept), max(kept), "[]") if kept else singleton(0)
            return TightnessVerdict(True, epsilon, N, b_max, hull, worst)
        witnesses.append(hit)
    return TightnessVerdict(False, epsilon, N, b_max, None, None, tuple(witnesses))


# ---------------------------------------------------------------------------
# escaped mass


@dataclass(frozen=True)
class EscapeAccount:
    mass_to_plus_inf: Optional[float]
    mass_to_minus_inf: Optional[float]
    retained: tuple[tuple[ExtendedReal, Number], ...]
    ladder: tuple[dict, ...] = ()

    @property
    def converged(self) -> bool:
        return self.mass_to_plus_inf is not None and self.mass_to_minus_inf is not None

    @property
    def retained_mass(self) -> float:
        return math.fsum(float(m) for _, m in self.retained)

    @property
    def total_escaped(self) -> Optional[float]:
        if not self.converged:
            return None
        return self.mass_to_plus_inf + self.mass_to_minus_inf

    def to_dict(self) -> dict:
        return {
            "mass_to_plus_inf": self.mass_to_plus_inf,
            "mass_to_minus_inf": self.mass_to_minus_inf,
            "status": "limit" if self.converged else "no_limit",
            "retained": [{"point": str(p), "mass": _num_out(m)} for p, m in self.retained],
            "ladder": list(self.ladder),
        }


DEFAULT_LADDER = tuple((b + 400, b) for b in (8, 16, 32, 64))


def escaped_mass(
    family: MeasureFamily,
    schedule: Sequence[tuple[int, Number]] = DEFAULT_LADDER,
    tol: float = DEFAULT_TOL,
    window: int = DEFAULT_WINDOW,
) -> EscapeAccount:
    """Estimate the mass that drifts to ``+inf`` and ``-inf``.

    Each rung ``(N_i, b_i)`` takes the large-``n`` value of the mass above
    ``b_i`` (and below ``-b_i``), read off the terms ``n <= N_i`` of the
    tail window. The rung values are then followed as ``b`` grows. Either
    stage failing to settle leaves that side as ``None`` (no limit).
    ``retained`` is the last rung's measure restricted to ``[-b, b]``.
    """
    schedule = [(int(N), b) for N, b in schedule]
    if not schedule:
        raise ValueError("escape schedule is empty")
    for (n0, b0), (n1, b1) in zip(schedule, schedule[1:]):
        if not (n1 >= n0 and b1 > b0):
            raise ValueError("escape schedule must increase")
    ups, downs, rows = [], [], []
    last = None
    for N_i, b_i in schedule:
        ms = family.measures(N_i, start=N_i - window + 1)
        up = numeric_limit([m.mass_above(b_i) for m in ms], tol, window)
        down = numeric_limit([m.mass_below(-ExtendedReal.of(b_i)) for m in ms], tol, window)
        ups.append(up)
        downs.append(down)
        rows.append({"N": N_i, "b": _num_out(b_i), "above": _num_out(up.value), "below": _num_out(down.value)})
        last = (ms[-1], b_i)

    outer = max(2, len(schedule) // 2)

    def settle(side):
        if not all(x.converged for x in side):
            return None
        lim = numeric_limit([x.value for x in side], tol, outer)
        return _f(lim.value)

    m_last, b_last = last
    return EscapeAccount(settle(ups), settle(downs), m_last.restricted(-b_last, b_last), tuple(rows))


# ---------------------------------------------------------------------------
# weak limits


@dataclass(frozen=True)
class WeakLimitVerdict:
    outcome: str  # confirmed / refuted / inconclusive
    max_discrepancy: float
    probes: int
    witness: Optional[dict] = None

    @property
    def confirmed(self) -> bool:
        return self.outcome == "confirmed"

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "max_discrepancy": self.max_discrepancy,
            "probes": self.probes,
            "witness": self.witness,
        }


def _as_exact_or_float(x, exact: bool):
    return Fraction(x) if exact else float(x)


def _probe_grid(candidate: DiscreteMeasure, measures: Sequence[DiscreteMeasure], N: int) -> list:
    """Continuity points at which CDFs are compared.

    Probes sit a guard distance ``g = 1/(isqrt(N)+1)`` either side of every
    finite candidate atom, at midpoints between the remaining atoms inside
    ``[-R, R]`` with ``R = isqrt(N)``, and at margins beyond them. Atoms of
    ``rho_n`` within ``g`` of a candidate atom are treated as converging onto
    it, and nothing beyond ``R`` counts as a fixed location.
    """
    exact = candidate.mode == EXACT and all(m.mode == EXACT for m in measures)
    R = isqrt(N)
    g = Fraction(1, R + 1)
    anchors = sorted({Fraction(p.value) for p in candidate.finite_points})
    for a, b in zip(anchors, anchors[1:]):
        g = min(g, (b - a) / 4)

    def near_anchor(x):
        return any(abs(x - a) < g for a in anchors)

    pts = set(anchors)
    for m in measures:
        for p in m.finite_points:
            x = Fraction(p.value)
            if -R <= x <= R and not near_anchor(x):
                pts.add(x)
    pts = sorted(pts)
    probes = set()
    for a in anchors:
        probes.update((a - g, a + g))
    for x, y in zip(pts, pts[1:]):
        mid = (x + y) / 2
        if not near_anchor(mid):
            probes.add(mid)
    lo = min([-R] + pts) - 1
    hi = max([R] + pts) + 1
    probes.update((lo, hi))
    for edge in (-R, R):
        if not near_anchor(Fraction(edge)) and Fraction(edge) not in pts:
            probes.add(Fraction(edge))
    return [_as_exact_or_float(x, exact) for x in sorted(probes)]


def verify_weak_limit(
    family: MeasureFamily,
    candidate: DiscreteMeasure,
    N: int = 200,
    tol: float = DEFAULT_TOL,
    window: int = DEFAULT_WINDOW,
) -> WeakLimitVerdict:
    """Check ``F_n(x) -> F(x)`` at continuity points of the candidate.

    The comparison runs over the last ``window`` indices up to ``N``. Mass
    leaving every bounded window shows up at the outer probes, so this also
    covers tightness when the candidate lives on the real line; a candidate
    with atoms at infinity is judged as a limit on the extended line.

    A probe whose discrepancy exceeds ``tol`` but shrinks steadily across the
    window gives ``inconclusive``; any failing probe that does not shrink
    gives ``refuted``.
    """
    start = max(1, N - window + 1)
    measures = family.measures(N, start=start)
    probes = _probe_grid(candidate, measures, N)
    worst, worst_probe, failing_static = 0.0, None, None
    any_fail = False
    for x in probes:
        target = candidate.cdf(x)
        gaps = [abs(m.cdf(x) - target) for m in measures]
        top = float(max(gaps))
        if top > worst:
            worst, worst_probe = top, x
        if top > tol:
            any_fail = True
            shrinking = all(b <= a for a, b in zip(gaps, gaps[1:])) and gaps[-1] < gaps[0]
            if not shrinking and failing_static is None:
                n_bad = start + max(range(len(gaps)), key=lambda i: gaps[i])
                failing_static = {
                    "probe": _num_out(x),
                    "n": n_bad,
                    "F_n": _num_out(measures[n_bad - start].cdf(x)),
                    "F": _num_out(target),
                }
    if not any_fail:
        return WeakLimitVerdict("confirmed", worst, len(probes))
    if failing_static is not None:
        return WeakLimitVerdict("refuted", worst, len(probes), failing_static)
    return WeakLimitVerdict("inconclusive", worst, len(probes), {"probe": _num_out(worst_probe)})


def _extended_ladder(N: int) -> list[tuple[int, int]]:
    bs = sorted({max(1, N // 8), max(1, N // 4), max(1, N // 2)})
    return [(N, b) for b in bs]


def extended_limit(
    family: MeasureFamily, N: int = 200, tol: float = DEFAULT_TOL, window: int = DEFAULT_WINDOW
) -> Optional[DiscreteMeasure]:
    """Weak limit on the extended line, escaped mass placed at ``+inf``/``-inf``.

    The candidate is assembled from the escape account and from pointwise
    limits of the atom masses; if that does not verify, the family's declared
    extended-line limit is tried. Returns ``None`` when nothing verifies.
    """
    account = escaped_mass(family, _extended_ladder(N), tol, window)
    if not account.converged:
        return None
    up, down = account.mass_to_plus_inf, account.mass_to_minus_inf
    exact = family.mode == EXACT

    candidates = []
    if 1 - up - down <= tol:
        candidates.append(_infinite_candidate(up, down, exact))
    else:
        pointwise = _pointwise_candidate(family, N, tol, window, up, down)
        if pointwise is not None:
            candidates.append(pointwise)
    if family.declared_limit_on_Rbar is not None:
        candidates.append(family.declared_limit_on_Rbar)
    for cand in candidates:
        if verify_weak_limit(family, cand, N, tol, window).confirmed:
            return cand
    return None


def _infinite_candidate(up: float, down: float, exact: bool) -> DiscreteMeasure:
    if down <= 0:
        return DiscreteMeasure([(PLUS_INF, 1)], mode=EXACT if exact else FLOAT)
    if up <= 0:
        return DiscreteMeasure([(MINUS_INF, 1)], mode=EXACT if exact else FLOAT)
    total = up + down
    return DiscreteMeasure([(PLUS_INF, up / total), (MINUS_INF, down / total)], mode=FLOAT)


def _pointwise_candidate(family, N, tol, window, up, down) -> Optional[DiscreteMeasure]:
    start = max(1, N - window + 1)
    measures = family.measures(N, start=start)
    R = isqrt(N)
    support = sorted({p for m in measures for p in m.finite_points if -R <= p.value <= R})
    atoms = []
    for x in support:
        lim = numeric_limit([m.mass_at(x) for m in measures], tol, window)
        if not lim.converged:
            return None
        if lim.value > tol:
            atoms.append((x, lim.value))
    for point, mass in ((PLUS_INF, up), (MINUS_INF, down)):
        if mass > tol:
            atoms.append((point, mass))
    if not atoms:
        return None
    floaty = any(isinstance(m, float) for _, m in atoms)
    if floaty:
        atoms = [(p, float(m)) for p, m in atoms]
        total = math.fsum(m for _, m in atoms)
    else:
        total = sum(m for _, m in atoms)
    if abs(float(total) - 1) > tol * (len(atoms) + 1):
        return None
    return DiscreteMeasure([(p, m / total) for p, m in atoms], mode=FLOAT if floaty else EXACT)


# ---------------------------------------------------------------------------
# coincidence of the two limits


class Classification(str, enum.Enum):
    COINCIDES = "coincides"
    MISMATCH = "mismatch"
    LIMIT_NOT_A_PROBABILITY = "limit_not_a_probability"
    NO_NUMERIC_LIMIT = "no_numeric_limit"


@dataclass(frozen=True)
class CoincidenceReport:
    family: str
    rule: str
    numeric_limit: Optional[Number]
    limit_measure_R: Optional[DiscreteMeasure]
    limit_measure_Rbar: Optional[DiscreteMeasure]
    limit_event: object
    classification: Classification
    measure_side_R: Optional[Number]
    measure_side_Rbar: Optional[Number]
    path_tail: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "rule": self.rule,
            "classification": self.classification.value,
            "numeric_limit": _f(self.numeric_limit),
            "measure_side_R": _num_out(self.measure_side_R),
            "measure_side_Rbar": _num_out(self.measure_side_Rbar),
            "limit_event": self.limit_event.to_dict(),
            "limit_measure_R": None if self.limit_measure_R is None else self.limit_measure_R.to_dict(),
            "limit_measure_Rbar": None if self.limit_measure_Rbar is None else self.limit_measure_Rbar.to_dict(),
            "path_tail": [_num_out(x) for x in self.path_tail],
        }


def verified_limit_on_R(family: MeasureFamily, N: int, tol: float) -> Optional[DiscreteMeasure]:
    cand = family.declared_limit_on_R
    if cand is None or not cand.is_on_real_line:
        return None
    return cand if verify_weak_limit(family, cand, N, tol).confirmed else None


def coincidence_report(family: MeasureFamily, rule: EventRule, N: int = 200, tol: float = DEFAULT_TOL) -> CoincidenceReport:
    """Compare ``lim_n rho_n(E_n)`` with ``[lim rho_n](E)``.

    ``coincides`` needs a numeric limit, a verified limit measure on the
    real line, a limit event in the real line, and agreement within ``tol``.
    Without the limit measure or with a limit event outside the real line
    the numeric limit is ``limit_not_a_probability``.
    """
    path = probability_path(family, rule, N)
    lim = numeric_limit(path, tol)
    lim_event = rule.declared_limit
    on_r = verified_limit_on_R(family, N, tol)
    on_rbar = extended_limit(family, N, tol)
    side_r = None
    if on_r is not None and lim_event.kind is LimitKind.IN_R:
        side_r = measure_of_event(on_r, lim_event.event)
    side_rbar = None
    if on_rbar is not None and lim_event.event is not None:
        side_rbar = measure_of_event(on_rbar, lim_event.event)

    if not lim.converged:
        cls = Classification.NO_NUMERIC_LIMIT
    elif side_r is None:
        cls = Classification.LIMIT_NOT_A_PROBABILITY
    elif abs(float(lim.value) - float(side_r)) <= tol:
        cls = Classification.COINCIDES
    else:
        cls = Classification.MISMATCH
    return CoincidenceReport(
        family.name, rule.name, lim.value, on_r, on_rbar, lim_event, cls, side_r, side_rbar, tuple(path[-5:])
    )


# ---------------------------------------------------------------------------
# the trial-failure identity, both sides side by side


@dataclass(frozen=True)
class InconsistencyReport:
    q: Fraction
    N: int
    rows: tuple[dict, ...]
    max_abs_residual: Number
    numeric_limit_left: Optional[Number]
    numeric_limit_right: Optional[Number]
    condition_a_limit: Optional[Number]
    condition_b: Classification
    right_side: Classification
    extended_left: Optional[Number]
    extended_right: Optional[Number]

    def to_dict(self) -> dict:
        return {
            "q": str(self.q),
            "N": self.N,
            "rows": list(self.rows),
            "max_abs_residual": _num_out(self.max_abs_residual),
            "numeric_limits": {"left": _f(self.numeric_limit_left), "right": _f(self.numeric_limit_right)},
            "condition_a_gap_limit": _f(self.condition_a_limit),
            "condition_b_classification": self.condition_b.value,
            "right_side_classification": self.right_side.value,
            "extended_pair": {"left": _num_out(self.extended_left), "right": _num_out(self.extended_right)},
        }


def inconsistency_demo(q, N: int = 200, tol: float = DEFAULT_TOL, limit_N: Optional[int] = None) -> InconsistencyReport:
    """Tabulate ``lambda_n({0}) - gamma_n({0}) = mu_n((-inf, n))`` and its limits.

    Rows ``n = 1..N`` compute both sides exactly from their own families; the
    residual is expected to be exactly zero. The limit quantities (numeric
    limits of both sides, the classification of the right-hand limit, the
    two extended-line limit probabilities) are taken over ``n <= limit_N``,
    by default ``max(N, 200)`` so the tail window has settled at ``tol``.
    The extended-line pair is reported next to each other, never equated.
    """
    q = _check_q(q)
    if limit_N is None:
        limit_N = max(N, 200)
    lam_f, gam_f, mu_f = bernoulli_family(q), running_max_family(q), record_index_family(q)
    ray = ray_growth()
    rows, lefts, rights, gaps = [], [], [], []
    for n in range(1, max(N, limit_N) + 1):
        lam0 = lam_f(n).mass_at(0)
        gam0 = gam_f(n).mass_at(0)
        mu_ray = measure_of_event(mu_f(n), apply_rule(ray, n))
        left = lam0 - gam0
        if n <= N:
            rows.append(
                {
                    "n": n,
                    "lambda_n({0})": str(lam0),
                    "gamma_n({0})": str(gam0),
                    "left": str(left),
                    "mu_n((-inf,n))": str(mu_ray),
                    "residual": str(left - mu_ray),
                }
            )
        lefts.append(left)
        rights.append(mu_ray)
        gaps.append(abs(lam0 - mu_ray))
    max_res = max(abs(a - b) for a, b in zip(lefts[:N], rights[:N]))
    lim_left = numeric_limit(lefts[:limit_N], tol)
    lim_right = numeric_limit(rights[:limit_N], tol)
    lim_gap = numeric_limit(gaps[:limit_N], tol)
    cond_b = coincidence_report(lam_f, identity_rule(singleton(0)), limit_N, tol).classification
    right = coincidence_report(mu_f, ray, limit_N, tol).classification
    lam_bar = extended_limit(lam_f, limit_N, tol)
    mu_bar = extended_limit(mu_f, limit_N, tol)
    ext_left = None if lam_bar is None else lam_bar.mass_at(0)
    ext_right = None if mu_bar is None else measure_of_event(mu_bar, REAL_LINE)
    return InconsistencyReport(
        q, N, tuple(rows), max_res, lim_left.value, lim_right.value, lim_gap.value, cond_b, right, ext_left, ext_right
    )
