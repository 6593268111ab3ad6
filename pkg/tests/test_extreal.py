import json
import math
import pickle
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from limitlab.events import interval, parse_event, ray_below, singleton
from limitlab.extreal import (
    EXACT,
    FLOAT,
    MINUS_INF,
    PLUS_INF,
    DiscreteMeasure,
    ExtendedReal,
    as_rational,
    dirac,
    measure_of_event,
    tv_distance,
)
from limitlab.families import record_index


# --- points -----------------------------------------------------------------


def test_parse_infinities():
    for text in ("+inf", "inf", "oo", "∞"):
        assert ExtendedReal.of(text) == PLUS_INF
    assert ExtendedReal.of("-inf") == MINUS_INF
    assert ExtendedReal.of("3/4").value == Fraction(3, 4)


def test_ordering_spans_the_extended_line():
    pts = [PLUS_INF, ExtendedReal.of(2), MINUS_INF, ExtendedReal.of(Fraction(-1, 3))]
    assert sorted(pts) == [MINUS_INF, ExtendedReal.of(Fraction(-1, 3)), ExtendedReal.of(2), PLUS_INF]


def test_finite_equality_is_exact():
    # the double nearest 0.1 is not the rational 1/10
    assert ExtendedReal.of(Fraction(1, 10)) != ExtendedReal.of(Fraction(0.1))
    assert ExtendedReal.of(3) == ExtendedReal.of(Fraction(3))


def test_infinite_arithmetic():
    assert -PLUS_INF == MINUS_INF
    assert PLUS_INF + 5 == PLUS_INF
    assert str(PLUS_INF) == "+inf"


def test_as_rational_reads_decimals_exactly():
    assert as_rational(0.3) == Fraction(3, 10)
    assert as_rational("0.3") == Fraction(3, 10)
    assert as_rational("7/10") == Fraction(7, 10)


def test_points_pickle():
    assert pickle.loads(pickle.dumps(PLUS_INF)) == PLUS_INF


# --- measures ---------------------------------------------------------------


def test_dirac_examples():
    assert dirac(3).atoms == ((ExtendedReal.of(3), 1),)
    assert dirac(0).mass_at(0) == 1
    assert dirac(PLUS_INF).mass_at_infinity == 1
    assert not dirac(PLUS_INF).is_on_real_line


def test_atoms_sorted_merged_and_zero_dropped():
    m = DiscreteMeasure([(2, Fraction(1, 4)), (0, Fraction(1, 2)), (2, Fraction(1, 4)), (5, 0)])
    assert m.atoms == ((ExtendedReal.of(0), Fraction(1, 2)), (ExtendedReal.of(2), Fraction(1, 2)))


def test_mass_must_sum_to_one():
    with pytest.raises(ValueError):
        DiscreteMeasure({0: Fraction(1, 2), 1: Fraction(1, 3)})
    with pytest.raises(ValueError):
        DiscreteMeasure({0: Fraction(3, 2), 1: Fraction(-1, 2)})
    with pytest.raises(ValueError):
        DiscreteMeasure({0: 0.5, 1: 0.5 + 1e-9}, mode=FLOAT)
    DiscreteMeasure({0: 0.5, 1: 0.5 + 1e-13}, mode=FLOAT)


def test_measure_of_event_examples():
    # P(Z_3 < 3) with q = 1/2, by listing the eight strings: 1/8 + 1/4
    assert measure_of_event(record_index(Fraction(1, 2), 3), ray_below(3)) == Fraction(3, 8)
    assert measure_of_event(dirac(Fraction(1, 3)), parse_event("(-inf,0]")) == 0
    assert measure_of_event(dirac(PLUS_INF), parse_event("R")) == 0
    assert measure_of_event(dirac(PLUS_INF), parse_event("Rbar")) == 1


def test_cdf_and_tails():
    m = DiscreteMeasure({MINUS_INF: Fraction(1, 8), 0: Fraction(1, 8), 1: Fraction(1, 4), PLUS_INF: Fraction(1, 2)})
    assert m.cdf(0) == Fraction(1, 4)
    assert m.mass_below(0) == Fraction(1, 8)
    assert m.mass_above(0) == Fraction(3, 4)
    assert m.mass_outside(Fraction(1, 2)) == Fraction(7, 8)
    assert m.mass_outside(1) == Fraction(5, 8)
    assert m.mass_at_infinity == Fraction(5, 8)


def test_json_roundtrip_both_modes():
    m = record_index(Fraction(3, 10), 6)
    assert DiscreteMeasure.from_json(m.to_json()) == m
    f = m.to_float()
    assert f.mode == FLOAT
    assert DiscreteMeasure.from_json(f.to_json()) == f
    assert json.loads(m.to_json())["mode"] == EXACT


def test_tv_distance_examples():
    a = DiscreteMeasure({0: Fraction(1, 2), 1: Fraction(1, 2)})
    assert tv_distance(a, a) == 0
    assert tv_distance(dirac(0), dirac(1)) == 1
    assert tv_distance(a, dirac(0)) == Fraction(1, 2)
    assert math.isclose(tv_distance(a.to_float(), dirac(0)), 0.5)


# --- properties -------------------------------------------------------------

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)
weights = st.integers(min_value=1, max_value=30)


@st.composite
def exact_measures(draw, with_infinity=True):
    pts = draw(st.lists(rationals, min_size=1, max_size=8, unique=True))
    if with_infinity and draw(st.booleans()):
        pts.append(PLUS_INF)
    if with_infinity and draw(st.booleans()):
        pts.append(MINUS_INF)
    w = [draw(weights) for _ in pts]
    total = sum(w)
    return DiscreteMeasure({p: Fraction(x, total) for p, x in zip(pts, w)})


@st.composite
def events(draw):
    out = []
    for _ in range(draw(st.integers(0, 3))):
        a, b = sorted([draw(rationals), draw(rationals)])
        if draw(st.booleans()):
            a = MINUS_INF if draw(st.booleans()) else a
        out.append(interval(a, b, draw(st.sampled_from(["[]", "[)", "(]", "()"]))))
    if draw(st.booleans()):
        out.append(singleton(draw(rationals)))
    e = parse_event("empty")
    for x in out:
        e = e | x
    return e


@given(exact_measures())
def test_mass_is_conserved(m):
    assert sum(m.masses) == 1
    assert all(x > 0 for x in m.masses)
    assert measure_of_event(m, parse_event("Rbar")) == 1


@given(exact_measures(), events(), events())
def test_finite_additivity(m, a, b):
    b = b.difference(a)
    assert measure_of_event(m, a | b) == measure_of_event(m, a) + measure_of_event(m, b)


@given(exact_measures(), events())
def test_complement_in_extended_line(m, e):
    assert measure_of_event(m, e) + measure_of_event(m, e.complement("Rbar")) == 1


@given(exact_measures(), exact_measures())
def test_tv_is_a_metric_bounded_by_one(a, b):
    d = tv_distance(a, b)
    assert 0 <= d <= 1
    assert d == tv_distance(b, a)
    assert (d == 0) == (a == b)


@given(exact_measures(), rationals)
def test_cdf_splits(m, x):
    assert m.cdf(x) + m.mass_above(x) == 1
    assert m.mass_below(x) + m.mass_above(x, strict=False) == 1
