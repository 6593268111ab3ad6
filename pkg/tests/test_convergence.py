from fractions import Fraction

import pytest

from limitlab.convergence import (
    Classification,
    coincidence_report,
    escaped_mass,
    extended_limit,
    inconsistency_demo,
    numeric_limit,
    probability_path,
    tightness_check,
    verify_weak_limit,
)
from limitlab.events import identity_rule, parse_event, ray_growth, singleton, singleton_shift
from limitlab.extreal import PLUS_INF, dirac, measure_of_event
from limitlab.families import (
    bernoulli_family,
    binomial_poisson_family,
    dirac_recip_family,
    dirac_walk_family,
    record_index_family,
    running_max_family,
)

HALF = Fraction(1, 2)


def test_numeric_limit_examples():
    q = Fraction(3, 10)
    assert numeric_limit([q - q**n for n in range(1, 200)]).value == pytest.approx(float(q), abs=1e-12)
    assert numeric_limit([1 - q + q**n for n in range(1, 200)]).value == pytest.approx(0.7, abs=1e-12)
    assert numeric_limit([Fraction(1)] * 30).value == 1
    assert not numeric_limit([(-1) ** n for n in range(100)]).converged
    with pytest.raises(ValueError):
        numeric_limit([])


def test_probability_paths():
    assert probability_path(dirac_walk_family(), singleton_shift(), 40) == [1] * 40
    assert probability_path(dirac_recip_family(), identity_rule(parse_event("(-inf,0]")), 40) == [0] * 40
    path = probability_path(record_index_family(HALF), ray_growth(), 10)
    assert path == [HALF - HALF**n for n in range(1, 11)]


def test_tightness_examples():
    for fam in (bernoulli_family(HALF), running_max_family(HALF)):
        v = tightness_check(fam, 0.1, 100)
        assert v.tight and str(v.interval) == "[0,1]"
    v = tightness_check(record_index_family(HALF), 0.5, 100)
    assert not v.tight
    assert v.witness and all(w.mass_outside >= 0.5 for w in v.witness)
    assert not tightness_check(dirac_walk_family(), 0.1, 100).tight
    v = tightness_check(dirac_recip_family(), 0.1, 100)
    assert v.tight and str(v.interval) == "[1/100,1]"


def test_tightness_witnesses_cover_every_window():
    v = tightness_check(record_index_family(HALF), 0.5, 60)
    assert [w.b for w in v.witness] == list(range(0, 31))
    for w in v.witness:
        assert w.n == w.b + 1


def test_tightness_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        tightness_check(bernoulli_family(HALF), 0, 10)


def test_escape_examples():
    acc = escaped_mass(record_index_family(HALF))
    assert acc.mass_to_plus_inf == pytest.approx(1, abs=1e-9)
    assert acc.mass_to_minus_inf == 0
    assert escaped_mass(dirac_walk_family()).mass_to_plus_inf == 1
    acc = escaped_mass(bernoulli_family(HALF))
    assert acc.total_escaped == 0 and acc.retained_mass == 1


def test_escape_schedule_must_increase():
    with pytest.raises(ValueError):
        escaped_mass(bernoulli_family(HALF), [(100, 8), (90, 16)])


def test_weak_limit_examples():
    assert verify_weak_limit(dirac_recip_family(), dirac(0)).outcome == "confirmed"
    assert verify_weak_limit(running_max_family(HALF), dirac(1)).outcome == "confirmed"
    assert verify_weak_limit(record_index_family(HALF), dirac(1)).outcome == "refuted"
    assert verify_weak_limit(dirac_walk_family(), dirac(0)).outcome == "refuted"
    assert verify_weak_limit(bernoulli_family(HALF), dirac(0)).outcome == "refuted"


def test_weak_limit_poisson_needs_loose_tolerance():
    fam = binomial_poisson_family(1)
    assert verify_weak_limit(fam, fam.declared_limit_on_R, N=400, tol=1e-2).outcome == "confirmed"


def test_extended_limits():
    assert extended_limit(record_index_family(HALF), 200) == dirac(PLUS_INF)
    assert extended_limit(dirac_walk_family(), 200) == dirac(PLUS_INF)
    assert extended_limit(dirac_recip_family(), 200) == dirac(0)
    assert extended_limit(running_max_family(HALF), 200) == dirac(1)
    lam = extended_limit(bernoulli_family(Fraction(3, 10)), 200)
    assert lam.mass_at(0) == Fraction(3, 10)


@pytest.mark.parametrize(
    "family, rule, outcome, value",
    [
        (dirac_walk_family(), singleton_shift(), Classification.LIMIT_NOT_A_PROBABILITY, 1),
        (dirac_recip_family(), identity_rule(parse_event("(-inf,0]")), Classification.MISMATCH, 0),
        (dirac_recip_family(), singleton_shift(), Classification.LIMIT_NOT_A_PROBABILITY, 0),
        (record_index_family(HALF), singleton_shift(), Classification.LIMIT_NOT_A_PROBABILITY, 0.5),
        (record_index_family(HALF), ray_growth(), Classification.LIMIT_NOT_A_PROBABILITY, 0.5),
        (bernoulli_family(HALF), identity_rule(singleton(0)), Classification.COINCIDES, 0.5),
        (running_max_family(HALF), identity_rule(singleton(1)), Classification.COINCIDES, 1),
    ],
)
def test_coincidence_outcomes(family, rule, outcome, value):
    rep = coincidence_report(family, rule)
    assert rep.classification is outcome
    assert float(rep.numeric_limit) == pytest.approx(value, abs=1e-9)


def test_mismatch_reports_both_sides():
    rep = coincidence_report(dirac_recip_family(), identity_rule(parse_event("(-inf,0]")))
    assert rep.measure_side_R == 1
    d = rep.to_dict()
    assert d["classification"] == "mismatch"
    assert d["measure_side_R"] == "1"


def test_record_index_extended_side_of_ray():
    rep = coincidence_report(record_index_family(Fraction(3, 10)), ray_growth())
    assert float(rep.numeric_limit) == pytest.approx(0.3, abs=1e-9)
    assert rep.measure_side_R is None
    assert rep.measure_side_Rbar == 0
    assert measure_of_event(rep.limit_measure_Rbar, parse_event("R")) == 0


def test_inconsistency_demo():
    rep = inconsistency_demo(HALF, 50)
    d = rep.to_dict()
    assert d["max_abs_residual"] == "0"
    assert len(d["rows"]) == 50
    assert all(r["residual"] == "0" for r in d["rows"])
    assert d["numeric_limits"]["left"] == pytest.approx(0.5, abs=1e-9)
    assert d["numeric_limits"]["right"] == pytest.approx(0.5, abs=1e-9)
    assert d["extended_pair"] == {"left": "1/2", "right": "0"}
    assert d["condition_b_classification"] == "coincides"
    assert d["right_side_classification"] == "limit_not_a_probability"
