import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import QS
from limitlab.errors import CapacityError, ParameterError
from limitlab.families import bernoulli_marginal, record_index, running_max
from limitlab.oracle import (
    CSV_FIELDS,
    EmpiricalPmf,
    check_identity,
    check_partition,
    enumerate_exact,
    pmf_csv,
    pmf_rows,
    simulate,
    trial_strings,
)

HALF = Fraction(1, 2)


def test_enumeration_frozen_values():
    x, y, z = enumerate_exact(HALF, 3)
    assert [m for _, m in z.atoms] == [Fraction(1, 8), Fraction(1, 4), Fraction(5, 8)]
    assert [m for _, m in y.atoms] == [Fraction(1, 8), Fraction(7, 8)]
    assert [m for _, m in x.atoms] == [HALF, HALF]
    _, _, z1 = enumerate_exact(Fraction(3, 10), 1)
    assert z1.mass_at(1) == 1


def test_all_failures_counts_as_record_at_n():
    strings = {s.bits: s for s in trial_strings(HALF, 4)}
    assert strings[(0, 0, 0, 0)].record_index == 4
    assert strings[(1, 0, 1, 0)].record_index == 3
    assert strings[(0, 1, 0, 0)].record_index == 2


def test_string_probabilities_sum_to_one():
    q = Fraction(3, 10)
    strings = list(trial_strings(q, 8))
    assert len(strings) == 256
    assert sum(s.probability for s in strings) == 1
    assert all(s.probability > 0 for s in strings)


def test_enumeration_bound():
    with pytest.raises(CapacityError):
        enumerate_exact(HALF, 21)


@pytest.mark.parametrize("q", QS)
def test_oracle_equals_closed_forms(q):
    for n in range(1, 11):
        x, y, z = enumerate_exact(q, n)
        assert x == bernoulli_marginal(q, n)
        assert y == running_max(q, n)
        assert z == record_index(q, n)


def test_sharded_enumeration_is_identical():
    q = Fraction(3, 10)
    assert enumerate_exact(q, 9, workers=3) == enumerate_exact(q, 9)


@pytest.mark.parametrize("q", [Fraction(1, 10), HALF, Fraction(9, 10)])
def test_partition_holds_on_every_string(q):
    assert check_partition(q, 10) == 0


def test_identity_examples():
    assert check_identity(HALF, 3, "oracle") == 0
    assert check_identity(Fraction(3, 10), 5) == 0
    assert check_identity(Fraction(3, 10), 1) == 0
    assert check_identity(Fraction(3, 10), 400) == 0
    with pytest.raises(ParameterError):
        check_identity(HALF, 3, "guess")


def test_simulation_is_reproducible():
    a = simulate(HALF, 3, 20_000, seed=7)
    b = simulate(HALF, 3, 20_000, seed=7)
    assert a == b
    assert simulate(HALF, 3, 20_000, seed=8) != a
    c = simulate(HALF, 3, 20_000, seed=7, workers=2)
    assert c == simulate(HALF, 3, 20_000, seed=7, workers=2)


def test_single_trial_gives_indicators():
    sim = simulate(HALF, 3, 1, seed=3)
    for pmf in sim:
        assert sorted(pmf.frequencies.values()) == [1.0]


def test_simulation_counts_add_up():
    sim = simulate(Fraction(3, 10), 6, 12_345, seed=1, workers=4)
    for pmf in sim:
        assert sum(pmf.counts.values()) == 12_345
    with pytest.raises(ValueError):
        EmpiricalPmf({0: 1}, 2, 0)
    with pytest.raises(ParameterError):
        simulate(HALF, 3, 0)


def test_simulation_error_shrinks_like_inverse_sqrt():
    exact = record_index(HALF, 3)
    errors = []
    for trials in (10**3, 10**4, 10**5, 10**6):
        z = simulate(HALF, 3, trials, seed=2024).z
        errors.append(max(abs(z.frequency(k) - float(exact.mass_at(k))) for k in (1, 2, 3)))
        # five standard deviations of the widest cell
        assert errors[-1] < 5 * math.sqrt(0.25 / trials)
    assert errors[-1] < errors[0]


def test_csv_table():
    x, y, z = enumerate_exact(HALF, 3)
    sim = simulate(HALF, 3, 1000, seed=5)
    text = pmf_csv(pmf_rows(z, record_index(HALF, 3), sim.z))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert lines[1].startswith("1,1/8,1/8,")
    assert len(lines) == 4


@given(st.fractions(min_value=Fraction(1, 50), max_value=Fraction(49, 50), max_denominator=50), st.integers(1, 7))
def test_oracle_matches_closed_forms_for_random_q(q, n):
    assert enumerate_exact(q, n).z == record_index(q, n)
