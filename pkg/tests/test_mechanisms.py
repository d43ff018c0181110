import itertools
from fractions import Fraction as F

import pytest

from spitefree.core import Grid, MechanismTable, Outcome, enumerate_profiles
from spitefree.mechanisms import (
    BoundaryRule,
    FirstPriceMechanism,
    NullMechanism,
    SecondPriceMechanism,
    ThresholdSpec,
    null_spec,
    recognize_threshold_form,
    tabulate,
    threshold_outcome,
)
from spitefree.money import INFINITY


def spec12(rule=BoundaryRule.HIGHEST_RANK_AT_THRESHOLD):
    return ThresholdSpec((1, 2), (F(1), F(2)), rule)


def test_spec_validation():
    with pytest.raises(ValueError):
        ThresholdSpec((1, 1), (F(1), F(1)))
    with pytest.raises(ValueError):
        ThresholdSpec((), ())
    with pytest.raises(TypeError):
        ThresholdSpec((1, 2), (0.5, F(1)))


def test_priority_order():
    assert ThresholdSpec((2, 1), (F(0), F(0))).priority_order() == (1, 0)
    assert ThresholdSpec((2, 3, 1), (F(0),) * 3).priority_order() == (2, 0, 1)


def test_no_bid_meets_no_sale():
    assert threshold_outcome(spec12(), (F(0), F(0))) == Outcome(0, (F(0), F(0)))


def test_strict_exceeder_wins_at_threshold_price():
    assert threshold_outcome(spec12(), (F(2), F(0))) == Outcome(1, (F(1), F(0)))
    assert threshold_outcome(spec12(), (F(0), F(3))) == Outcome(2, (F(0), F(2)))


def test_priority_decides_between_meeting_agents():
    # both meet and somebody exceeds: highest priority among the meeters wins
    out = threshold_outcome(spec12(), (F(1), F(3)))
    assert out == Outcome(1, (F(1), F(0)))
    flipped = ThresholdSpec((2, 1), (F(1), F(2)))
    assert threshold_outcome(flipped, (F(1), F(3))) == Outcome(2, (F(0), F(2)))


def test_boundary_rule_when_nobody_strictly_exceeds():
    bids = (F(1), F(2))
    assert threshold_outcome(spec12(), bids) == Outcome(1, (F(1), F(0)))
    refusing = spec12(BoundaryRule.NO_ALLOCATION)
    assert threshold_outcome(refusing, bids) == Outcome(0, (F(0), F(0)))


def test_winner_always_pays_own_threshold():
    grid = Grid.from_text("0,1/2,1,3/2,2,5/2")
    for profile in enumerate_profiles(grid, 2):
        out = threshold_outcome(spec12(), profile)
        w = out.winner_index()
        if w is not None:
            assert out.payments[w] == spec12().thresholds[w]


def test_null_mechanism_and_null_spec_agree():
    grid = Grid.from_text("0,1,5")
    assert tabulate(NullMechanism(2), grid) == tabulate(null_spec(2), grid)
    assert null_spec(3).thresholds == (INFINITY, INFINITY, INFINITY)


def test_second_price_outcomes():
    sp = SecondPriceMechanism(3)
    assert sp.outcome((F(3), F(1), F(2))) == Outcome(1, (F(2), F(0), F(0)))
    # tie goes to the lowest index and the price equals the shared bid
    assert sp.outcome((F(2), F(2), F(0))) == Outcome(1, (F(2), F(0), F(0)))


def test_first_price_outcomes():
    fp = FirstPriceMechanism(2)
    assert fp.outcome((F(3), F(1))) == Outcome(1, (F(3), F(0)))
    assert fp.outcome((F(1), F(4))) == Outcome(2, (F(0), F(4)))


def test_benchmarks_need_two_agents():
    with pytest.raises(ValueError):
        SecondPriceMechanism(1)
    with pytest.raises(ValueError):
        FirstPriceMechanism(1)


def test_tabulate_matches_pointwise_evaluation():
    grid = Grid.from_text("0,1,2")
    spec = spec12()
    table = tabulate(spec, grid)
    for profile, outcome in table.rows:
        assert outcome == threshold_outcome(spec, profile)


# --- threshold-form recognition --------------------------------------------


def _closure_grid():
    return Grid.from_text("0,1/2,1,3/2,2,5/2")


def _explains_up_to_boundary(spec, table):
    """Independent restatement of the recognizer's contract: away from
    exact-tie profiles the spec must reproduce the table; at a tie the
    table may allocate to any meeting agent at her threshold, or refuse."""
    for profile, outcome in table.rows:
        meets = [j for j in range(spec.n) if profile[j] >= spec.thresholds[j]]
        if any(profile[j] > spec.thresholds[j] for j in meets):
            if outcome != threshold_outcome(spec, profile):
                return False
            continue
        w = outcome.winner_index()
        if w is None:
            if any(p != 0 for p in outcome.payments):
                return False
        else:
            if w not in meets:
                return False
            want = [F(0)] * spec.n
            want[w] = spec.thresholds[w]
            if list(outcome.payments) != want:
                return False
    return True


def test_recognition_round_trip_over_small_family():
    """Every spec with thresholds in {0,1,2,inf} tabulates to a table the
    recognizer explains; allocating specs round-trip to the exact table."""
    grid = _closure_grid()
    pool = (F(0), F(1), F(2), INFINITY)
    for thresholds in itertools.product(pool, repeat=2):
        for ranking in ((1, 2), (2, 1)):
            for rule in BoundaryRule:
                spec = ThresholdSpec(ranking, thresholds, rule)
                table = tabulate(spec, grid)
                recovered = recognize_threshold_form(table)
                assert recovered is not None
                assert _explains_up_to_boundary(recovered, table)
                if rule is BoundaryRule.HIGHEST_RANK_AT_THRESHOLD:
                    # no refusal anywhere, so the table pins the spec exactly
                    assert tabulate(recovered, grid) == table


def test_recognition_tolerates_mixed_boundary_behavior():
    # allocate at one exact-tie profile, refuse at another: still threshold form
    grid = Grid.from_text("0,1/2,1,3/2")
    base = tabulate(ThresholdSpec((1, 2), (F(1), F(1))), grid)
    rows = dict(base.rows)
    rows[(F(1), F(1))] = Outcome(0, (F(0), F(0)))
    mixed = MechanismTable.from_outcomes(grid, 2, rows)
    spec = recognize_threshold_form(mixed)
    assert spec is not None
    assert spec.thresholds == (F(1), F(1))
    # the boundary may also favor the lower-priority tied agent
    rows[(F(1), F(1))] = Outcome(2, (F(0), F(1)))
    alt = MechanismTable.from_outcomes(grid, 2, rows)
    assert recognize_threshold_form(alt) is not None


def test_recognition_rejects_price_benchmarks():
    grid = Grid.from_text("0,1,2")
    assert recognize_threshold_form(tabulate(SecondPriceMechanism(2), grid)) is None
    assert recognize_threshold_form(tabulate(FirstPriceMechanism(2), grid)) is None


def test_recognition_rejects_varying_winner_price():
    grid = Grid.from_text("0,1,2")
    base = tabulate(ThresholdSpec((1, 2), (F(1), F(1))), grid)
    rows = dict(base.rows)
    # charge a different price at one winning profile
    rows[(F(2), F(0))] = Outcome(1, (F(2), F(0)))
    broken = MechanismTable.from_outcomes(grid, 2, rows)
    assert recognize_threshold_form(broken) is None


def test_recognition_rejects_paying_losers():
    grid = Grid.from_text("0,1")
    rows = {
        p: Outcome(0, (F(0), F(1))) for p in enumerate_profiles(grid, 2)
    }
    table = MechanismTable.from_outcomes(grid, 2, rows)
    assert recognize_threshold_form(table) is None


def test_null_table_recognized_as_all_infinite():
    grid = Grid.from_text("0,1,2")
    spec = recognize_threshold_form(tabulate(NullMechanism(2), grid))
    assert spec is not None
    assert spec.thresholds == (INFINITY, INFINITY)
