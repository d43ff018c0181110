"""Revenue-side tests.

The pinned constants below come from direct runs of the exact recursion
(Fraction arithmetic, no rounding), so any regression in either the
closed form or the sampler shows up as a hard mismatch.
"""

from fractions import Fraction as F

import pytest

from spitefree.optimal import (
    EXACT_RECURSION_LIMIT,
    GENERATOR_ID,
    RevenueEstimate,
    ThresholdSequence,
    efficiency_loss_probe,
    expected_revenue_closed,
    expected_revenue_recursive,
    grid_search_revenue,
    monte_carlo_revenue,
    optimal_thresholds_uniform,
)

# pinned from exact-recursion runs
T50_FLOAT = 0.9641450748220074
GAMMA100_FLOAT = 0.9627700032350496


def test_exact_threshold_values():
    assert optimal_thresholds_uniform(1).values == (F(1, 2),)
    assert optimal_thresholds_uniform(2).values == (F(1, 2), F(5, 8))
    assert optimal_thresholds_uniform(3).values == (F(1, 2), F(5, 8), F(89, 128))


def test_exact_revenue_values():
    assert expected_revenue_recursive(1) == F(1, 4)
    assert expected_revenue_recursive(2) == F(25, 64)
    assert expected_revenue_recursive(3) == F(7921, 16384)


def test_threshold_recurrence_shape():
    # each threshold is the expected payoff of rejecting at the previous one
    seq = optimal_thresholds_uniform(6)
    for prev, nxt in zip(seq.values, seq.values[1:]):
        assert nxt == (1 + prev * prev) / 2


def test_line_order_reverses():
    seq = optimal_thresholds_uniform(3)
    assert seq.in_line_order() == (F(89, 128), F(5, 8), F(1, 2))


def test_closed_form_matches_recursion_exactly():
    for n in range(1, EXACT_RECURSION_LIMIT + 1):
        assert expected_revenue_closed(optimal_thresholds_uniform(n)) == (
            expected_revenue_recursive(n)
        )


def test_closed_and_recursive_agree_past_the_exact_cap():
    # both sides switch to 200-bit floats above the cap; the shared fold
    # keeps them bitwise identical there as well
    for n in (EXACT_RECURSION_LIMIT + 1, 30, 50):
        assert expected_revenue_closed(optimal_thresholds_uniform(n)) == (
            expected_revenue_recursive(n)
        )


def test_exactness_flag_switches_at_the_cap():
    assert optimal_thresholds_uniform(EXACT_RECURSION_LIMIT).exact
    assert not optimal_thresholds_uniform(EXACT_RECURSION_LIMIT + 1).exact


def test_denominators_double_in_bit_length():
    # den(t_k) = 2^(2^k - 1): the reason the exact path needs a cap
    for k in (2, 3, 4, 5):
        t = optimal_thresholds_uniform(k).values[-1]
        assert t.denominator == 2 ** (2**k - 1)


def test_long_run_bounds():
    t50 = optimal_thresholds_uniform(50).values[-1]
    assert float(t50) == pytest.approx(T50_FLOAT, abs=1e-12)
    assert t50 > 0.95
    gamma100 = expected_revenue_recursive(100)
    assert float(gamma100) == pytest.approx(GAMMA100_FLOAT, abs=1e-12)
    assert gamma100 > 0.9


def test_threshold_sequence_validation():
    with pytest.raises(ValueError):
        ThresholdSequence(2, (F(1, 4), F(1, 2)))
    with pytest.raises(ValueError):
        ThresholdSequence(2, (F(5, 8), F(1, 2)))
    with pytest.raises(ValueError):
        ThresholdSequence(2, (F(1, 2), F(1, 2)))
    with pytest.raises(ValueError):
        ThresholdSequence(2, (F(1, 2), F(9, 8)))


def test_closed_form_input_checking():
    assert expected_revenue_closed((F(1),)) == 0
    assert expected_revenue_closed((F(0),)) == 0
    with pytest.raises(ValueError):
        expected_revenue_closed(())
    with pytest.raises(ValueError):
        expected_revenue_closed((F(3, 2),))


# --- sampling --------------------------------------------------------------


def test_monte_carlo_is_deterministic_per_seed():
    seq = optimal_thresholds_uniform(2)
    a = monte_carlo_revenue(seq, 4096, 7)
    b = monte_carlo_revenue(seq, 4096, 7)
    assert a.mean == b.mean == 0.385894775390625  # pinned
    assert a.std_error == b.std_error
    assert a.generator == GENERATOR_ID
    c = monte_carlo_revenue(seq, 4096, 8)
    assert c.mean != a.mean


def test_monte_carlo_tracks_the_exact_value():
    exact = float(expected_revenue_recursive(2))
    hits = 0
    for seed in range(30):
        est = monte_carlo_revenue(optimal_thresholds_uniform(2), 20000, seed)
        if abs(est.mean - exact) <= 4 * est.std_error:
            hits += 1
    assert hits >= 29


def test_revenue_estimate_validation():
    with pytest.raises(ValueError):
        RevenueEstimate(mean=1.5, std_error=0.0, samples=1, seed=0, generator="x")
    with pytest.raises(ValueError):
        monte_carlo_revenue(optimal_thresholds_uniform(1), 0, 0)


# --- allocation probability probe ------------------------------------------


def test_probe_exact_values():
    probes = efficiency_loss_probe(F(1, 10), [1, 50], 5000, 11)
    assert probes[0].exact == F(1, 10)
    assert probes[1].exact == 1 - F(9, 10) ** 50
    assert float(probes[1].exact) == pytest.approx(0.9948462247926799, abs=1e-12)


def test_probe_exact_values_grow_with_agents():
    probes = efficiency_loss_probe(F(1, 5), [1, 2, 5, 20], 1000, 0)
    exacts = [p.exact for p in probes]
    assert exacts == sorted(exacts)
    assert all(0 < e < 1 for e in exacts)


def test_probe_estimates_stay_in_band():
    for probe in efficiency_loss_probe(F(1, 10), [1, 5, 50], 20000, 3):
        assert abs(probe.estimate - float(probe.exact)) <= 4 * probe.std_error


# --- lattice search --------------------------------------------------------


def test_grid_search_recovers_the_optimum_when_it_is_on_the_lattice():
    assert grid_search_revenue(1, F(1, 4)) == ((F(1, 2),), F(1, 4))
    assert grid_search_revenue(2, F(1, 8)) == ((F(1, 2), F(5, 8)), F(25, 64))


def test_grid_search_never_beats_the_recursion():
    for n, step in ((1, F(1, 7)), (2, F(1, 9)), (3, F(1, 6))):
        _, revenue = grid_search_revenue(n, step)
        assert revenue <= expected_revenue_recursive(n)
