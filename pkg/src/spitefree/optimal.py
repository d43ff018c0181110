"""Revenue-optimal thresholds for symmetric uniform [0,1] values.

The seller lines the agents up and offers the item down the line at
per-agent take-it-or-leave-it prices.  Index 1 is the LAST agent in line
and index n the FIRST, so the price sequence is read back to front when
simulating.  The optimal prices follow the quadratic recursion

    t_1 = 1/2,    t_{i+1} = (1 + t_i^2) / 2,

and the expected revenue gamma_n follows

    gamma_1 = 1/4,    gamma_{n+1} = (1 - t_{n+1}) t_{n+1} + t_{n+1} gamma_n.

Exact rationals are used up to `EXACT_RECURSION_LIMIT` agents.  The cap is
not taste: den(t_n) = 2^(2^n - 1), so the exact representation doubles in
size with every agent; at n = 16 it spans 65 kilobits, at n = 20 a
megabit, and at n = 30 it would need gigabytes.  Beyond the cap
everything runs in mpmath binary floats at `PRECISION_BITS` bits.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

EXACT_RECURSION_LIMIT = 16
PRECISION_BITS = 200
GENERATOR_ID = "philox4x64 (numpy Philox)"

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ThresholdSequence:
    """Strictly increasing per-agent prices, last-in-line first.

    `values[i]` is the price quoted to the agent who is (i+1)-th from the
    END of the line; `in_line_order()` gives the order a simulation visits
    them.  `exact` records whether the entries are `Fraction`s or rounded
    mpmath floats.
    """

    n: int
    values: tuple
    exact: bool = True

    def __post_init__(self) -> None:
        if self.n < 1 or len(self.values) != self.n:
            raise ValueError("need one threshold per agent")
        if self.values[0] < 0.5:
            raise ValueError("first threshold must be at least 1/2")
        for a, b in itertools.pairwise(self.values):
            if not a < b:
                raise ValueError("thresholds must be strictly increasing")
        if not self.values[-1] < 1:
            raise ValueError("thresholds must stay below 1")

    def in_line_order(self) -> tuple:
        return tuple(reversed(self.values))


@lru_cache(maxsize=None)
def _threshold_values(n: int, exact: bool) -> tuple:
    if exact:
        values = [_HALF]
        for _ in range(n - 1):
            t = values[-1]
            values.append((1 + t * t) / 2)
        return tuple(values)
    with mpmath.workprec(PRECISION_BITS):
        t = mpmath.mpf(1) / 2
        values = [t]
        for _ in range(n - 1):
            t = (1 + t * t) / 2
            values.append(t)
        return tuple(values)


def optimal_thresholds_uniform(n: int) -> ThresholdSequence:
    """Prices maximizing expected revenue for n uniform [0,1] agents."""
    if n < 1:
        raise ValueError("need at least one agent")
    exact = n <= EXACT_RECURSION_LIMIT
    return ThresholdSequence(n=n, values=_threshold_values(n, exact), exact=exact)


def _gamma_step(t, acc):
    return (1 - t) * t + t * acc


def expected_revenue_recursive(n: int):
    """Expected revenue under the optimal prices, by the revenue recursion.

    Exact `Fraction` for n up to `EXACT_RECURSION_LIMIT`, an mpmath float
    at `PRECISION_BITS` bits beyond.
    """
    seq = optimal_thresholds_uniform(n)
    with mpmath.workprec(PRECISION_BITS):
        gamma = _gamma_step(seq.values[0], 0)
        for t in seq.values[1:]:
            gamma = _gamma_step(t, gamma)
    return gamma


def expected_revenue_closed(thresholds):
    """Expected revenue for an arbitrary price sequence in [0,1].

    Accepts a `ThresholdSequence` or any sequence of numbers in [0,1]
    (index 1 = last in line).  Evaluates the nested product-sum form by
    Horner's scheme, which is the same arithmetic the recursion performs,
    so for an optimal sequence the two agree exactly at any precision.
    """
    if isinstance(thresholds, ThresholdSequence):
        values = thresholds.values
    else:
        values = tuple(
            Fraction(t) if isinstance(t, int) else t for t in thresholds
        )
    if not values:
        raise ValueError("need at least one threshold")
    for t in values:
        if not 0 <= t <= 1:
            raise ValueError(f"threshold {t} outside [0, 1]")
    with mpmath.workprec(PRECISION_BITS):
        gamma = 0
        for t in values:
            gamma = _gamma_step(t, gamma)
    return gamma


@dataclass(frozen=True)
class RevenueEstimate:
    mean: float
    std_error: float
    samples: int
    seed: int
    generator: str = GENERATOR_ID

    def __post_init__(self) -> None:
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError("mean revenue must lie in [0, 1]")


_BATCH_ELEMENTS = 1 << 21


def monte_carlo_revenue(thresholds, samples: int, seed: int) -> RevenueEstimate:
    """Simulate the down-the-line sale on i.i.d. uniform values.

    Each draw walks the line front to back; the first agent whose value
    meets her price buys at that price, otherwise revenue is zero.  The
    counter-based Philox generator makes a fixed seed bitwise
    reproducible; the algorithm id is recorded on the estimate.
    """
    if isinstance(thresholds, ThresholdSequence):
        line = thresholds.in_line_order()
    else:
        line = tuple(reversed(tuple(thresholds)))
    if samples < 1:
        raise ValueError("need at least one sample")
    prices = np.array([float(t) for t in line], dtype=np.float64)
    n = len(prices)
    rng = np.random.Generator(np.random.Philox(key=seed))
    batch = max(1, _BATCH_ELEMENTS // n)
    chunks = []
    done = 0
    while done < samples:
        rows = min(batch, samples - done)
        draws = rng.random((rows, n))
        meets = draws >= prices
        first = meets.argmax(axis=1)
        chunks.append(np.where(meets.any(axis=1), prices[first], 0.0))
        done += rows
    revenue = np.concatenate(chunks)
    std_error = float(revenue.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return RevenueEstimate(
        mean=float(revenue.mean()), std_error=std_error, samples=samples, seed=seed
    )


@dataclass(frozen=True)
class AllocationProbe:
    n: int
    exact: Fraction
    estimate: float
    std_error: float


def efficiency_loss_probe(epsilon, n_list, samples: int, seed: int):
    """How often a flat price of 1 - epsilon sells, as the crowd grows.

    For each n the sale happens iff the maximum of n uniform values
    reaches 1 - epsilon, an event of exact probability 1 - (1-epsilon)^n;
    rows pair that closed form with a Monte-Carlo estimate.  The maximum
    is sampled in one draw per trial through its inverse CDF (a uniform
    u is below (1-epsilon)^n exactly when u^(1/n) misses the price).
    Pass epsilon as a Fraction or string to keep the closed form in
    decimal rationals; floats are taken at their exact binary value.
    """
    eps = Fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.Generator(np.random.Philox(key=seed))
    rows = []
    for n in n_list:
        if n < 1:
            raise ValueError("agent counts must be positive")
        exact = 1 - (1 - eps) ** n
        cutoff = float((1 - eps) ** n)
        hits = rng.random(samples) >= cutoff
        std_error = float(hits.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        rows.append(
            AllocationProbe(
                n=n, exact=exact, estimate=float(hits.mean()), std_error=std_error
            )
        )
    return tuple(rows)


def grid_search_revenue(n: int, step: Fraction = Fraction(1, 20)):
    """Best price sequence on a coarse grid, as a cross-check.

    Exhausts every sequence with entries in {0, step, 2*step, ..., 1} and
    returns (best_values, best_revenue).  The recursion's optimality is
    stated, not proved, for finite n; comparing its revenue against this
    brute-force bound is how the claim is spot-checked for small n.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    step = Fraction(step)
    if not 0 < step <= 1:
        raise ValueError("step must lie in (0, 1]")
    points = []
    k = 0
    while k * step <= 1:
        points.append(k * step)
        k += 1
    best_values = None
    best_revenue = None
    for values in itertools.product(points, repeat=n):
        gamma = 0
        for t in values:
            gamma = _gamma_step(t, gamma)
        if best_revenue is None or gamma > best_revenue:
            best_revenue = gamma
            best_values = values
    return best_values, best_revenue
