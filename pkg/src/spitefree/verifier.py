"""Exhaustive property checks over finite bid grids.

All checks quantify truthful value profiles and deviations over the grid, so
a pass certifies the property on that grid only; a fail is a genuine
counterexample.  Use `closure_for_thresholds` to build grids on which the
classic witnesses (bid exactly at a threshold, bid just above) exist.

Equilibrium clauses, for deviations of agent ``i`` at truthful profile ``v``:

* own-gain: the deviation strictly raises ``i``'s payoff (breaks IC),
* spite: the deviation keeps ``i``'s payoff equal and lowers someone else's,
  with nobody else gaining (breaks SIC beyond IC); the easy variant drops
  the nobody-else-gains condition (breaks ESIC).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import (
    DomainMismatchError,
    Grid,
    MechanismTable,
    Outcome,
    closure_for_thresholds,
    enumerate_profiles,
    utility,
    utility_vector,
)
from .mechanisms import recognize_threshold_form
from .reports import Property, PropertyReport, Witness


class BudgetExceededError(RuntimeError):
    """An enumeration was about to blow past its configured cap."""


class CharacterizationMismatchError(AssertionError):
    """A table broke the spite-proof/threshold-form coincidence."""

    def __init__(self, table: MechanismTable, sic: bool, spec) -> None:
        self.table = table
        self.sic = sic
        self.spec = spec
        from .core import render_profile
        from .money import render_money

        lines = [
            f"table is {'SIC' if sic else 'not SIC'} but "
            f"{'recognized as threshold form' if spec is not None else 'not threshold form'}:"
        ]
        for profile, out in table.rows:
            pays = ", ".join(render_money(p) for p in out.payments)
            lines.append(f"  {render_profile(profile)} -> winner={out.winner} pays=({pays})")
        super().__init__("\n".join(lines))


@lru_cache(maxsize=1024)
def _cached_tabulation(mechanism, grid: Grid):
    interned: dict[Outcome, Outcome] = {}
    outcomes = []
    for profile in enumerate_profiles(grid, mechanism.n):
        out = mechanism.outcome(profile)
        outcomes.append(interned.setdefault(out, out))
    return tuple(outcomes)


def _tabulation(mechanism, grid: Grid) -> tuple[Outcome, ...]:
    if isinstance(mechanism, MechanismTable):
        if mechanism.grid != grid:
            raise DomainMismatchError("tables can only be checked on their own grid")
        return mechanism.outcomes
    return _cached_tabulation(mechanism, grid)


def _own_utility(out: Outcome, agent: int, value: Fraction) -> Fraction:
    payment = out.payments[agent]
    return value - payment if out.winner == agent + 1 else -payment


def check_ir(mechanism, grid: Grid) -> PropertyReport:
    """Truthful bidding never yields a negative payoff."""
    outcomes = _tabulation(mechanism, grid)
    checked = 0
    for flat, profile in enumerate(enumerate_profiles(grid, mechanism.n)):
        out = outcomes[flat]
        for i in range(mechanism.n):
            checked += 1
            if _own_utility(out, i, profile[i]) < 0:
                witness = Witness(
                    profile=profile,
                    agent=i,
                    utilities_before=utility_vector(out, profile),
                    outcome_before=out,
                    note="truthful payoff is negative",
                )
                return PropertyReport(Property.IR, False, witness, checked)
    return PropertyReport(Property.IR, True, None, checked)


def check_ic(mechanism, grid: Grid) -> PropertyReport:
    return _deviation_check(mechanism, grid, Property.IC)


def check_sic(mechanism, grid: Grid) -> PropertyReport:
    return _deviation_check(mechanism, grid, Property.SIC)


def check_esic(mechanism, grid: Grid) -> PropertyReport:
    return _deviation_check(mechanism, grid, Property.ESIC)


def _deviation_check(mechanism, grid: Grid, prop: Property) -> PropertyReport:
    n = mechanism.n
    levels = grid.levels
    width = len(levels)
    outcomes = _tabulation(mechanism, grid)
    strides = [width ** (n - 1 - k) for k in range(n)]
    spiteful = prop is not Property.IC
    easy = prop is Property.ESIC
    checked = 0

    for flat, digits in enumerate(itertools.product(range(width), repeat=n)):
        out_v = outcomes[flat]
        values = tuple(levels[d] for d in digits)
        own_truth: list[Fraction | None] = [None] * n
        for i in range(n):
            stride = strides[i]
            vi = digits[i]
            for d in range(width):
                if d == vi:
                    continue
                checked += 1
                out_b = outcomes[flat + (d - vi) * stride]
                if out_b is out_v or out_b == out_v:
                    continue
                if own_truth[i] is None:
                    own_truth[i] = _own_utility(out_v, i, values[i])
                u_before = own_truth[i]
                u_after = _own_utility(out_b, i, values[i])
                clause = None
                if u_after > u_before:
                    clause = "deviation strictly raises the deviator's payoff"
                elif spiteful and u_after == u_before:
                    harmed = False
                    someone_gains = False
                    for j in range(n):
                        if j == i:
                            continue
                        uj_before = _own_utility(out_v, j, values[j])
                        uj_after = _own_utility(out_b, j, values[j])
                        if uj_after < uj_before:
                            harmed = True
                        elif uj_after > uj_before:
                            someone_gains = True
                            if not easy:
                                break
                    if harmed and (easy or not someone_gains):
                        clause = (
                            "payoff-neutral deviation strictly harms another agent"
                            if easy
                            else "payoff-neutral deviation harms some agent and helps none"
                        )
                if clause is not None:
                    deviated = values[:i] + (levels[d],) + values[i + 1 :]
                    witness = Witness(
                        profile=values,
                        deviation_profile=deviated,
                        agent=i,
                        deviation=levels[d],
                        utilities_before=utility_vector(out_v, values),
                        utilities_after=utility_vector(out_b, values),
                        outcome_before=out_v,
                        outcome_after=out_b,
                        note=clause,
                    )
                    return PropertyReport(prop, False, witness, checked)
    return PropertyReport(prop, True, None, checked)


def check_anonymous(mechanism, grid: Grid, profiles=None) -> PropertyReport:
    """Relabeling agents permutes the outcome; checked on every permutation.

    ``profiles`` restricts the evaluation points (e.g. to tie-free profiles,
    to separate essential asymmetry from tie-break asymmetry).
    """
    n = mechanism.n
    outcomes = _tabulation(mechanism, grid)
    levels = grid.levels
    width = len(levels)
    strides = [width ** (n - 1 - k) for k in range(n)]
    index_of = {level: k for k, level in enumerate(levels)}

    def flat_of(profile: tuple[Fraction, ...]) -> int:
        return sum(index_of[b] * strides[k] for k, b in enumerate(profile))

    if profiles is None:
        points = list(enumerate_profiles(grid, n))
    else:
        points = [tuple(p) for p in profiles]
        for p in points:
            if any(b not in index_of for b in p):
                raise DomainMismatchError(f"profile {p} is not on the grid")
    perms = [p for p in itertools.permutations(range(n)) if p != tuple(range(n))]
    checked = 0
    for profile in points:
        out = outcomes[flat_of(profile)]
        for perm in perms:
            checked += 1
            permuted = [None] * n
            for i in range(n):
                permuted[perm[i]] = profile[i]
            permuted = tuple(permuted)
            out_p = outcomes[flat_of(permuted)]
            expected_winner = perm[out.winner - 1] + 1 if out.winner else 0
            ok = out_p.winner == expected_winner and all(
                out_p.payments[perm[i]] == out.payments[i] for i in range(n)
            )
            if not ok:
                witness = Witness(
                    profile=profile,
                    deviation_profile=permuted,
                    permutation=perm,
                    outcome_before=out,
                    outcome_after=out_p,
                    note="outcome does not commute with the relabeling",
                )
                return PropertyReport(Property.ANON, False, witness, checked)
    return PropertyReport(Property.ANON, True, None, checked)


def check_efficient(mechanism, grid: Grid) -> PropertyReport:
    """Whenever the item is allocated, the winner is a highest bidder."""
    outcomes = _tabulation(mechanism, grid)
    checked = 0
    for flat, profile in enumerate(enumerate_profiles(grid, mechanism.n)):
        checked += 1
        out = outcomes[flat]
        w = out.winner_index()
        if w is None:
            continue
        top = max(profile)
        if profile[w] < top:
            witness = Witness(
                profile=profile,
                agent=w,
                outcome_before=out,
                note="winner is outbid by another agent",
            )
            return PropertyReport(Property.EFF, False, witness, checked)
    return PropertyReport(Property.EFF, True, None, checked)


def check_payment_structure(mechanism, grid: Grid) -> tuple[PropertyReport, PropertyReport, PropertyReport]:
    """Structural consequences of IR + IC on a grid, as three reports.

    Part 1: losing agents pay nothing.  Part 2: an agent's payment does not
    depend on her own bid while her win/lose status is unchanged.  Part 3:
    raising the winner's own bid keeps her winning.
    """
    n = mechanism.n
    levels = grid.levels
    width = len(levels)
    outcomes = _tabulation(mechanism, grid)
    strides = [width ** (n - 1 - k) for k in range(n)]

    part1_witness = None
    checked1 = 0
    for flat, profile in enumerate(enumerate_profiles(grid, n)):
        out = outcomes[flat]
        for i in range(n):
            checked1 += 1
            if out.winner != i + 1 and out.payments[i] != 0 and part1_witness is None:
                part1_witness = Witness(
                    profile=profile,
                    agent=i,
                    outcome_before=out,
                    note="losing agent is charged",
                )
    part1 = PropertyReport(Property.LOSER_PAYS_NOTHING, part1_witness is None, part1_witness, checked1)

    part2_witness = None
    part3_witness = None
    checked2 = 0
    checked3 = 0
    all_digits = list(itertools.product(range(width), repeat=n))
    for i in range(n):
        stride = strides[i]
        seen = set()
        for digits in all_digits:
            if digits[i] != 0:
                continue
            base_flat = sum(d * strides[k] for k, d in enumerate(digits))
            if base_flat in seen:
                continue
            seen.add(base_flat)
            column = []
            for d in range(width):
                flat = base_flat + d * stride
                out = outcomes[flat]
                wins = out.winner == i + 1
                column.append((d, wins, out))
            for (d1, w1, o1), (d2, w2, o2) in itertools.combinations(column, 2):
                checked2 += 1
                if w1 == w2 and o1.payments[i] != o2.payments[i] and part2_witness is None:
                    p1 = _profile_at(levels, digits, i, d1)
                    p2 = _profile_at(levels, digits, i, d2)
                    part2_witness = Witness(
                        profile=p1,
                        deviation_profile=p2,
                        agent=i,
                        deviation=levels[d2],
                        outcome_before=o1,
                        outcome_after=o2,
                        note="payment changed with own bid at fixed win/lose status",
                    )
            for d1, w1, o1 in column:
                if not w1:
                    continue
                for d2 in range(d1 + 1, width):
                    checked3 += 1
                    out_hi = column[d2][2]
                    if out_hi.winner != i + 1 and part3_witness is None:
                        p1 = _profile_at(levels, digits, i, d1)
                        p2 = _profile_at(levels, digits, i, d2)
                        part3_witness = Witness(
                            profile=p1,
                            deviation_profile=p2,
                            agent=i,
                            deviation=levels[d2],
                            outcome_before=o1,
                            outcome_after=out_hi,
                            note="raising the winning bid lost the item",
                        )
    part2 = PropertyReport(Property.PAYMENT_OWN_BID_INVARIANT, part2_witness is None, part2_witness, checked2)
    part3 = PropertyReport(Property.WIN_PRESERVED_BY_RAISE, part3_witness is None, part3_witness, checked3)
    return part1, part2, part3


def _profile_at(levels, digits, agent, level_index):
    values = list(levels[d] for d in digits)
    values[agent] = levels[level_index]
    return tuple(values)


def check_winner_payment_constant(mechanism, grid: Grid) -> PropertyReport:
    """Each agent pays one fixed price across all profiles where she wins."""
    n = mechanism.n
    outcomes = _tabulation(mechanism, grid)
    first_win: list[tuple[tuple[Fraction, ...], Outcome] | None] = [None] * n
    checked = 0
    for flat, profile in enumerate(enumerate_profiles(grid, n)):
        out = outcomes[flat]
        w = out.winner_index()
        if w is None:
            continue
        checked += 1
        if first_win[w] is None:
            first_win[w] = (profile, out)
        else:
            ref_profile, ref_out = first_win[w]
            if out.payments[w] != ref_out.payments[w]:
                witness = Witness(
                    profile=ref_profile,
                    deviation_profile=profile,
                    agent=w,
                    outcome_before=ref_out,
                    outcome_after=out,
                    note="winning price differs between two winning profiles",
                )
                return PropertyReport(Property.WINNER_PRICE_CONSTANT, False, witness, checked)
    return PropertyReport(Property.WINNER_PRICE_CONSTANT, True, None, checked)


def confirm_witness(mechanism, report: PropertyReport) -> bool:
    """Replay a failure report against the mechanism from scratch."""
    if report.passed or report.witness is None:
        return False
    w = report.witness
    out = mechanism.outcome(tuple(w.profile))
    prop = report.property
    if prop in (Property.IC, Property.SIC, Property.ESIC):
        if w.deviation_profile is None or w.agent is None:
            return False
        out_dev = mechanism.outcome(tuple(w.deviation_profile))
        values = tuple(w.profile)
        before = utility_vector(out, values)
        after = utility_vector(out_dev, values)
        if w.utilities_before is not None and tuple(w.utilities_before) != before:
            return False
        if w.utilities_after is not None and tuple(w.utilities_after) != after:
            return False
        i = w.agent
        if after[i] > before[i]:
            return True
        if prop is Property.IC:
            return False
        if after[i] != before[i]:
            return False
        others = [j for j in range(len(values)) if j != i]
        harmed = any(after[j] < before[j] for j in others)
        if prop is Property.ESIC:
            return harmed
        return harmed and all(after[j] <= before[j] for j in others)
    if prop is Property.IR:
        if w.agent is None:
            return False
        return utility(out, w.agent, w.profile[w.agent]) < 0
    if prop is Property.ANON:
        if w.permutation is None or w.deviation_profile is None:
            return False
        out_p = mechanism.outcome(tuple(w.deviation_profile))
        perm = w.permutation
        n = len(w.profile)
        expected_winner = perm[out.winner - 1] + 1 if out.winner else 0
        return out_p.winner != expected_winner or any(
            out_p.payments[perm[i]] != out.payments[i] for i in range(n)
        )
    if prop is Property.EFF:
        widx = out.winner_index()
        return widx is not None and out.payments is not None and w.profile[widx] < max(w.profile)
    if prop is Property.LOSER_PAYS_NOTHING:
        if w.agent is None:
            return False
        return out.winner != w.agent + 1 and out.payments[w.agent] != 0
    if prop in (Property.PAYMENT_OWN_BID_INVARIANT, Property.WINNER_PRICE_CONSTANT):
        if w.deviation_profile is None or w.agent is None:
            return False
        out2 = mechanism.outcome(tuple(w.deviation_profile))
        i = w.agent
        if prop is Property.WINNER_PRICE_CONSTANT:
            return (
                out.winner == i + 1
                and out2.winner == i + 1
                and out.payments[i] != out2.payments[i]
            )
        same_status = (out.winner == i + 1) == (out2.winner == i + 1)
        return same_status and out.payments[i] != out2.payments[i]
    if prop is Property.WIN_PRESERVED_BY_RAISE:
        if w.deviation_profile is None or w.agent is None:
            return False
        out2 = mechanism.outcome(tuple(w.deviation_profile))
        i = w.agent
        raised = w.deviation_profile[i] > w.profile[i]
        return raised and out.winner == i + 1 and out2.winner != i + 1
    return False


@dataclass(frozen=True)
class EnumerationSummary:
    grid: Grid
    n: int
    total_candidates: int
    ir_ic_count: int
    sic_count: int
    threshold_form_count: int
    anonymous_sic_count: int
    efficient_sic_count: int


def enumerate_ir_ic_mechanisms(
    grid: Grid, n: int, max_tables: int = 1_000_000, validate: bool = False
):
    """Yield every IR + IC mechanism table on the grid, in encoding order.

    A table is generated for each allocation function on ``grid^n`` that
    keeps every agent's winning region upward closed in her own bid; the
    payments are the induced ones (losers pay nothing, the winner pays the
    lowest grid bid that still wins against the same opponents).  Any other
    payment choice would break IC off the grid, so this family is exactly
    the IR + IC search space.  Raises `BudgetExceededError` after
    ``max_tables`` yields.
    """
    levels = grid.levels
    width = len(levels)
    total = width**n
    profiles = list(enumerate_profiles(grid, n))
    strides = [width ** (n - 1 - k) for k in range(n)]
    digit_list = list(itertools.product(range(width), repeat=n))
    pred = []
    for flat, digits in enumerate(digit_list):
        row = []
        for i in range(n):
            row.append(flat - strides[i] if digits[i] > 0 else -1)
        pred.append(row)

    codes = [0] * total
    zero = Fraction(0)
    outcome_cache: dict[tuple[int, Fraction], Outcome] = {}
    yielded = 0

    def build_table() -> MechanismTable:
        rows = []
        for flat in range(total):
            code = codes[flat]
            if code == 0:
                out = outcome_cache.setdefault((0, zero), Outcome(0, (zero,) * n))
            else:
                i = code - 1
                low = flat
                while pred[low][i] >= 0 and codes[pred[low][i]] == code:
                    low = pred[low][i]
                price = levels[digit_list[low][i]]
                out = outcome_cache.get((code, price))
                if out is None:
                    payments = [zero] * n
                    payments[i] = price
                    out = Outcome(code, tuple(payments))
                    outcome_cache[(code, price)] = out
            rows.append((profiles[flat], out))
        return MechanismTable(grid, n, tuple(rows))

    def walk(flat: int):
        nonlocal yielded
        if flat == total:
            if yielded >= max_tables:
                raise BudgetExceededError(
                    f"more than {max_tables} IR+IC tables on grid {grid.render()}"
                )
            yielded += 1
            table = build_table()
            if validate:
                assert check_ir(table, grid).passed, "enumerated table failed IR"
                assert check_ic(table, grid).passed, "enumerated table failed IC"
            yield table
            return
        forced = set()
        for i in range(n):
            p = pred[flat][i]
            if p >= 0 and codes[p] == i + 1:
                forced.add(i + 1)
        if len(forced) > 1:
            return
        options = sorted(forced) if forced else range(n + 1)
        for code in options:
            codes[flat] = code
            yield from walk(flat + 1)
        codes[flat] = 0

    yield from walk(0)


def characterization_experiment(
    grid: Grid, n: int, max_tables: int = 1_000_000
) -> EnumerationSummary:
    """Sweep every IR + IC table and test the threshold characterization.

    Asserts, table by table, that passing the spite-proofness check and
    being recognizable as a threshold mechanism coincide, raising
    `CharacterizationMismatchError` with the offending table otherwise.  For the
    spite-proof tables it also counts how many are anonymous and how many
    are efficient, judging the recognized threshold form on its closure
    grid so that the witness bids above the recognized thresholds exist.
    """
    ir_ic = 0
    sic_count = 0
    threshold_count = 0
    anonymous_count = 0
    efficient_count = 0
    for table in enumerate_ir_ic_mechanisms(grid, n, max_tables=max_tables):
        ir_ic += 1
        sic = check_sic(table, grid).passed
        spec = recognize_threshold_form(table)
        if sic != (spec is not None):
            raise CharacterizationMismatchError(table, sic, spec)
        if spec is not None:
            threshold_count += 1
        if sic:
            sic_count += 1
            closure = closure_for_thresholds(spec.thresholds, base=grid.levels)
            if check_anonymous(spec, closure).passed:
                anonymous_count += 1
            if check_efficient(spec, closure).passed:
                efficient_count += 1
    return EnumerationSummary(
        grid=grid,
        n=n,
        total_candidates=(n + 1) ** (len(grid) ** n),
        ir_ic_count=ir_ic,
        sic_count=sic_count,
        threshold_form_count=threshold_count,
        anonymous_sic_count=anonymous_count,
        efficient_sic_count=efficient_count,
    )
