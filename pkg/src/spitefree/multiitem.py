"""Multi-item sales: bundle bids, down-the-line allocation, price geometry.

Bundles are bitmasks over K items: bit k set means item a_(k+1) is in the
bundle, so mask 0b01 is {a1} and 0b10 is {a2}.  Two mechanism families are
covered.  A sequential mechanism hands out the items one at a time, each
going to the highest-priority agent whose reported marginal value for it
clears her per-item price.  A cluster mechanism lets each agent in
priority order take the whole remaining sub-bundle that maximizes reported
value minus her bundle price.  The checkers quantify over caller-supplied
finite bid domains; the geometry helpers carve value space into the
regions where each bundle is the buyer's best response.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .money import ExtMoney, Money, as_ext_money, as_money, is_infinite
from .reports import Property, PropertyReport, Witness

Bundle = int

EMPTY_BUNDLE: Bundle = 0


def full_bundle(item_count: int) -> Bundle:
    return (1 << item_count) - 1


def bundle_of(*item_indices: int) -> Bundle:
    """Bundle holding the given 0-based item indices."""
    mask = 0
    for k in item_indices:
        if k < 0:
            raise ValueError("item indices are 0-based and nonnegative")
        mask |= 1 << k
    return mask


def bundle_size(bundle: Bundle) -> int:
    return bundle.bit_count()


def bundle_items(bundle: Bundle) -> tuple[int, ...]:
    """0-based indices of the items in the bundle, ascending."""
    items = []
    k = 0
    while bundle >> k:
        if (bundle >> k) & 1:
            items.append(k)
        k += 1
    return tuple(items)


def subsets_of(bundle: Bundle):
    """All submasks of a bundle, the empty bundle included."""
    sub = bundle
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & bundle


def render_bundle(bundle: Bundle) -> str:
    if bundle == 0:
        return "{}"
    return "{" + ",".join(f"a{k + 1}" for k in bundle_items(bundle)) + "}"


def parse_bundle(text: str) -> Bundle:
    """Read a bundle from a 0/1 string whose leftmost digit is item a1."""
    text = text.strip()
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"bundle must be a nonempty 0/1 string, got {text!r}")
    mask = 0
    for k, c in enumerate(text):
        if c == "1":
            mask |= 1 << k
    return mask


@dataclass(frozen=True)
class BundleValuation:
    """A value for every bundle of K items, zero on the empty bundle.

    `values[mask]` is the value of the bundle with that bitmask; the tuple
    is dense over all 2^K masks.  No monotonicity is imposed: the failure
    examples for sequential mechanisms lean on bundles worth less than
    their parts.
    """

    item_count: int
    values: tuple[Money, ...]

    def __post_init__(self) -> None:
        if self.item_count < 0:
            raise ValueError("item count must be nonnegative")
        values = tuple(as_money(v) for v in self.values)
        if len(values) != 1 << self.item_count:
            raise ValueError(
                f"need {1 << self.item_count} bundle values, got {len(values)}"
            )
        if values[0] != 0:
            raise ValueError("the empty bundle must be worth 0")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_map(cls, item_count: int, values_by_bundle, default: Money = 0):
        """Build from a {bundle: value} map, filling gaps with `default`."""
        default = as_money(default)
        dense = [default] * (1 << item_count)
        dense[0] = Fraction(0)
        for bundle, value in values_by_bundle.items():
            if not 0 <= bundle < 1 << item_count:
                raise ValueError(f"bundle {bundle} out of range for {item_count} items")
            dense[bundle] = as_money(value)
        return cls(item_count, tuple(dense))

    @classmethod
    def additive(cls, item_values) -> "BundleValuation":
        """Valuation summing fixed per-item values over each bundle."""
        per_item = tuple(as_money(v) for v in item_values)
        item_count = len(per_item)
        dense = []
        for mask in range(1 << item_count):
            dense.append(sum((per_item[k] for k in bundle_items(mask)), Fraction(0)))
        return cls(item_count, tuple(dense))

    def of_bundle(self, bundle: Bundle) -> Money:
        return self.values[bundle]


@dataclass(frozen=True)
class HomogeneousSubmodularValuation:
    """Interchangeable items with weakly decreasing marginal values.

    `marginals[q-1]` is the value added by the q-th item; only bundle size
    matters.
    """

    marginals: tuple[Money, ...]

    def __post_init__(self) -> None:
        marginals = tuple(as_money(m) for m in self.marginals)
        for a, b in itertools.pairwise(marginals):
            if b > a:
                raise ValueError("marginal values must be nonincreasing")
        object.__setattr__(self, "marginals", marginals)

    @property
    def item_count(self) -> int:
        return len(self.marginals)

    def value_for_count(self, count: int) -> Money:
        if not 0 <= count <= len(self.marginals):
            raise ValueError(f"count {count} out of range")
        return sum(self.marginals[:count], Fraction(0))

    def of_bundle(self, bundle: Bundle) -> Money:
        return self.value_for_count(bundle_size(bundle))


@dataclass(frozen=True)
class MultiOutcome:
    """Disjoint bundle per agent plus nonnegative payments."""

    bundles: tuple[Bundle, ...]
    payments: tuple[Money, ...]

    def __post_init__(self) -> None:
        bundles = tuple(int(b) for b in self.bundles)
        payments = tuple(as_money(p) for p in self.payments)
        if len(bundles) != len(payments):
            raise ValueError("need one bundle and one payment per agent")
        taken = 0
        for b in bundles:
            if b < 0:
                raise ValueError("bundles are nonnegative bitmasks")
            if taken & b:
                raise ValueError("agents' bundles must be pairwise disjoint")
            taken |= b
        object.__setattr__(self, "bundles", bundles)
        object.__setattr__(self, "payments", payments)

    @property
    def n(self) -> int:
        return len(self.bundles)


def multi_utility(outcome: MultiOutcome, agent: int, valuation) -> Fraction:
    """Agent's payoff at her true valuation: value received minus payment."""
    return valuation.of_bundle(outcome.bundles[agent]) - outcome.payments[agent]


def multi_utility_vector(outcome: MultiOutcome, valuations) -> tuple[Fraction, ...]:
    return tuple(
        multi_utility(outcome, i, v) for i, v in enumerate(valuations)
    )


def _check_ranking(ranking) -> tuple[int, ...]:
    ranking = tuple(int(r) for r in ranking)
    if sorted(ranking) != list(range(1, len(ranking) + 1)):
        raise ValueError("ranking must assign each agent a distinct position 1..n")
    return ranking


@dataclass(frozen=True)
class SequentialSpec:
    """Priority order plus one per-item price per agent.

    `ranking[i]` is agent i's position (1 = picks first); `thresholds[i]`
    is the price agent i pays per item she takes.
    """

    ranking: tuple[int, ...]
    thresholds: tuple[Money, ...]

    def __post_init__(self) -> None:
        ranking = _check_ranking(self.ranking)
        thresholds = tuple(as_money(t) for t in self.thresholds)
        if len(thresholds) != len(ranking):
            raise ValueError("need one threshold per agent")
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "thresholds", thresholds)

    @property
    def n(self) -> int:
        return len(self.ranking)

    def priority_order(self) -> tuple[int, ...]:
        return tuple(sorted(range(self.n), key=lambda i: self.ranking[i]))


class ClusterTieRule(str, Enum):
    """How a cluster buyer breaks ties among equally good bundles."""

    LARGEST_THEN_LOWEST_MASK = "largest_then_lowest_mask"
    LOWEST_MASK = "lowest_mask"


@dataclass(frozen=True)
class ClusterSpec:
    """Priority order plus a full bundle price list per agent.

    `thresholds[i][mask]` is what agent i pays for the bundle with that
    mask; the empty bundle is free.  The tie rule is part of the spec
    because ties among best bundles decide real outcomes.
    """

    item_count: int
    ranking: tuple[int, ...]
    thresholds: tuple[tuple[Money, ...], ...]
    tie_rule: ClusterTieRule = ClusterTieRule.LARGEST_THEN_LOWEST_MASK

    def __post_init__(self) -> None:
        if self.item_count < 0:
            raise ValueError("item count must be nonnegative")
        ranking = _check_ranking(self.ranking)
        size = 1 << self.item_count
        rows = []
        for row in self.thresholds:
            prices = tuple(as_money(t) for t in row)
            if len(prices) != size:
                raise ValueError(f"need {size} bundle prices per agent")
            if prices[0] != 0:
                raise ValueError("the empty bundle must be free")
            rows.append(prices)
        if len(rows) != len(ranking):
            raise ValueError("need one price list per agent")
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "thresholds", tuple(rows))
        object.__setattr__(self, "tie_rule", ClusterTieRule(self.tie_rule))

    @property
    def n(self) -> int:
        return len(self.ranking)

    def priority_order(self) -> tuple[int, ...]:
        return tuple(sorted(range(self.n), key=lambda i: self.ranking[i]))


def demand(valuation: HomogeneousSubmodularValuation, threshold: Money) -> int:
    """Largest item count whose marginal value still meets the price.

    Marginals past the last item count as negative, so a price of zero
    buys everything and a price above the first marginal buys nothing.
    """
    threshold = as_money(threshold)
    q = 0
    for m in valuation.marginals:
        if m >= threshold:
            q += 1
        else:
            break
    return q


def sequential_allocate_hs(
    spec: SequentialSpec, bids, supply: int | None = None
) -> MultiOutcome:
    """Down-the-line sale of interchangeable items at per-agent prices.

    Each agent in priority order takes min(remaining, her demand) items
    and pays her price for each.  Item identities are assigned in index
    order purely for bookkeeping.  `supply` caps how many items are on
    the table (defaults to all K); varying it is how the downstream
    monotonicity of the rule is probed.
    """
    bids = tuple(bids)
    if len(bids) != spec.n:
        raise ValueError(f"expected {spec.n} bids, got {len(bids)}")
    counts = {b.item_count for b in bids}
    if len(counts) > 1:
        raise ValueError("all bids must cover the same items")
    item_count = counts.pop() if counts else 0
    remaining = item_count if supply is None else min(item_count, supply)
    if remaining < 0:
        raise ValueError("supply must be nonnegative")
    bundles = [EMPTY_BUNDLE] * spec.n
    payments = [Fraction(0)] * spec.n
    next_item = 0
    for i in spec.priority_order():
        q = min(remaining, demand(bids[i], spec.thresholds[i]))
        if q:
            bundles[i] = ((1 << q) - 1) << next_item
            payments[i] = q * spec.thresholds[i]
            next_item += q
            remaining -= q
    return MultiOutcome(tuple(bundles), tuple(payments))


def sequential_allocate_general(spec: SequentialSpec, bids) -> MultiOutcome:
    """Item-by-item sale against arbitrary bundle bids.

    Items go in index order; each goes to the highest-priority agent
    whose reported marginal value for it, on top of what she already
    holds, meets her price, and she pays her price for it.  Nobody may
    want an item, in which case it stays unsold.
    """
    bids = tuple(bids)
    if len(bids) != spec.n:
        raise ValueError(f"expected {spec.n} bids, got {len(bids)}")
    counts = {b.item_count for b in bids}
    if len(counts) > 1:
        raise ValueError("all bids must cover the same items")
    item_count = counts.pop() if counts else 0
    order = spec.priority_order()
    bundles = [EMPTY_BUNDLE] * spec.n
    payments = [Fraction(0)] * spec.n
    for k in range(item_count):
        item = 1 << k
        for i in order:
            held = bundles[i]
            marginal = bids[i].of_bundle(held | item) - bids[i].of_bundle(held)
            if marginal >= spec.thresholds[i]:
                bundles[i] = held | item
                payments[i] += spec.thresholds[i]
                break
    return MultiOutcome(tuple(bundles), tuple(payments))


def _tie_key(rule: ClusterTieRule, bundle: Bundle):
    if rule is ClusterTieRule.LARGEST_THEN_LOWEST_MASK:
        return (-bundle_size(bundle), bundle)
    return bundle


def cluster_allocate(spec: ClusterSpec, bids) -> MultiOutcome:
    """Each agent in turn grabs her best-value remaining sub-bundle.

    Best means maximizing reported value minus her price for the bundle,
    over every subset of the items still unsold; ties go to the spec's
    tie rule.  The empty bundle, at gain zero, is always in the running,
    so nobody is forced into a losing purchase by her own report.
    """
    bids = tuple(bids)
    if len(bids) != spec.n:
        raise ValueError(f"expected {spec.n} bids, got {len(bids)}")
    for b in bids:
        if b.item_count != spec.item_count:
            raise ValueError("bids must cover the spec's items")
    remaining = full_bundle(spec.item_count)
    bundles = [EMPTY_BUNDLE] * spec.n
    payments = [Fraction(0)] * spec.n
    for i in spec.priority_order():
        best = EMPTY_BUNDLE
        best_gain = None
        best_key = None
        for sub in subsets_of(remaining):
            gain = bids[i].of_bundle(sub) - spec.thresholds[i][sub]
            key = _tie_key(spec.tie_rule, sub)
            if best_gain is None or gain > best_gain or (gain == best_gain and key < best_key):
                best, best_gain, best_key = sub, gain, key
        bundles[i] = best
        payments[i] = spec.thresholds[i][best]
        remaining &= ~best
    return MultiOutcome(tuple(bundles), tuple(payments))


def _domain_profiles(bid_domain, true_values):
    domains = tuple(tuple(d) for d in bid_domain)
    if any(not d for d in domains):
        raise ValueError("every agent needs a nonempty bid domain")
    if true_values is None:
        truths = list(itertools.product(*domains))
    else:
        profile = tuple(true_values)
        if len(profile) != len(domains):
            raise ValueError("need one true valuation per agent")
        for i, v in enumerate(profile):
            if v not in domains[i]:
                raise ValueError(f"agent {i}'s true valuation is outside her domain")
        truths = [profile]
    return domains, truths


class _Evaluator:
    def __init__(self, mechanism):
        self.mechanism = mechanism
        self.cache = {}

    def __call__(self, profile) -> MultiOutcome:
        out = self.cache.get(profile)
        if out is None:
            out = self.mechanism(profile)
            self.cache[profile] = out
        return out


def check_multi_ir(mechanism, bid_domain, true_values=None) -> PropertyReport:
    """Truthful reporting never buys a loss, over the given domain.

    `mechanism` is any callable from a bid profile to a `MultiOutcome`.
    With `true_values=None` every profile in the domain product plays the
    role of the truth in turn; otherwise only the given profile does.
    """
    _, truths = _domain_profiles(bid_domain, true_values)
    evaluate = _Evaluator(mechanism)
    checked = 0
    for profile in truths:
        out = evaluate(profile)
        for i, v in enumerate(profile):
            checked += 1
            if multi_utility(out, i, v) < 0:
                witness = Witness(
                    profile=profile,
                    agent=i,
                    utilities_before=multi_utility_vector(out, profile),
                    outcome_before=out,
                    note="truthful payoff is negative",
                )
                return PropertyReport(Property.IR, False, witness, checked)
    return PropertyReport(Property.IR, True, None, checked)


def check_multi_ic(mechanism, bid_domain, true_values=None) -> PropertyReport:
    return _multi_deviation_check(mechanism, bid_domain, true_values, Property.IC)


def check_multi_sic(mechanism, bid_domain, true_values=None) -> PropertyReport:
    return _multi_deviation_check(mechanism, bid_domain, true_values, Property.SIC)


def _multi_deviation_check(mechanism, bid_domain, true_values, prop) -> PropertyReport:
    domains, truths = _domain_profiles(bid_domain, true_values)
    evaluate = _Evaluator(mechanism)
    spiteful = prop is not Property.IC
    checked = 0
    for profile in truths:
        out_v = evaluate(profile)
        before = multi_utility_vector(out_v, profile)
        for i, domain in enumerate(domains):
            for dev in domain:
                if dev == profile[i]:
                    continue
                checked += 1
                deviated = profile[:i] + (dev,) + profile[i + 1 :]
                out_b = evaluate(deviated)
                after = multi_utility_vector(out_b, profile)
                clause = None
                if after[i] > before[i]:
                    clause = "deviation strictly raises the deviator's payoff"
                elif spiteful and after[i] == before[i]:
                    others = [j for j in range(len(profile)) if j != i]
                    harmed = any(after[j] < before[j] for j in others)
                    helped = any(after[j] > before[j] for j in others)
                    if harmed and not helped:
                        clause = "payoff-neutral deviation harms some agent and helps none"
                if clause is not None:
                    witness = Witness(
                        profile=profile,
                        deviation_profile=deviated,
                        agent=i,
                        deviation=dev,
                        utilities_before=before,
                        utilities_after=after,
                        outcome_before=out_v,
                        outcome_after=out_b,
                        note=clause,
                    )
                    return PropertyReport(prop, False, witness, checked)
    return PropertyReport(prop, True, None, checked)


class OwnBidPaymentVariationError(RuntimeError):
    """A payment moved with the winner's own bid at a fixed bundle.

    Constant-at-the-bundle pricing is forced for any mechanism that is
    IR, IC, and spite-proof, so observing variation certifies the
    mechanism under test is outside that class.
    """

    def __init__(self, agent, bundle, opposing_bid, own_a, own_b, pay_a, pay_b):
        self.agent = agent
        self.bundle = bundle
        self.opposing_bid = opposing_bid
        self.own_bids = (own_a, own_b)
        self.payments = (pay_a, pay_b)
        super().__init__(
            f"agent {agent} pays {pay_a} or {pay_b} for {render_bundle(bundle)} "
            "depending on her own bid, against the same opposing bid"
        )


def payment_range_cardinality(
    mechanism, agent: int, bundle: Bundle, opposing_domain, own_domain
) -> int:
    """Count the distinct prices one bundle can carry, across opposing bids.

    Two-agent mechanisms only.  For each opposing bid, every own bid that
    wins `bundle` for `agent` must be charged the same amount (that is
    the own-bid invariance a spite-proof mechanism must satisfy; a
    violation raises `OwnBidPaymentVariationError`).  The count of those
    per-opposing-bid prices is returned; for a K-item sale it should
    never exceed 2^(K - |bundle|).
    """
    if agent not in (0, 1):
        raise ValueError("payment ranges are defined for two-agent mechanisms")
    prices = set()
    for opposing in opposing_domain:
        seen = None
        seen_own = None
        for own in own_domain:
            profile = (own, opposing) if agent == 0 else (opposing, own)
            out = mechanism(profile)
            if out.bundles[agent] != bundle:
                continue
            pay = out.payments[agent]
            if seen is None:
                seen, seen_own = pay, own
            elif pay != seen:
                raise OwnBidPaymentVariationError(
                    agent, bundle, opposing, seen_own, own, seen, pay
                )
        if seen is not None:
            prices.add(seen)
    return len(prices)


@dataclass(frozen=True)
class LinearInequality:
    """A strict half-space sum(coefficients . x) > bound over item values."""

    coefficients: tuple[int, ...]
    bound: Money

    def evaluate(self, point) -> Fraction:
        return sum(
            (c * x for c, x in zip(self.coefficients, point, strict=True)),
            Fraction(0),
        ) - self.bound

    def holds_strictly(self, point) -> bool:
        return self.evaluate(point) > 0

    def holds_weakly(self, point) -> bool:
        return self.evaluate(point) >= 0

    def render(self) -> str:
        nonzero = [(k, c) for k, c in enumerate(self.coefficients) if c]
        if not nonzero:
            return f"0 > {self.bound}"
        if all(c < 0 for _, c in nonzero):
            lhs = _render_terms([(k, -c) for k, c in nonzero])
            return f"{lhs} < {-self.bound}"
        return f"{_render_terms(nonzero)} > {self.bound}"


def _render_terms(terms) -> str:
    parts = []
    for k, c in terms:
        name = f"x{k + 1}"
        if not parts:
            parts.append(name if c > 0 else f"-{name}")
        else:
            parts.append(f"+ {name}" if c > 0 else f"- {name}")
    return " ".join(parts)


@dataclass(frozen=True)
class RegionSystem:
    """For each bundle, the half-spaces where it beats all alternatives.

    `regions[mask]` is the tuple of strict inequalities over additive
    item values under which that bundle is the unique best buy at the
    stored prices; it is None for bundles priced out at infinity.
    """

    item_count: int
    payments: tuple[ExtMoney, ...]
    regions: tuple[tuple[LinearInequality, ...] | None, ...]


def region_partition(payments, item_count: int) -> RegionSystem:
    """Carve additive-value space by which bundle is the best buy.

    `payments` maps bundle masks to prices (the empty bundle, if given,
    must be free; an omitted bundle is an error except the empty one; an
    infinite price makes the bundle unattainable).  For each attainable
    bundle T the system collects, for every other attainable S, the
    strict inequality saying T's value minus price beats S's.
    """
    size = 1 << item_count
    dense: list[ExtMoney] = [None] * size
    dense[0] = Fraction(0)
    for bundle, price in payments.items():
        if not 0 <= bundle < size:
            raise ValueError(f"bundle {bundle} out of range for {item_count} items")
        price = as_ext_money(price)
        if bundle == 0 and price != 0:
            raise ValueError("the empty bundle must be free")
        dense[bundle] = price
    missing = [m for m in range(1, size) if dense[m] is None]
    if missing:
        raise ValueError(
            "missing prices for bundles: "
            + ", ".join(render_bundle(m) for m in missing)
        )
    finite = [m for m in range(size) if not is_infinite(dense[m])]
    regions: list[tuple[LinearInequality, ...] | None] = []
    for target in range(size):
        if is_infinite(dense[target]):
            regions.append(None)
            continue
        system = []
        for other in finite:
            if other == target:
                continue
            coefficients = tuple(
                ((target >> k) & 1) - ((other >> k) & 1) for k in range(item_count)
            )
            bound = dense[target] - dense[other]
            system.append(LinearInequality(coefficients, bound))
        regions.append(tuple(system))
    return RegionSystem(item_count, tuple(dense), tuple(regions))


def classify_point(system: RegionSystem, point) -> frozenset[Bundle]:
    """All bundles tied for best buy at the given item values.

    A point interior to some bundle's region yields that single bundle;
    on shared boundaries every bundle whose inequalities all hold weakly
    is included.
    """
    values = tuple(as_money(x) for x in point)
    if len(values) != system.item_count:
        raise ValueError(f"point must have {system.item_count} coordinates")
    best = set()
    for mask, region in enumerate(system.regions):
        if region is None:
            continue
        if all(ineq.holds_weakly(values) for ineq in region):
            best.add(mask)
    return frozenset(best)


def nonincreasing_marginal_vectors(item_count: int, max_value: int):
    """Every integer marginal vector usable as a homogeneous bid.

    Yields all nonincreasing tuples of length `item_count` with entries
    in 0..max_value, as valuations; the standard exhaustive domain for
    the sequential checkers.
    """
    if item_count < 0 or max_value < 0:
        raise ValueError("item count and max value must be nonnegative")
    for combo in itertools.combinations_with_replacement(
        range(max_value, -1, -1), item_count
    ):
        yield HomogeneousSubmodularValuation(tuple(Fraction(v) for v in combo))


def sequential_bundle_counterexample(epsilon: Money = Fraction(1, 2)):
    """One agent, two items, and a bundle worth more than its parts.

    Truthful reporting buys nothing; claiming part of the bundle's value
    on the first item buys both and nets `epsilon`.  Returns the spec,
    the true profile, and a bid domain containing truth and misreport,
    on which the item-by-item rule fails the incentive check.
    """
    epsilon = as_money(epsilon)
    if epsilon == 0:
        raise ValueError("epsilon must be positive")
    one = Fraction(1)
    spec = SequentialSpec(ranking=(1,), thresholds=(one,))
    truth = BundleValuation.from_map(2, {0b11: 2 + epsilon})
    misreport = BundleValuation.from_map(2, {0b01: 1 + epsilon, 0b11: 2 + epsilon})
    return spec, (truth,), ((truth, misreport),)


def sequential_ordering_counterexample(epsilon: Money = Fraction(1, 2)):
    """One agent whose preferred single item comes up second.

    The item-by-item rule hands her the first item, worth exactly its
    price; disclaiming it steers the sale to the second item and nets
    `epsilon`.  Returns spec, true profile, and the two-bid domain.
    """
    epsilon = as_money(epsilon)
    if epsilon == 0:
        raise ValueError("epsilon must be positive")
    one = Fraction(1)
    spec = SequentialSpec(ranking=(1,), thresholds=(one,))
    truth = BundleValuation.from_map(2, {0b01: one, 0b10: 1 + epsilon, 0b11: 0})
    misreport = BundleValuation.from_map(2, {0b10: 1 + epsilon})
    return spec, (truth,), ((truth, misreport),)


def cluster_spite_counterexample(epsilon: Money = Fraction(1, 2)):
    """Two agents, two items, and a tie the first buyer can weaponize.

    Truthfully indifferent between the single items, the first buyer
    takes a1 and leaves a2 to the second buyer, who nets `epsilon`.
    Shifting her report onto a2 costs her nothing and starves the second
    buyer.  Returns spec, true profile, and per-agent domains on which
    the cluster rule passes the plain incentive check but fails the
    spite-proof one.
    """
    epsilon = as_money(epsilon)
    if epsilon == 0:
        raise ValueError("epsilon must be positive")
    one = Fraction(1)
    prices = (Fraction(0), one, one, Fraction(2))
    spec = ClusterSpec(item_count=2, ranking=(1, 2), thresholds=(prices, prices))
    truth_1 = BundleValuation.from_map(2, {0b01: one, 0b10: one, 0b11: 0})
    misreport_1 = BundleValuation.from_map(2, {0b10: one})
    truth_2 = BundleValuation.from_map(2, {0b10: 1 + epsilon, 0b11: 1 + epsilon})
    return spec, (truth_1, truth_2), ((truth_1, misreport_1), (truth_2,))
