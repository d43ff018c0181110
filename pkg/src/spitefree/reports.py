"""Property verdicts with replayable counterexample witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum



class Property(str, Enum):
    IR = "IR"
    IC = "IC"
    SIC = "SIC"
    ESIC = "ESIC"
    ANON = "ANON"
    EFF = "EFF"
    LOSER_PAYS_NOTHING = "LOSER_PAYS_NOTHING"
    PAYMENT_OWN_BID_INVARIANT = "PAYMENT_OWN_BID_INVARIANT"
    WIN_PRESERVED_BY_RAISE = "WIN_PRESERVED_BY_RAISE"
    WINNER_PRICE_CONSTANT = "WINNER_PRICE_CONSTANT"


@dataclass(frozen=True)
class Witness:
    """Everything needed to replay a failure without rerunning the search.

    ``profile`` is the truthful (or reference) profile.  For deviation-style
    failures ``deviation_profile`` is the profile after ``agent`` (0-based)
    switched to ``deviation``; for permutation failures ``deviation_profile``
    is the permuted profile.  Utility vectors are evaluated at the true
    values taken from ``profile``.  Profiles hold bids for the single-item
    checks and valuation objects for the multi-item ones.
    """

    profile: tuple
    deviation_profile: tuple | None = None
    agent: int | None = None
    deviation: object | None = None
    permutation: tuple[int, ...] | None = None
    utilities_before: tuple | None = None
    utilities_after: tuple | None = None
    outcome_before: object | None = None
    outcome_after: object | None = None
    note: str = ""


@dataclass(frozen=True)
class PropertyReport:
    property: Property
    passed: bool
    witness: Witness | None
    checked_count: int

    def __post_init__(self) -> None:
        if not self.passed and self.witness is None:
            raise ValueError("failed reports must carry a witness")
