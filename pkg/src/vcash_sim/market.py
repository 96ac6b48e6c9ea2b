"""Economic core of the event-trading market.

Money rules, in one place:

* Announcing an event invests a fixed fraction of the reporter's remaining
  balance.  Investments below a minimum are ignored outright, which is how
  drained accounts lose their voice.
* Every invested amount sits in the listing's escrow and buys the investor a
  stock share proportional to its stake.  Notification fees collected from
  subscribers each second are split across stakeholders by those shares.
* Verifying that an event has ended is itself an investment.  When enough
  distinct vehicles confirm termination, they split the whole escrow in
  proportion to their termination stakes (plus a refund of those stakes).
  A termination claim disproved by fresh sightings is expropriated into the
  escrow instead.

All amounts are nonnegative floats.  Transfers are constructed so that cash
is conserved: whatever leaves accounts lands in an escrow or another
account, never nowhere.
"""

from __future__ import annotations

from dataclasses import dataclass

from vcash_sim.errors import ProtocolError

# Listing lifecycle.  Transitions only move forward:
# pending -> verified -> terminated, or pending -> terminated.
PENDING = "pending"
VERIFIED = "verified"
TERMINATED = "terminated"

# Outcomes of a stake attempt.
ACCEPTED = "accepted"
IGNORED = "ignored"

# Debits may undershoot zero by float rounding when a balance is spent to
# exactly nothing; anything beyond this is a real overdraw and a bug.
_BALANCE_EPS = 1e-9


class Account:
    """A vehicle's cash balance as held by the bank/market."""

    __slots__ = ("vehicle_id", "balance")

    def __init__(self, vehicle_id: str, balance: float = 0.0):
        if balance < 0:
            raise ValueError(f"negative opening balance for {vehicle_id}")
        self.vehicle_id = vehicle_id
        self.balance = balance

    def debit(self, amount: float) -> None:
        """Remove cash; never leaves the balance negative."""
        if amount < 0:
            raise ValueError("debit amount must be nonnegative")
        remaining = self.balance - amount
        if remaining < 0:
            if remaining < -_BALANCE_EPS:
                raise ProtocolError(
                    f"overdraw on {self.vehicle_id}: "
                    f"balance {self.balance!r}, debit {amount!r}"
                )
            remaining = 0.0
        self.balance = remaining

    def credit(self, amount: float) -> None:
        if amount < 0:
            raise ValueError("credit amount must be nonnegative")
        self.balance += amount

    def __repr__(self) -> str:
        return f"Account({self.vehicle_id!r}, balance={self.balance:.6g})"


@dataclass(frozen=True)
class Stake:
    """One vehicle's invested amount on one listing."""

    vehicle_id: str
    amount: float

    def __post_init__(self):
        if self.amount <= 0:
            raise ValueError("stake amount must be positive")


@dataclass(frozen=True)
class TradingPlan:
    """Market-wide trading parameters.

    ratio: fraction of the remaining balance invested per report.
    c0: base notification fee per event per second.
    min_investment: reports investing less than this are ignored.
    k_verify: distinct reporters required before a listing is verified.
    m_terminate: distinct confirmers required to terminate a listing.
    """

    ratio: float = 0.1
    c0: float = 1e-4
    min_investment: float = 0.01
    k_verify: int = 2
    m_terminate: int = 2

    def __post_init__(self):
        if not (0 < self.ratio < 1):
            raise ValueError("ratio must be in (0, 1)")
        if self.c0 <= 0:
            raise ValueError("c0 must be positive")
        if self.min_investment <= 0:
            raise ValueError("min_investment must be positive")
        if self.k_verify < 1 or self.m_terminate < 1:
            raise ValueError("k_verify and m_terminate must be >= 1")


class EventListing:
    """Market-side record of one reported traffic event.

    Stakes are keyed by vehicle id; repeat stakes from the same vehicle
    accumulate into one entry, so ``len(announce_stakes)`` counts distinct
    backers directly.
    """

    __slots__ = (
        "listing_id",
        "location",
        "attr",
        "announce_stakes",
        "termination_stakes",
        "escrow",
        "status",
        "first_report_time",
        "verified_time",
    )

    def __init__(
        self,
        listing_id: str,
        location: float,
        attr: str,
        first_report_time: float,
    ):
        self.listing_id = listing_id
        self.location = location
        self.attr = attr
        self.announce_stakes: dict[str, float] = {}
        self.termination_stakes: dict[str, float] = {}
        self.escrow = 0.0
        self.status = PENDING
        self.first_report_time = first_report_time
        self.verified_time: float | None = None

    def share_fractions(self) -> dict[str, float]:
        """Stock share per announcer: stake normalized by the staked total."""
        total = sum(self.announce_stakes.values())
        if total <= 0:
            return {}
        return {vid: amt / total for vid, amt in self.announce_stakes.items()}

    def mark_verified(self, now: float) -> None:
        if self.status != PENDING:
            raise ProtocolError(f"cannot verify {self.listing_id} from {self.status}")
        self.status = VERIFIED
        self.verified_time = now

    def __repr__(self) -> str:
        return (
            f"EventListing({self.listing_id!r}, {self.status}, "
            f"loc={self.location:.1f}, escrow={self.escrow:.6g})"
        )


def compute_investment(balance: float, ratio: float) -> float:
    """Investment drawn for the next report: a fixed cut of what is left.

    Repeated investing with no income decays the balance geometrically,
    which is the drain that eventually silences a pure spammer.
    """
    if balance < 0:
        raise ValueError("balance must be nonnegative")
    if not (0 < ratio < 1):
        raise ValueError("ratio must be in (0, 1)")
    return balance * ratio


def _stake(
    account: Account,
    stakes: dict[str, float],
    listing: EventListing,
    plan: TradingPlan,
    into_escrow: bool,
) -> str:
    amount = compute_investment(account.balance, plan.ratio)
    if amount < plan.min_investment:
        return IGNORED
    account.debit(amount)
    stakes[account.vehicle_id] = stakes.get(account.vehicle_id, 0.0) + amount
    if into_escrow:
        listing.escrow += amount
    return ACCEPTED


def try_stake_announcement(
    account: Account, listing: EventListing, plan: TradingPlan
) -> str:
    """Invest in an event's existence; returns ACCEPTED or IGNORED.

    The ignored path is the punishment channel: once a balance is drained
    the computed investment falls under the minimum and the market stops
    listening to that vehicle.
    """
    if listing.status == TERMINATED:
        raise ProtocolError(f"stake on terminated listing {listing.listing_id}")
    return _stake(account, listing.announce_stakes, listing, plan, into_escrow=True)


def try_stake_termination(
    account: Account, listing: EventListing, plan: TradingPlan
) -> str:
    """Invest in an event's non-existence; same sizing and minimum as announcements.

    The stake is held outside the escrow until the claim resolves: refunded
    plus rewarded on termination, expropriated into the escrow if disproved.
    """
    if listing.status == TERMINATED:
        raise ProtocolError(
            f"termination stake on terminated listing {listing.listing_id}"
        )
    return _stake(account, listing.termination_stakes, listing, plan, into_escrow=False)


def notification_rate(c0: float, active_events: int) -> float:
    """Per-event per-second fee, diluted by how many events are charging.

    With zero active events the base rate is returned unused; no charge is
    levied when there is nothing to notify about.
    """
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    return c0 / max(active_events, 1)


def select_affordable_notifications(
    balance: float, listings: list[EventListing], rate: float
) -> list[EventListing]:
    """Pick which verified listings a vehicle is notified of this second.

    Listings are ranked by escrow descending (ties: earlier first report,
    then listing id) and the vehicle gets the longest prefix whose total
    per-second charge fits its balance.  An empty result is the starvation
    channel for vehicles that never earn.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    ranked = sorted(
        listings,
        key=lambda l: (-l.escrow, l.first_report_time, l.listing_id),
    )
    count = 0
    for _ in ranked:
        if rate * (count + 1) <= balance:
            count += 1
        else:
            break
    return ranked[:count]


def _proportional_split(
    weights: dict[str, float], total: float
) -> dict[str, float]:
    """Split ``total`` by weight; the last entry takes the exact remainder."""
    weight_sum = sum(weights.values())
    if weight_sum <= 0 or not weights:
        return {vid: 0.0 for vid in weights}
    out: dict[str, float] = {}
    ids = list(weights)
    allotted = 0.0
    for vid in ids[:-1]:
        share = weights[vid] / weight_sum * total
        out[vid] = share
        allotted += share
    out[ids[-1]] = max(total - allotted, 0.0)
    return out


def distribute_profit(
    listing: EventListing,
    rate: float,
    payers: list[Account],
    accounts: dict[str, Account],
) -> dict[str, float]:
    """Charge this second's subscribers and pay stakeholders their shares.

    Each payer owes exactly one notification fee; the pot (fee times payer
    count) is split across announcers by stock share, so everything debited
    is credited and nothing else.
    """
    if listing.status != VERIFIED:
        raise ProtocolError(
            f"profit distribution on {listing.status} listing {listing.listing_id}"
        )
    if not listing.announce_stakes:
        raise ProtocolError(f"listing {listing.listing_id} has no stakeholders")
    if not payers:
        return {}
    for payer in payers:
        payer.debit(rate)
    total = rate * len(payers)
    payouts = _proportional_split(listing.announce_stakes, total)
    for vid, amount in payouts.items():
        accounts[vid].credit(amount)
    return payouts


@dataclass(frozen=True)
class TerminationSettlement:
    """Escrow rewards and stake refunds owed when a listing terminates."""

    payouts: dict[str, float]
    refunds: dict[str, float]

    def total_credit(self, vehicle_id: str) -> float:
        return self.payouts.get(vehicle_id, 0.0) + self.refunds.get(vehicle_id, 0.0)


def terminate_event(listing: EventListing) -> TerminationSettlement:
    """Close a listing and settle its escrow onto the confirmers.

    Each termination staker receives an escrow share proportional to its
    termination stake plus its own stake back; the listing stops trading
    for good.  Amounts are returned, not applied: the caller credits the
    accounts (which may live at the bank for vehicles that already left).
    """
    if listing.status == TERMINATED:
        raise ProtocolError(f"double termination of {listing.listing_id}")
    if not listing.termination_stakes and listing.escrow > 0:
        raise ProtocolError(
            f"terminating {listing.listing_id} with escrow and no confirmers"
        )
    payouts = _proportional_split(listing.termination_stakes, listing.escrow)
    refunds = dict(listing.termination_stakes)
    listing.escrow = 0.0
    listing.termination_stakes = {}
    listing.status = TERMINATED
    return TerminationSettlement(payouts=payouts, refunds=refunds)


def expropriate_false_verification(listing: EventListing, verifier_stake: Stake) -> None:
    """Seize a disproved termination stake into the listing's escrow.

    The seized cash joins the announcers' pool rather than vanishing, so
    system-wide cash stays constant.
    """
    vid = verifier_stake.vehicle_id
    held = listing.termination_stakes.get(vid)
    if held is None or abs(held - verifier_stake.amount) > _BALANCE_EPS:
        raise ProtocolError(
            f"no matching termination stake by {vid} on {listing.listing_id}"
        )
    del listing.termination_stakes[vid]
    listing.escrow += held
