"""Zoning-market session choreography and report verification.

One zoning market manages every listing in its zone.  A vehicle's trading
session opens with a four-way handshake (enter, bank lookup, bank reply,
trading ack), after which the vehicle streams event reports and receives
listing broadcasts/withdrawals; leaving the zone uploads its balance back
to the bank while any live stakes stay behind and keep settling into the
bank account.

Existence is established by cross-validation: a pending listing becomes
verified once enough distinct vehicles have invested in it, and is then
broadcast to the zone and starts charging subscribers.  Termination is the
mirror image: enough distinct non-existence claims close the listing and
hand its escrow to the claimants, while claims contradicted by enough fresh
sightings are expropriated into the escrow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from vcash_sim import market as mk
from vcash_sim.errors import ProtocolError
from vcash_sim.market import (
    ACCEPTED,
    Account,
    EventListing,
    Stake,
    TradingPlan,
    notification_rate,
    terminate_event,
    try_stake_announcement,
    try_stake_termination,
)

# Message kinds, in session order.  Broadcasts, withdrawals and reports
# interleave freely while a session is open; account uploads repeat after
# exit whenever post-exit earnings are synced to the bank.
ZONE_ENTER = "zone_enter"
ACCOUNT_INFO = "account_info"
ACCOUNT_CREATED = "account_created"
ACK_START_TRADING = "ack_start_trading"
EVENT_REPORT = "event_report"
EVENT_BROADCAST = "event_broadcast"
EVENT_WITHDRAW = "event_withdraw"
ZONE_EXIT = "zone_exit"
ACCOUNT_UPLOAD = "account_upload"

MARKET = "market"
BANK = "bank"

CLAIM_EXISTS = "exists"
CLAIM_NONEXISTENT = "nonexistent"

ZONE_AUDIENCE = "zone"


@dataclass(frozen=True)
class Message:
    """One protocol message as recorded in the run trace."""

    time: float
    kind: str
    sender: str
    payload: dict

    def as_dict(self) -> dict:
        return {
            "time": self.time,
            "kind": self.kind,
            "sender": self.sender,
            "payload": self.payload,
        }


@dataclass(frozen=True)
class Report:
    """A vehicle's claim that an event exists or has ended."""

    vehicle_id: str
    location: float
    attr: str
    claim: str
    time: float


@dataclass
class Session:
    vehicle_id: str
    entered_at: float
    exited_at: float | None = None


@dataclass
class ReportOutcome:
    """What the market did with one submitted report."""

    listing: EventListing | None
    created: bool = False
    stake_outcome: str | None = None
    terminated: bool = False
    expropriated: list[str] = field(default_factory=list)


class Bank:
    """Central account store; the only place balances persist."""

    def __init__(self, initial_balance: float):
        self.initial_balance = initial_balance
        self.accounts: dict[str, Account] = {}

    def get_or_create(self, vehicle_id: str) -> tuple[Account, bool]:
        account = self.accounts.get(vehicle_id)
        if account is not None:
            return account, False
        account = Account(vehicle_id, self.initial_balance)
        self.accounts[vehicle_id] = account
        return account, True

    def total(self) -> float:
        return sum(a.balance for a in self.accounts.values())


class ZoningMarket:
    """The trading server for one zone.

    All state mutations happen through report submission, the per-second
    charging pass, and session open/close; everything is appended to a
    message trace so small scenarios can be validated message by message.
    """

    def __init__(
        self,
        plan: TradingPlan,
        initial_balance: float = 100.0,
        location_tolerance: float = 50.0,
        road_length: float = 5000.0,
        record_trace: bool = True,
    ):
        self.plan = plan
        self.location_tolerance = location_tolerance
        self.road_length = road_length
        self.bank = Bank(initial_balance)
        self.sessions: dict[str, Session] = {}
        self.exited: set[str] = set()
        self.listings: dict[str, EventListing] = {}
        self.trace: list[Message] = []
        self.record_trace = record_trace
        self._listing_seq = 0
        # Existence reports seen since the earliest still-pending
        # termination claim, per listing; drives expropriation.
        self._fresh_exists: dict[str, set[str]] = {}
        # Deliveries accumulated during a tick, drained by the driver.
        self.pending_broadcasts: list[tuple[str, float, str]] = []
        self.pending_withdrawals: list[str] = []

    # -- trace ---------------------------------------------------------

    def _record(self, time: float, kind: str, sender: str, payload: dict) -> None:
        if self.record_trace:
            self.trace.append(Message(time, kind, sender, payload))

    # -- sessions ------------------------------------------------------

    def handle_zone_entry(self, vehicle_id: str, now: float) -> list[tuple[str, float, str]]:
        """Open a trading session; returns currently broadcast listings.

        The returned (listing_id, location, attr) triples seed the entering
        vehicle's event table, mirroring the re-broadcast of everything the
        zone is currently charging for.
        """
        if vehicle_id in self.sessions:
            raise ProtocolError(f"{vehicle_id} entered the zone twice")
        self._record(now, ZONE_ENTER, vehicle_id, {"vehicle_id": vehicle_id})
        self._record(now, ACCOUNT_INFO, MARKET, {"vehicle_id": vehicle_id})
        account, created = self.bank.get_or_create(vehicle_id)
        self._record(
            now,
            ACCOUNT_CREATED,
            BANK,
            {"vehicle_id": vehicle_id, "balance": account.balance, "created": created},
        )
        self.sessions[vehicle_id] = Session(vehicle_id, entered_at=now)
        self.exited.discard(vehicle_id)
        self._record(now, ACK_START_TRADING, MARKET, {"vehicle_id": vehicle_id})
        active = [
            (l.listing_id, l.location, l.attr)
            for l in self.listings.values()
            if l.status == mk.VERIFIED
        ]
        for listing_id, location, attr in active:
            self._record(
                now,
                EVENT_BROADCAST,
                MARKET,
                {
                    "listing_id": listing_id,
                    "location": location,
                    "attr": attr,
                    "audience": vehicle_id,
                },
            )
        return active

    def handle_zone_exit(self, vehicle_id: str, now: float) -> None:
        """Close the session and sync the balance back to the bank.

        Live stakes stay on their listings and keep settling; later
        earnings land in the bank account directly.
        """
        session = self.sessions.pop(vehicle_id, None)
        if session is None:
            raise ProtocolError(f"{vehicle_id} exited without a session")
        session.exited_at = now
        self.exited.add(vehicle_id)
        self._record(now, ZONE_EXIT, vehicle_id, {"vehicle_id": vehicle_id})
        balance = self.bank.accounts[vehicle_id].balance
        self._record(
            now, ACCOUNT_UPLOAD, MARKET, {"vehicle_id": vehicle_id, "balance": balance}
        )

    def in_session(self, vehicle_id: str) -> bool:
        return vehicle_id in self.sessions

    def _credit_vehicle(self, vehicle_id: str, amount: float, now: float) -> None:
        if amount <= 0:
            return
        account = self.bank.accounts[vehicle_id]
        account.credit(amount)
        if vehicle_id in self.exited:
            # Post-exit earnings sync: the market keeps managing the
            # vehicle's profit and pushes the balance to the bank.
            self._record(
                now,
                ACCOUNT_UPLOAD,
                MARKET,
                {"vehicle_id": vehicle_id, "balance": account.balance},
            )

    # -- report handling -----------------------------------------------

    def _match_listing(self, report: Report) -> EventListing | None:
        """Nearest non-terminated listing with the same attribute in range."""
        best: EventListing | None = None
        best_key: tuple[float, str] | None = None
        for listing in self.listings.values():
            if listing.status == mk.TERMINATED or listing.attr != report.attr:
                continue
            d = abs(listing.location - report.location) % self.road_length
            d = min(d, self.road_length - d)
            if d > self.location_tolerance:
                continue
            key = (d, listing.listing_id)
            if best_key is None or key < best_key:
                best, best_key = listing, key
        return best

    def _new_listing(self, report: Report) -> EventListing:
        listing = EventListing(
            listing_id=f"L{self._listing_seq:04d}",
            location=report.location,
            attr=report.attr,
            first_report_time=report.time,
        )
        self._listing_seq += 1
        self.listings[listing.listing_id] = listing
        return listing

    def submit_report(self, report: Report, now: float) -> ReportOutcome:
        """Correlate one report, invest it, and run the status checks."""
        if report.vehicle_id not in self.sessions:
            raise ProtocolError(f"report from {report.vehicle_id} outside a session")
        self._record(
            now,
            EVENT_REPORT,
            report.vehicle_id,
            {
                "vehicle_id": report.vehicle_id,
                "location": report.location,
                "attr": report.attr,
                "claim": report.claim,
                "time": report.time,
            },
        )
        account = self.bank.accounts[report.vehicle_id]
        if report.claim == CLAIM_EXISTS:
            return self._handle_exists(report, account, now)
        if report.claim == CLAIM_NONEXISTENT:
            return self._handle_nonexistent(report, account, now)
        raise ProtocolError(f"unknown claim {report.claim!r}")

    def _handle_exists(
        self, report: Report, account: Account, now: float
    ) -> ReportOutcome:
        listing = self._match_listing(report)
        created = False
        if listing is None:
            # Don't register a listing the reporter cannot back.
            investment = mk.compute_investment(account.balance, self.plan.ratio)
            if investment < self.plan.min_investment:
                return ReportOutcome(listing=None, stake_outcome=mk.IGNORED)
            listing = self._new_listing(report)
            created = True
        outcome = try_stake_announcement(account, listing, self.plan)
        if outcome != ACCEPTED:
            return ReportOutcome(listing=None if created else listing,
                                 stake_outcome=outcome)
        expropriated = self._note_fresh_existence(listing, report.vehicle_id, now)
        self.check_verification(listing, now)
        return ReportOutcome(
            listing=listing,
            created=created,
            stake_outcome=outcome,
            expropriated=expropriated,
        )

    def _handle_nonexistent(
        self, report: Report, account: Account, now: float
    ) -> ReportOutcome:
        listing = self._match_listing(report)
        if listing is None or listing.status != mk.VERIFIED:
            # Non-existence claims only make sense against a listing that
            # is currently broadcast; anything else is a stale race.
            return ReportOutcome(listing=None)
        outcome = try_stake_termination(account, listing, self.plan)
        if outcome != ACCEPTED:
            return ReportOutcome(listing=listing, stake_outcome=outcome)
        self._fresh_exists.setdefault(listing.listing_id, set())
        terminated = self.check_termination(listing, now)
        return ReportOutcome(
            listing=listing, stake_outcome=outcome, terminated=terminated
        )

    def _note_fresh_existence(
        self, listing: EventListing, vehicle_id: str, now: float
    ) -> list[str]:
        """Track sightings against pending claims; expropriate when enough."""
        if not listing.termination_stakes:
            return []
        fresh = self._fresh_exists.setdefault(listing.listing_id, set())
        fresh.add(vehicle_id)
        if len(fresh) < self.plan.k_verify:
            return []
        losers = list(listing.termination_stakes.keys())
        for vid in losers:
            stake = Stake(vid, listing.termination_stakes[vid])
            mk.expropriate_false_verification(listing, stake)
        self._fresh_exists.pop(listing.listing_id, None)
        return losers

    # -- status checks ---------------------------------------------------

    def check_verification(self, listing: EventListing, now: float) -> bool:
        """Verify and broadcast once enough distinct vehicles have invested."""
        if listing.status != mk.PENDING:
            return False
        if len(listing.announce_stakes) < self.plan.k_verify:
            return False
        listing.mark_verified(now)
        self._record(
            now,
            EVENT_BROADCAST,
            MARKET,
            {
                "listing_id": listing.listing_id,
                "location": listing.location,
                "attr": listing.attr,
                "audience": ZONE_AUDIENCE,
            },
        )
        self.pending_broadcasts.append(
            (listing.listing_id, listing.location, listing.attr)
        )
        return True

    def check_termination(self, listing: EventListing, now: float) -> bool:
        """Terminate once enough distinct vehicles claim non-existence."""
        if listing.status != mk.VERIFIED:
            return False
        if len(listing.termination_stakes) < self.plan.m_terminate:
            return False
        settlement = terminate_event(listing)
        for vid in settlement.refunds:
            self._credit_vehicle(vid, settlement.total_credit(vid), now)
        self._fresh_exists.pop(listing.listing_id, None)
        self._record(
            now,
            EVENT_WITHDRAW,
            MARKET,
            {"listing_id": listing.listing_id, "audience": ZONE_AUDIENCE},
        )
        self.pending_withdrawals.append(listing.listing_id)
        return True

    # -- charging ----------------------------------------------------------

    def charge_subscribers(self, now: float) -> dict[str, int]:
        """Collect this second's notification fees and pay out stakeholders.

        Every in-session vehicle is charged for as many of the ranked
        verified listings as it can afford (highest escrow first); each
        listing's take is split across its stakeholders by stock share.
        Listings verified this very second start charging next second.
        Returns notifications delivered per vehicle.
        """
        live = [l for l in self.listings.values() if l.status == mk.VERIFIED]
        rate = notification_rate(self.plan.c0, len(live))
        chargeable = [
            l for l in live if l.verified_time is not None and l.verified_time < now
        ]
        delivered = {vid: 0 for vid in self.sessions}
        if not chargeable:
            return delivered
        chargeable.sort(key=lambda l: (-l.escrow, l.first_report_time, l.listing_id))
        n = len(chargeable)
        full_cost = rate * n
        accounts = self.bank.accounts
        prefix: list[tuple[Account, int]] = []
        for vid in self.sessions:
            account = accounts[vid]
            balance = account.balance
            if full_cost <= balance:
                k = n
            else:
                k = 0
                while k < n and rate * (k + 1) <= balance:
                    k += 1
            delivered[vid] = k
            prefix.append((account, k))
        for j, listing in enumerate(chargeable):
            payers = [account for account, k in prefix if k > j]
            if not payers:
                continue
            payouts = mk.distribute_profit(listing, rate, payers, accounts)
            if self.exited:
                for vid, amount in payouts.items():
                    if vid in self.exited and amount > 0:
                        self._record(
                            now,
                            ACCOUNT_UPLOAD,
                            MARKET,
                            {"vehicle_id": vid, "balance": accounts[vid].balance},
                        )
        return delivered

    # -- bookkeeping ---------------------------------------------------

    def drain_deliveries(self) -> tuple[list[tuple[str, float, str]], list[str]]:
        """Broadcasts/withdrawals queued this tick, cleared for the next."""
        broadcasts = self.pending_broadcasts
        withdrawals = self.pending_withdrawals
        self.pending_broadcasts = []
        self.pending_withdrawals = []
        return broadcasts, withdrawals

    def verified_listing_count(self) -> int:
        return sum(1 for l in self.listings.values() if l.status == mk.VERIFIED)

    def conservation_total(self) -> float:
        """All cash anywhere: accounts, escrows, and pending claims."""
        total = self.bank.total()
        for listing in self.listings.values():
            total += listing.escrow
            for amount in listing.termination_stakes.values():
                total += amount
        return total


def validate_session_trace(trace: list[Message], vehicle_id: str) -> int:
    """Check one vehicle's messages against the session grammar.

    Grammar per session: enter, bank request, bank reply, trading ack,
    then any mix of reports/broadcasts/withdrawals, then exit and a
    balance upload; further uploads may follow after exit.  Returns the
    number of completed sessions; raises on any out-of-order message.
    """
    OUTSIDE, ENTERED, REQUESTED, REPLIED, INSIDE, EXITING, EXITED = range(7)
    state = OUTSIDE
    completed = 0

    def fail(index: int, kind: str, at_state: int) -> None:
        raise ProtocolError(
            f"message {index} ({kind}) out of order for {vehicle_id} "
            f"in state {at_state}"
        )

    for i, msg in enumerate(trace):
        payload = msg.payload
        relevant = payload.get("vehicle_id") == vehicle_id or (
            msg.kind in (EVENT_BROADCAST, EVENT_WITHDRAW)
            and payload.get("audience") in (ZONE_AUDIENCE, vehicle_id)
        )
        if not relevant:
            continue
        kind = msg.kind
        if kind == ZONE_ENTER:
            if state not in (OUTSIDE, EXITED):
                fail(i, kind, state)
            state = ENTERED
        elif kind == ACCOUNT_INFO:
            if state != ENTERED:
                fail(i, kind, state)
            state = REQUESTED
        elif kind == ACCOUNT_CREATED:
            if state != REQUESTED:
                fail(i, kind, state)
            state = REPLIED
        elif kind == ACK_START_TRADING:
            if state != REPLIED:
                fail(i, kind, state)
            state = INSIDE
        elif kind == EVENT_REPORT:
            if state != INSIDE:
                fail(i, kind, state)
        elif kind in (EVENT_BROADCAST, EVENT_WITHDRAW):
            # Zone-wide notifications only reach vehicles in session.
            if payload.get("audience") == vehicle_id and state != INSIDE:
                fail(i, kind, state)
        elif kind == ZONE_EXIT:
            if state != INSIDE:
                fail(i, kind, state)
            state = EXITING
        elif kind == ACCOUNT_UPLOAD:
            if state == EXITING:
                state = EXITED  # the balance upload that closes the session
                completed += 1
            elif state == EXITED:
                pass  # post-exit profit sync
            else:
                fail(i, kind, state)
        else:
            raise ProtocolError(f"unknown message kind {kind!r}")
    return completed
