"""Entity-reputation baseline with peer-to-peer spread.

Abstraction of an incentive-style entity reputation scheme: there is no
market and no cash flow.  Each vehicle keeps its own private trust score
per sender, judges every received report with an imperfect classifier, and
stops listening to senders it no longer trusts.  Because recognition is
per observer and spreads no further, a persistent liar keeps finding fresh
audiences for a long time; that slow tail is exactly what the market-based
framework is compared against.

The classifier is a single error knob: with probability ``err`` a report is
judged as the opposite of what it is.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from vcash_sim.world import VehicleState, ring_distance


@dataclass(frozen=True)
class VimeParams:
    """Reputation update knobs (reported in run metadata)."""

    err: float = 0.1
    delta: float = 0.05
    penalty_factor: float = 4.0
    blacklist_threshold: float = 0.3
    initial_trust: float = 0.5
    comm_range: float = 300.0

    def __post_init__(self):
        if not (0.0 <= self.err <= 1.0):
            raise ValueError("err must be a probability")
        if self.delta <= 0 or self.penalty_factor <= 0:
            raise ValueError("trust increments must be positive")
        if not (0.0 <= self.blacklist_threshold <= 1.0):
            raise ValueError("blacklist_threshold must be in [0,1]")

    def steps_to_blacklist(self) -> int:
        """Consecutive judged-bogus reports that silence a fresh sender."""
        trust = self.initial_trust
        steps = 0
        while trust >= self.blacklist_threshold:
            trust -= self.delta * self.penalty_factor
            steps += 1
        return steps


@dataclass(frozen=True)
class EntityTrust:
    """One observer's view of one subject."""

    observer_id: str
    subject_id: str
    trust: float
    blacklisted: bool


def classify_message(is_bogus: bool, err: float, rng: random.Random) -> bool:
    """Judge a report; wrong with probability ``err``."""
    if not (0.0 <= err <= 1.0):
        raise ValueError("err must be a probability")
    if rng.random() < err:
        return not is_bogus
    return is_bogus


class TrustTable:
    """Per-observer trust scores, clamped to [0, 1]."""

    def __init__(self, params: VimeParams):
        self.params = params
        self._trust: dict[tuple[int, int], float] = {}

    def get(self, observer: int, sender: int) -> float:
        return self._trust.get((observer, sender), self.params.initial_trust)

    def blacklisted(self, observer: int, sender: int) -> bool:
        return self.get(observer, sender) < self.params.blacklist_threshold

    def update(self, observer: int, sender: int, judged_bogus: bool) -> float:
        trust = self.get(observer, sender)
        if judged_bogus:
            trust -= self.params.delta * self.params.penalty_factor
        else:
            trust += self.params.delta
        trust = min(1.0, max(0.0, trust))
        self._trust[(observer, sender)] = trust
        return trust

    def entry(self, observer_id: str, sender_id: str, observer: int, sender: int) -> EntityTrust:
        return EntityTrust(
            observer_id=observer_id,
            subject_id=sender_id,
            trust=self.get(observer, sender),
            blacklisted=self.blacklisted(observer, sender),
        )


class VimeNetwork:
    """Peer-to-peer spread state for one run.

    Each vehicle's event table holds the (location, attr) entries it has
    accepted from neighbors.  An event "exists" for the metric while at
    least one vehicle still holds it; holders drop an entry when they pass
    its location and sense nothing matching.
    """

    def __init__(
        self,
        params: VimeParams,
        n_vehicles: int,
        road_length: float,
        location_tolerance: float,
        pass_range: float,
    ):
        self.params = params
        self.trust = TrustTable(params)
        self.road_length = road_length
        self.location_tolerance = location_tolerance
        self.pass_range = pass_range
        self.tables: list[dict[tuple[float, str], bool]] = [
            {} for _ in range(n_vehicles)
        ]
        # key -> count of vehicles holding it, plus its truth at first sight
        self._holders: dict[tuple[float, str], int] = {}
        self._key_bogus: dict[tuple[float, str], bool] = {}

    def step(
        self,
        reports: list[tuple[int, float, str, bool]],
        vehicles: list[VehicleState],
        rng: random.Random,
    ) -> int:
        """Spread this second's reports; returns how many got accepted.

        ``reports`` carries (sender index, location, attr, is_bogus).  Every
        non-blacklisted vehicle within communication range judges each
        report: a judged-genuine report is accepted into the observer's
        event table and raises the sender's trust; a judged-bogus one is
        rejected and cuts it.  Blacklisted observers ignore the sender
        entirely, so their trust stays frozen below the threshold.
        """
        accepted = 0
        comm = self.params.comm_range
        err = self.params.err
        for sender, location, attr, is_bogus in reports:
            sender_pos = vehicles[sender].position
            key = (location, attr)
            for observer in range(len(vehicles)):
                if observer == sender:
                    continue
                if ring_distance(sender_pos, vehicles[observer].position, self.road_length) > comm:
                    continue
                if self.trust.blacklisted(observer, sender):
                    continue
                judged_bogus = classify_message(is_bogus, err, rng)
                self.trust.update(observer, sender, judged_bogus)
                if not judged_bogus:
                    accepted += 1
                    self._insert(observer, key, is_bogus)
        return accepted

    def _insert(self, observer: int, key: tuple[float, str], is_bogus: bool) -> None:
        table = self.tables[observer]
        if key in table:
            return
        table[key] = True
        self._holders[key] = self._holders.get(key, 0) + 1
        self._key_bogus.setdefault(key, is_bogus)

    def drop_passed_entries(
        self,
        vehicles: list[VehicleState],
        sensed_per_vehicle: list[list],
    ) -> None:
        """Forget entries a vehicle just drove past without seeing anything."""
        for idx, vehicle in enumerate(vehicles):
            table = self.tables[idx]
            if not table:
                continue
            sensed = sensed_per_vehicle[idx]
            stale = []
            for key in table:
                location, attr = key
                if ring_distance(vehicle.position, location, self.road_length) > self.pass_range:
                    continue
                seen = any(
                    e.attr == attr
                    and ring_distance(location, e.location, self.road_length)
                    <= self.location_tolerance
                    for e in sensed
                )
                if not seen:
                    stale.append(key)
            for key in stale:
                del table[key]
                self._holders[key] -= 1

    def existing_counts(self) -> tuple[int, int]:
        """(bogus, total) events currently held by at least one vehicle."""
        bogus = 0
        total = 0
        for key, holders in self._holders.items():
            if holders > 0:
                total += 1
                if self._key_bogus[key]:
                    bogus += 1
        return bogus, total

    def bogus_ratio(self) -> float:
        bogus, total = self.existing_counts()
        return bogus / total if total else 0.0
