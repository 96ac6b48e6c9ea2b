"""Ground truth: ring-road geometry, vehicle kinematics, and event lifecycle.

The road is a single ring measured in meters.  Vehicles move at constant
speed in a fixed direction and wrap around.  Traffic events appear at
random locations, live for a bounded random duration, and are sensed by any
vehicle within range (boolean detection, no noise).

Three behavior modes drive what a vehicle tells the market:

* normal   - announces each newly sensed event once, and files a
             non-existence claim when passing a known listing's location
             with nothing there;
* bogus    - fabricates reports from a shared false event map at a fixed
             rate and never reports anything truthful;
* selfish  - never reports at all.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from vcash_sim.protocol import CLAIM_EXISTS, CLAIM_NONEXISTENT, Report

NORMAL = "normal"
BOGUS = "bogus"
SELFISH = "selfish"

# Predefined event attribute tags (kind of condition being reported).
EVENT_ATTRS = ("jam", "accident", "road_damage", "flooding")


def ring_distance(a: float, b: float, road_length: float) -> float:
    """Shortest distance between two points on the ring."""
    d = abs(a - b) % road_length
    return min(d, road_length - d)


@dataclass(frozen=True)
class TrafficEvent:
    """A real traffic condition with a bounded lifetime."""

    event_id: str
    start: float
    end: float
    location: float
    attr: str

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError("event must end after it starts")

    def active(self, now: float) -> bool:
        return self.start <= now < self.end


@dataclass(frozen=True)
class FalseEventMap:
    """Fabricated (location, attr) entries shared by all bogus vehicles."""

    entries: tuple[tuple[float, str], ...]


@dataclass(frozen=True)
class EventSchedule:
    """When events appear and how long they last."""

    initial_count: int = 10
    spawn_interval: float = 60.0
    duration_min: float = 60.0
    duration_max: float = 600.0


class VehicleState:
    """One vehicle: kinematics, behavior mode, and local event knowledge.

    ``event_table`` mirrors the notifications received from the market
    (listing id -> (location, attr)).  ``announced`` and ``claimed`` are the
    vehicle's own memory of what it already told the market, so each event
    is announced at most once and each listing's end is claimed at most
    once.
    """

    __slots__ = (
        "vehicle_id",
        "position",
        "direction",
        "velocity",
        "mode",
        "event_table",
        "announced",
        "claimed",
        "bogus_cursor",
        "emission_carry",
    )

    def __init__(
        self,
        vehicle_id: str,
        position: float,
        direction: int,
        velocity: float,
        mode: str = NORMAL,
    ):
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if mode not in (NORMAL, BOGUS, SELFISH):
            raise ValueError(f"unknown mode {mode!r}")
        self.vehicle_id = vehicle_id
        self.position = position
        self.direction = direction
        self.velocity = velocity
        self.mode = mode
        self.event_table: dict[str, tuple[float, str]] = {}
        self.announced: set[str] = set()
        self.claimed: set[str] = set()
        self.bogus_cursor = 0
        self.emission_carry = 0.0

    def __repr__(self) -> str:
        return (
            f"VehicleState({self.vehicle_id!r}, pos={self.position:.1f}, "
            f"dir={self.direction:+d}, vel={self.velocity:.1f}, {self.mode})"
        )


def step_vehicle(v: VehicleState, dt: float, road_length: float) -> VehicleState:
    """Advance one vehicle; position wraps around the ring."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    v.position = (v.position + v.direction * v.velocity * dt) % road_length
    return v


def sense_events(
    v: VehicleState,
    events: list[TrafficEvent],
    sensing_range: float,
    road_length: float,
) -> list[TrafficEvent]:
    """Events currently within sensing range, in id order."""
    if sensing_range <= 0:
        raise ValueError("sensing_range must be positive")
    pos = v.position
    return [
        e
        for e in events
        if ring_distance(pos, e.location, road_length) <= sensing_range
    ]


def _matches_any(
    location: float,
    attr: str,
    candidates: list[TrafficEvent],
    tolerance: float,
    road_length: float,
) -> bool:
    for e in candidates:
        if e.attr == attr and ring_distance(location, e.location, road_length) <= tolerance:
            return True
    return False


def emit_reports(
    v: VehicleState,
    sensed: list[TrafficEvent],
    false_map: FalseEventMap,
    now: float,
    road_length: float,
    location_tolerance: float,
    pass_range: float,
    bogus_rate: float = 1.0,
) -> list[Report]:
    """What this vehicle tells the market this second, by mode.

    ``pass_range`` is how close the vehicle must be to a known listing's
    location to judge the event gone; it must leave enough sensing margin
    that a real event anywhere within the correlation tolerance would still
    be seen.
    """
    if v.mode == SELFISH:
        return []

    if v.mode == BOGUS:
        v.emission_carry += bogus_rate
        reports = []
        while v.emission_carry >= 1.0 and false_map.entries:
            location, attr = false_map.entries[v.bogus_cursor % len(false_map.entries)]
            v.bogus_cursor += 1
            v.emission_carry -= 1.0
            reports.append(
                Report(v.vehicle_id, location, attr, CLAIM_EXISTS, now)
            )
        return reports

    reports = []
    for event in sensed:
        if event.event_id in v.announced:
            continue
        known = any(
            attr == event.attr
            and ring_distance(location, event.location, road_length) <= location_tolerance
            for location, attr in v.event_table.values()
        )
        if known:
            continue
        v.announced.add(event.event_id)
        reports.append(
            Report(v.vehicle_id, event.location, event.attr, CLAIM_EXISTS, now)
        )
    for listing_id, (location, attr) in v.event_table.items():
        if listing_id in v.claimed:
            continue
        if ring_distance(v.position, location, road_length) > pass_range:
            continue
        if _matches_any(location, attr, sensed, location_tolerance, road_length):
            continue
        v.claimed.add(listing_id)
        reports.append(
            Report(v.vehicle_id, location, attr, CLAIM_NONEXISTENT, now)
        )
    return reports


def spawn_events(
    now: float,
    rng: random.Random,
    road_length: float,
    schedule: EventSchedule,
    next_index: int = 0,
) -> list[TrafficEvent]:
    """Events that come into existence at this instant.

    At time zero a batch of ``initial_count`` events appears; afterwards one
    new event appears at every spawn interval.  Durations are uniform within
    the schedule's bounds for both.
    """
    if now == 0:
        count = schedule.initial_count
    elif now % schedule.spawn_interval == 0:
        count = 1
    else:
        count = 0
    events = []
    for i in range(count):
        location = rng.uniform(0.0, road_length)
        duration = rng.uniform(schedule.duration_min, schedule.duration_max)
        events.append(
            TrafficEvent(
                event_id=f"e{next_index + i:03d}",
                start=now,
                end=now + duration,
                location=location,
                attr=rng.choice(EVENT_ATTRS),
            )
        )
    return events


def generate_event_timeline(
    rng: random.Random,
    road_length: float,
    schedule: EventSchedule,
    horizon: float,
) -> list[TrafficEvent]:
    """All events for a run, generated up front for reproducibility."""
    events: list[TrafficEvent] = []
    t = 0.0
    while t <= horizon:
        events.extend(
            spawn_events(t, rng, road_length, schedule, next_index=len(events))
        )
        t += schedule.spawn_interval
    return events


def make_false_map(
    rng: random.Random,
    road_length: float,
    size: int,
    events_at_genesis: list[TrafficEvent],
    min_distance: float,
    attrs: tuple[str, ...] = EVENT_ATTRS,
) -> FalseEventMap:
    """Fabricated events, kept clear of anything real at generation time."""
    entries: list[tuple[float, str]] = []
    attempts = 0
    while len(entries) < size:
        attempts += 1
        if attempts > 1000 * max(size, 1):
            raise RuntimeError("could not place false events away from real ones")
        location = rng.uniform(0.0, road_length)
        if any(
            ring_distance(location, e.location, road_length) <= min_distance
            for e in events_at_genesis
        ):
            continue
        entries.append((location, rng.choice(attrs)))
    return FalseEventMap(entries=tuple(entries))


def make_vehicles(
    rng: random.Random,
    count: int,
    n_bogus: int,
    n_selfish: int,
    road_length: float,
    speed_min: float = 10.0,
    speed_max: float = 30.0,
) -> list[VehicleState]:
    """Place vehicles uniformly with random speed and direction.

    Modes are assigned by index (attackers first) so that a vehicle's id
    carries its mode across runs; placement randomness stays with the rng.
    """
    if n_bogus + n_selfish > count:
        raise ValueError("more attackers than vehicles")
    vehicles = []
    for i in range(count):
        if i < n_bogus:
            mode = BOGUS
        elif i < n_bogus + n_selfish:
            mode = SELFISH
        else:
            mode = NORMAL
        vehicles.append(
            VehicleState(
                vehicle_id=f"v{i:03d}",
                position=rng.uniform(0.0, road_length),
                direction=rng.choice((1, -1)),
                velocity=rng.uniform(speed_min, speed_max),
                mode=mode,
            )
        )
    return vehicles
