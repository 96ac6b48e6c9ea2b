"""Tests for ring-road kinematics, sensing, and report emission."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcash_sim.protocol import CLAIM_EXISTS, CLAIM_NONEXISTENT
from vcash_sim.world import (
    BOGUS,
    EVENT_ATTRS,
    NORMAL,
    SELFISH,
    EventSchedule,
    FalseEventMap,
    TrafficEvent,
    VehicleState,
    emit_reports,
    generate_event_timeline,
    make_false_map,
    make_vehicles,
    ring_distance,
    sense_events,
    spawn_events,
    step_vehicle,
)

ROAD = 5000.0
EMPTY_MAP = FalseEventMap(entries=())


def vehicle(position=0.0, direction=1, velocity=20.0, mode=NORMAL, vid="v000"):
    return VehicleState(vid, position, direction, velocity, mode)


def event(eid="e000", location=0.0, attr="jam", start=0.0, end=600.0):
    return TrafficEvent(eid, start, end, location, attr)


# ----------------------------------------------------------------------
# Kinematics
# ----------------------------------------------------------------------


def test_position_wraps_forward():
    v = vehicle(position=4990.0, direction=1, velocity=20.0)
    step_vehicle(v, 1.0, ROAD)
    assert v.position == pytest.approx(10.0)


def test_position_moves_backward():
    v = vehicle(position=100.0, direction=-1, velocity=10.0)
    step_vehicle(v, 1.0, ROAD)
    assert v.position == pytest.approx(90.0)


def test_fast_vehicle_laps_the_ring():
    v = vehicle(position=0.0, direction=1, velocity=30.0)
    for _ in range(1000):
        step_vehicle(v, 1.0, ROAD)
    # 30 m/s for 1000 s is 30000 m: six full laps, back at the start.
    assert v.position == pytest.approx(0.0, abs=1e-6)


@given(
    position=st.floats(0.0, ROAD - 1e-9),
    direction=st.sampled_from([1, -1]),
    velocity=st.floats(10.0, 30.0),
    steps=st.integers(1, 200),
)
@settings(max_examples=200, deadline=None)
def test_position_stays_on_the_ring(position, direction, velocity, steps):
    v = vehicle(position=position, direction=direction, velocity=velocity)
    for _ in range(steps):
        step_vehicle(v, 1.0, ROAD)
        assert 0.0 <= v.position < ROAD


# ----------------------------------------------------------------------
# Sensing
# ----------------------------------------------------------------------


def test_sensing_sees_across_the_wrap():
    v = vehicle(position=0.0)
    e = event(location=4950.0)
    assert sense_events(v, [e], 100.0, ROAD) == [e]
    assert ring_distance(0.0, 4950.0, ROAD) == pytest.approx(50.0)


def test_sensing_misses_out_of_range_events():
    v = vehicle(position=0.0)
    assert sense_events(v, [event(location=200.0)], 100.0, ROAD) == []


def test_sensing_with_no_events():
    assert sense_events(vehicle(), [], 100.0, ROAD) == []


# ----------------------------------------------------------------------
# Event lifecycle
# ----------------------------------------------------------------------


def test_initial_batch_has_ten_events():
    rng = random.Random(1)
    events = spawn_events(0.0, rng, ROAD, EventSchedule())
    assert len(events) == 10


def test_one_event_per_spawn_interval():
    rng = random.Random(1)
    schedule = EventSchedule()
    assert len(spawn_events(60.0, rng, ROAD, schedule)) == 1
    assert len(spawn_events(120.0, rng, ROAD, schedule)) == 1
    assert len(spawn_events(61.0, rng, ROAD, schedule)) == 0


def test_durations_are_bounded_and_uniform():
    rng = random.Random(7)
    schedule = EventSchedule(initial_count=10000)
    events = spawn_events(0.0, rng, ROAD, schedule)
    durations = [e.end - e.start for e in events]
    assert all(60.0 <= d <= 600.0 for d in durations)
    mean = sum(durations) / len(durations)
    assert mean == pytest.approx(330.0, abs=15.0)


def test_timeline_is_deterministic_per_seed():
    t1 = generate_event_timeline(random.Random(3), ROAD, EventSchedule(), 1000.0)
    t2 = generate_event_timeline(random.Random(3), ROAD, EventSchedule(), 1000.0)
    assert t1 == t2
    # 10 initial + one per minute from t=60 through t=1000
    assert len(t1) == 10 + 16


def test_event_must_end_after_start():
    with pytest.raises(ValueError):
        TrafficEvent("e", 5.0, 5.0, 0.0, "jam")


def test_false_map_avoids_live_events():
    rng = random.Random(9)
    events = [event(eid=f"e{i}", location=i * 500.0) for i in range(10)]
    fmap = make_false_map(rng, ROAD, 10, events, min_distance=50.0)
    assert len(fmap.entries) == 10
    for location, attr in fmap.entries:
        assert attr in EVENT_ATTRS
        for e in events:
            assert ring_distance(location, e.location, ROAD) > 50.0


# ----------------------------------------------------------------------
# Report emission by mode
# ----------------------------------------------------------------------


def test_selfish_vehicles_never_report():
    v = vehicle(mode=SELFISH)
    sensed = [event()]
    fmap = FalseEventMap(entries=((1000.0, "jam"),))
    for t in range(100):
        assert emit_reports(v, sensed, fmap, float(t), ROAD, 50.0, 50.0) == []


def test_bogus_vehicle_fabricates_one_report_per_second():
    v = vehicle(mode=BOGUS)
    fmap = FalseEventMap(entries=((100.0, "jam"), (200.0, "accident")))
    for t in range(10):
        reports = emit_reports(v, [], fmap, float(t), ROAD, 50.0, 50.0)
        assert len(reports) == 1
        assert reports[0].claim == CLAIM_EXISTS
    # round-robin over the shared map
    assert v.bogus_cursor == 10


def test_bogus_vehicle_ignores_what_it_senses():
    v = vehicle(mode=BOGUS)
    fmap = FalseEventMap(entries=((100.0, "jam"),))
    reports = emit_reports(v, [event(location=0.0)], fmap, 0.0, ROAD, 50.0, 50.0)
    assert [r.location for r in reports] == [100.0]


def test_bogus_rate_below_one_skips_ticks():
    v = vehicle(mode=BOGUS)
    fmap = FalseEventMap(entries=((100.0, "jam"),))
    total = 0
    for t in range(10):
        total += len(emit_reports(v, [], fmap, float(t), ROAD, 50.0, 50.0, bogus_rate=0.5))
    assert total == 5


def test_normal_vehicle_announces_each_event_once():
    v = vehicle(position=0.0)
    e = event(location=50.0)
    first = emit_reports(v, [e], EMPTY_MAP, 0.0, ROAD, 50.0, 50.0)
    assert len(first) == 1
    assert first[0].claim == CLAIM_EXISTS
    assert first[0].location == e.location
    again = emit_reports(v, [e], EMPTY_MAP, 1.0, ROAD, 50.0, 50.0)
    assert again == []


def test_normal_vehicle_skips_events_already_broadcast():
    v = vehicle(position=0.0)
    v.event_table["L0001"] = (60.0, "jam")
    e = event(location=50.0, attr="jam")
    assert emit_reports(v, [e], EMPTY_MAP, 0.0, ROAD, 50.0, 50.0) == []


def test_normal_vehicle_claims_nonexistence_when_passing_a_dead_listing():
    v = vehicle(position=1000.0)
    v.event_table["L0001"] = (1020.0, "jam")
    reports = emit_reports(v, [], EMPTY_MAP, 0.0, ROAD, 50.0, 50.0)
    assert len(reports) == 1
    assert reports[0].claim == CLAIM_NONEXISTENT
    assert reports[0].location == 1020.0
    # claimed once only
    assert emit_reports(v, [], EMPTY_MAP, 1.0, ROAD, 50.0, 50.0) == []


def test_no_claim_while_the_event_is_still_there():
    v = vehicle(position=1000.0)
    v.event_table["L0001"] = (1020.0, "jam")
    live = event(location=1040.0, attr="jam")
    assert emit_reports(v, [live], EMPTY_MAP, 0.0, ROAD, 50.0, 50.0) == []


def test_no_claim_from_far_away():
    v = vehicle(position=1000.0)
    v.event_table["L0001"] = (1200.0, "jam")
    assert emit_reports(v, [], EMPTY_MAP, 0.0, ROAD, 50.0, 50.0) == []


# ----------------------------------------------------------------------
# Fleet construction
# ----------------------------------------------------------------------


def test_fleet_modes_are_assigned_by_id():
    rng = random.Random(11)
    fleet = make_vehicles(rng, 10, n_bogus=2, n_selfish=1, road_length=ROAD)
    assert [v.mode for v in fleet[:3]] == [BOGUS, BOGUS, SELFISH]
    assert all(v.mode == NORMAL for v in fleet[3:])
    assert [v.vehicle_id for v in fleet[:2]] == ["v000", "v001"]


def test_fleet_speeds_and_positions_in_range():
    rng = random.Random(11)
    fleet = make_vehicles(rng, 200, 0, 0, ROAD)
    for v in fleet:
        assert 10.0 <= v.velocity <= 30.0
        assert 0.0 <= v.position < ROAD
        assert v.direction in (1, -1)


def test_too_many_attackers_rejected():
    with pytest.raises(ValueError):
        make_vehicles(random.Random(1), 5, 4, 2, ROAD)
