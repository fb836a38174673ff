import random

import pytest

from oncoflow.engine import EventQueue, Kind
from oncoflow.errors import InternalLogicError


def test_equal_times_pop_in_insertion_order():
    q = EventQueue()
    q.schedule(100, Kind.ARRIVAL, 1)  # x
    q.schedule(100, Kind.ARRIVAL, 2)  # y
    assert q.pop_next().subject == 1
    assert q.pop_next().subject == 2


def test_time_order():
    q = EventQueue()
    q.schedule(5, Kind.ARRIVAL, 0)
    q.schedule(3, Kind.ARRIVAL, 1)
    assert q.pop_next().time == 3


def test_empty_queue_returns_none():
    assert EventQueue().pop_next() is None


def test_single_event():
    q = EventQueue()
    q.schedule(7, Kind.TREATMENT_END, 4)
    ev = q.pop_next()
    assert (ev.time, ev.kind, ev.subject) == (7, Kind.TREATMENT_END, 4)
    assert len(q) == 0


def test_scheduling_in_the_past_is_a_logic_error():
    q = EventQueue()
    q.schedule(10, Kind.ARRIVAL, 0)
    q.pop_next()
    with pytest.raises(InternalLogicError):
        q.schedule(9, Kind.ARRIVAL, 1)
    q.schedule(10, Kind.ARRIVAL, 1)  # same instant is fine


def test_random_events_match_stable_sort():
    rng = random.Random(0)
    q = EventQueue()
    inserted = []
    for i in range(10_000):
        t = rng.randrange(0, 500)
        ev = q.schedule(t, Kind.ARRIVAL, i)
        inserted.append(ev)
    expected = sorted(inserted, key=lambda e: e.time)  # stable: keeps insertion order
    popped = []
    while (ev := q.pop_next()) is not None:
        popped.append(ev)
    assert popped == expected
    assert q.scheduled == q.popped == 10_000


def test_interleaved_schedule_keeps_clock_monotone():
    rng = random.Random(1)
    q = EventQueue()
    for i in range(50):
        q.schedule(rng.randrange(100), Kind.ARRIVAL, i)
    last = -1
    n = 0
    while (ev := q.pop_next()) is not None:
        assert ev.time >= last
        last = ev.time
        n += 1
        if n < 2000:
            q.schedule(ev.time + rng.randrange(0, 30), Kind.PREP_DONE, n)
    assert q.scheduled == q.popped
