"""Event queue with a monotone integer-second clock."""

from __future__ import annotations

import heapq
from enum import IntEnum
from typing import NamedTuple, Optional

from .errors import InternalLogicError


class Kind(IntEnum):
    ARRIVAL = 0
    REGISTRATION_START = 1
    REGISTRATION_DONE = 2
    CONSULT_START = 3
    CONSULT_END = 4
    REQUEST_SENT = 5
    PREP_START = 6
    PREP_DONE = 7
    BATCH_DISPATCH = 8
    DELIVERY_ARRIVE = 9
    COURIER_RETURN = 10
    TREATMENT_START = 11
    SETUP_DONE = 12
    TREATMENT_END = 13


class Event(NamedTuple):
    time: int
    seq: int
    kind: Kind
    subject: int


class EventQueue:
    """Pending events ordered by ``(time, seq)``; ``seq`` is the insertion count."""

    __slots__ = ("_heap", "_seq", "now", "scheduled", "popped")

    def __init__(self) -> None:
        self._heap: list[Event] = []
        self._seq = 0
        self.now = 0
        self.scheduled = 0
        self.popped = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, time: int, kind: Kind, subject: int) -> Event:
        if time < self.now:
            raise InternalLogicError(
                f"cannot schedule {kind.name} at t={time}, clock is already at t={self.now}"
            )
        ev = Event(time, self._seq, kind, subject)
        self._seq += 1
        self.scheduled += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop_next(self) -> Optional[Event]:
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        self.now = ev.time
        self.popped += 1
        return ev

    def peek_time(self) -> Optional[int]:
        return self._heap[0].time if self._heap else None
