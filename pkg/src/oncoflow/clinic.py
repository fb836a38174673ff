"""One simulated day of the oncology department.

Patients pass reception, (optionally) their assigned oncologist, wait for a
therapy prepared at the detached pharmacy and carried over in courier
batches, then take a chair under a nurse who sets them up and monitors the
infusion. The day ends with the last discharge; the event queue is run
until empty so couriers finish their return legs.

Starts of service are applied immediately inside the handler that frees the
resource, so only completions, arrivals and courier movements sit in the
event queue. Every transition, queued or not, is appended to ``trace``.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .engine import EventQueue, Kind
from .errors import InternalLogicError
from .scenario import BatchPolicy, FixedBatch, Scenario
from .stochastics import (
    RandomSource,
    make_stream,
    pick_index,
    sample_patient_count,
    sample_value,
    to_seconds,
)

OC, C, O = "OC", "C", "O"
CLASS_NAMES = (OC, C, O)

RECORD_FIELDS = (
    "arrival", "registration_start", "registration_end", "consult_start", "consult_end",
    "request_sent", "prep_start", "prep_end", "delivered", "treatment_start", "treatment_end",
)

# substreams of a day's RandomSource
_COUNT, _PATIENTS, _BATCHES, _LEGS = range(4)
_DRAWS_PER_PATIENT = 9

PHARMACY, TO_CLINIC, CLINIC, TO_PHARMACY = "pharmacy", "in_transit_to_clinic", "clinic", "in_transit_to_pharmacy"


@dataclass(slots=True)
class PatientRecord:
    arrival: Optional[int] = None
    registration_start: Optional[int] = None
    registration_end: Optional[int] = None
    consult_start: Optional[int] = None
    consult_end: Optional[int] = None
    request_sent: Optional[int] = None
    prep_start: Optional[int] = None
    prep_end: Optional[int] = None
    delivered: Optional[int] = None
    treatment_start: Optional[int] = None
    treatment_end: Optional[int] = None

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in RECORD_FIELDS)


@dataclass(slots=True)
class Patient:
    id: int
    cls: str
    arrival: int
    oncologist: Optional[int] = None
    consult_len: Optional[int] = None
    prep_len: Optional[int] = None
    treat_len: Optional[int] = None
    record: PatientRecord = field(default_factory=PatientRecord)
    # resources actually used, for auditing
    technician: Optional[int] = None
    courier: Optional[int] = None
    nurse: Optional[int] = None

    @property
    def needs_consult(self) -> bool:
        return self.cls != C

    @property
    def needs_therapy(self) -> bool:
        return self.cls != O


@dataclass(slots=True)
class NurseState:
    id: int
    setup_busy_until: Optional[int] = None
    monitoring: list = field(default_factory=list)

    def setup_free(self, now: int) -> bool:
        return self.setup_busy_until is None or self.setup_busy_until <= now


@dataclass(slots=True)
class CourierState:
    id: int
    location: str = PHARMACY
    carrying: list = field(default_factory=list)


@dataclass
class PharmacyState:
    technicians: int
    request_list: deque = field(default_factory=deque)
    wip_list: dict = field(default_factory=dict)  # technician id -> patient id
    ready_list: list = field(default_factory=list)
    delivery_list: dict = field(default_factory=dict)  # courier id -> patient ids

    def free_technician(self) -> Optional[int]:
        for t in range(self.technicians):
            if t not in self.wip_list:
                return t
        return None


@dataclass
class DayResult:
    patients: tuple
    day_end: int
    event_count: int
    class_counts: dict
    trace: tuple = ()

    @property
    def records(self) -> tuple:
        return tuple(p.record for p in self.patients)

    @property
    def P(self) -> int:
        return len(self.patients)


# --- decision rules ----------------------------------------------------------


def next_batch_target(policy: BatchPolicy, outstanding: int, src) -> int:
    """Size of the next courier batch, never more than the therapies left to send."""
    if outstanding < 1:
        raise ValueError("outstanding must be >= 1")
    if isinstance(policy, FixedBatch):
        return min(policy.k, outstanding)
    span = policy.b - policy.a + 1
    k = policy.a + min(int(src.uniform() * span), span - 1)
    return min(k, outstanding)


def select_treatment_nurse(nurses: Sequence[NurseState], now: int, n_max: int) -> Optional[int]:
    """Least-loaded nurse whose setup is free and who has a monitoring slot; ties by id."""
    best = None
    for n in nurses:
        if not n.setup_free(now) or len(n.monitoring) >= n_max:
            continue
        if best is None or (len(n.monitoring), n.id) < (len(best.monitoring), best.id):
            best = n
    return None if best is None else best.id


def select_next_for_oncologist(queues, oncologist: int) -> Optional[int]:
    """Head of an oncologist's waiting heap of ``(registration_end, patient_id)``."""
    q = queues[oncologist]
    return q[0][1] if q else None


# --- day state ---------------------------------------------------------------


def _duration(groups, u_class: float, u_dur: float) -> int:
    i = pick_index([p for p, _ in groups], u_class)
    return to_seconds(sample_value(groups[i][1], u_dur))


class DayState:
    """Mutable state of one simulated day. Single-threaded."""

    def __init__(self, s: Scenario, src: RandomSource, trace: bool = True):
        self.s = s
        self.queue = EventQueue()
        self._batches = src.substream(_BATCHES)
        self._legs = src.substream(_LEGS)
        self._trace_on = trace
        self.trace: list = []

        self.patients = self._sample_patients(src)
        self.reception_queue: deque = deque()
        self.reception_busy = 0
        self.onc_queues: list = [[] for _ in range(s.oncologists)]
        self.onc_busy: list = [None] * s.oncologists
        self.pharmacy = PharmacyState(s.pharmacy_technicians)
        self.couriers = [CourierState(i) for i in range(s.couriers)]
        self.nurses = [NurseState(i) for i in range(s.treatment_nurses)]
        self.chairs_busy = 0
        self.treatment_queue: deque = deque()

        self.undispatched = sum(1 for p in self.patients if p.needs_therapy)
        self.batch_target = (
            next_batch_target(s.batch_policy, self.undispatched, self._batches)
            if self.undispatched else 0
        )
        for p in self.patients:
            self.queue.schedule(p.arrival, Kind.ARRIVAL, p.id)

    def _sample_patients(self, src: RandomSource) -> list:
        s = self.s
        count = sample_patient_count(s.patient_count.mu, s.patient_count.sigma,
                                     src.substream(_COUNT))
        stream = src.substream(_PATIENTS)
        prep_w, treat_w = s.therapy_weights
        windows = s.arrival_windows
        win_w = [w.probability for w in windows]
        drafts = []
        for k in range(count):
            u = [stream.uniform() for _ in range(_DRAWS_PER_PATIENT)]
            cls = CLASS_NAMES[pick_index(s.class_mix, u[0])]
            w = windows[pick_index(win_w, u[1])]
            minutes = max(1, (w.end_offset - w.start_offset) // 60)
            arrival = w.start_offset + 60 * min(int(u[2] * minutes), minutes - 1)
            p = Patient(k, cls, arrival)
            if cls != C:
                p.oncologist = min(int(u[3] * s.oncologists), s.oncologists - 1)
                p.consult_len = to_seconds(sample_value(s.consult_duration, u[4]))
            if cls != O:
                p.prep_len = _duration(s.prep_classes, u[5], u[6])
                p.treat_len = _duration(s.treatment_classes, u[7], u[8])
            p.record.arrival = arrival
            drafts.append(p)
        # ids follow arrival order; equal arrivals keep sampling order
        drafts.sort(key=lambda p: (p.arrival, p.id))
        for i, p in enumerate(drafts):
            p.id = i
        return drafts

    # -- helpers

    def _log(self, kind: Kind, subject: int) -> None:
        if self._trace_on:
            self.trace.append((self.queue.now, kind, subject))

    def _leg_time(self) -> int:
        s = self.s
        delayed = self._legs.uniform() < s.delay_probability
        extra = sample_value(s.delay_extra, self._legs.uniform())
        return s.delivery_base + (to_seconds(extra) if delayed else 0)

    # -- resource starts

    def _try_registration(self) -> None:
        now = self.queue.now
        while self.reception_queue and self.reception_busy < self.s.reception_nurses:
            pid = self.reception_queue.popleft()
            self.reception_busy += 1
            self.patients[pid].record.registration_start = now
            self._log(Kind.REGISTRATION_START, pid)
            self.queue.schedule(now + self.s.registration_duration, Kind.REGISTRATION_DONE, pid)

    def _try_consult(self, j: int) -> None:
        if self.onc_busy[j] is not None:
            return
        pid = select_next_for_oncologist(self.onc_queues, j)
        if pid is None:
            return
        heapq.heappop(self.onc_queues[j])
        p = self.patients[pid]
        self.onc_busy[j] = pid
        p.record.consult_start = self.queue.now
        self._log(Kind.CONSULT_START, pid)
        self.queue.schedule(self.queue.now + p.consult_len, Kind.CONSULT_END, pid)

    def _send_request(self, p: Patient) -> None:
        p.record.request_sent = self.queue.now
        self.pharmacy.request_list.append(p.id)
        self._log(Kind.REQUEST_SENT, p.id)
        self._try_prep()

    def _try_prep(self) -> None:
        ph = self.pharmacy
        now = self.queue.now
        while ph.request_list:
            t = ph.free_technician()
            if t is None:
                return
            pid = ph.request_list.popleft()
            ph.wip_list[t] = pid
            p = self.patients[pid]
            p.technician = t
            p.record.prep_start = now
            self._log(Kind.PREP_START, pid)
            self.queue.schedule(now + p.prep_len, Kind.PREP_DONE, pid)

    def _try_dispatch(self) -> None:
        ph = self.pharmacy
        now = self.queue.now
        while self.undispatched:
            target = min(self.batch_target, self.undispatched)
            if len(ph.ready_list) < target:
                return
            courier = next((c for c in self.couriers if c.location == PHARMACY), None)
            if courier is None:
                return
            batch = ph.ready_list[:target]
            del ph.ready_list[:target]
            self.undispatched -= target
            courier.location = TO_CLINIC
            courier.carrying = batch
            ph.delivery_list[courier.id] = batch
            for pid in batch:
                self.patients[pid].courier = courier.id
            self._log(Kind.BATCH_DISPATCH, courier.id)
            self.queue.schedule(now + self._leg_time(), Kind.DELIVERY_ARRIVE, courier.id)
            if self.undispatched:
                self.batch_target = next_batch_target(
                    self.s.batch_policy, self.undispatched, self._batches)

    def _try_treatment(self) -> None:
        s = self.s
        now = self.queue.now
        while self.treatment_queue and self.chairs_busy < s.chairs:
            nid = select_treatment_nurse(self.nurses, now, s.n_max)
            if nid is None:
                return
            nurse = self.nurses[nid]
            pid = self.treatment_queue.popleft()
            p = self.patients[pid]
            self.chairs_busy += 1
            nurse.monitoring.append(pid)
            setup = min(s.setup_duration, p.treat_len)
            nurse.setup_busy_until = now + setup
            p.nurse = nid
            p.record.treatment_start = now
            self._log(Kind.TREATMENT_START, pid)
            if setup > 0:
                self.queue.schedule(now + setup, Kind.SETUP_DONE, nid)
            self.queue.schedule(now + p.treat_len, Kind.TREATMENT_END, pid)

    # -- event handlers

    def step(self) -> bool:
        """Apply the next queued event. Returns False once the queue is empty."""
        ev = self.queue.pop_next()
        if ev is None:
            return False
        kind, subj = ev.kind, ev.subject
        self._log(kind, subj)
        now = ev.time
        if kind == Kind.ARRIVAL:
            self.reception_queue.append(subj)
            self._try_registration()
        elif kind == Kind.REGISTRATION_DONE:
            p = self.patients[subj]
            self.reception_busy -= 1
            p.record.registration_end = now
            if p.needs_consult:
                heapq.heappush(self.onc_queues[p.oncologist], (now, p.id))
                self._try_consult(p.oncologist)
            else:
                self._send_request(p)
            self._try_registration()
        elif kind == Kind.CONSULT_END:
            p = self.patients[subj]
            j = p.oncologist
            if self.onc_busy[j] != subj:
                raise InternalLogicError(f"oncologist {j} was not seeing patient {subj}")
            self.onc_busy[j] = None
            p.record.consult_end = now
            if p.needs_therapy:
                self._send_request(p)
            self._try_consult(j)
        elif kind == Kind.PREP_DONE:
            p = self.patients[subj]
            if self.pharmacy.wip_list.get(p.technician) != subj:
                raise InternalLogicError(f"therapy {subj} finished but was not in progress")
            del self.pharmacy.wip_list[p.technician]
            p.record.prep_end = now
            self.pharmacy.ready_list.append(subj)
            self._try_prep()
            self._try_dispatch()
        elif kind == Kind.DELIVERY_ARRIVE:
            c = self.couriers[subj]
            c.location = CLINIC
            for pid in c.carrying:
                self.patients[pid].record.delivered = now
                self.treatment_queue.append(pid)
            self.pharmacy.delivery_list.pop(c.id)
            c.carrying = []
            c.location = TO_PHARMACY
            self.queue.schedule(now + self._leg_time(), Kind.COURIER_RETURN, c.id)
            self._try_treatment()
        elif kind == Kind.COURIER_RETURN:
            self.couriers[subj].location = PHARMACY
            self._try_dispatch()
        elif kind == Kind.SETUP_DONE:
            self._try_treatment()
        elif kind == Kind.TREATMENT_END:
            p = self.patients[subj]
            self.nurses[p.nurse].monitoring.remove(subj)
            self.chairs_busy -= 1
            p.record.treatment_end = now
            self._try_treatment()
        else:
            raise InternalLogicError(f"unexpected queued event {kind.name}")
        return True

    def finish(self) -> DayResult:
        if len(self.queue):
            raise InternalLogicError("day finished with pending events")
        day_end = 0
        for p in self.patients:
            r = p.record
            last = r.consult_end if p.cls == O else r.treatment_end
            if last is None:
                raise InternalLogicError(f"patient {p.id} ({p.cls}) never completed")
            day_end = max(day_end, last)
        counts = {c: 0 for c in CLASS_NAMES}
        for p in self.patients:
            counts[p.cls] += 1
        return DayResult(
            patients=tuple(self.patients),
            day_end=day_end,  # last discharge; a returning courier does not extend the day
            event_count=self.queue.popped,
            class_counts=counts,
            trace=tuple(self.trace),
        )


def init_day(s: Scenario, src: RandomSource, trace: bool = True) -> DayState:
    return DayState(s, src, trace=trace)


SeedTriple = tuple


def run_day(s: Scenario, seed: Union[SeedTriple, RandomSource], trace: bool = True) -> DayResult:
    """Simulate one day; a pure function of the scenario and seed triple."""
    src = seed if isinstance(seed, RandomSource) else make_stream(*seed)
    state = DayState(s, src, trace=trace)
    while state.step():
        pass
    return state.finish()
