"""Patient and day key performance indicators.

Length of stay runs from arrival to the last stage end (treatment end, or
consultation end for control patients). Waiting is length of stay minus
value-added time: registration, consultation and treatment.
Arithmetic is done in seconds and reported in minutes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataError


@dataclass(frozen=True)
class DayKpi:
    P: int
    F: float  # minutes, sum of lengths of stay
    F_bar: float
    WT_bar: float
    Eff: float  # percent

    def get(self, name: str) -> float:
        return getattr(self, name)


KPI_NAMES = ("F_bar", "WT_bar", "Eff")


def _span(r, start: str, end: str) -> int:
    a, b = getattr(r, start), getattr(r, end)
    if a is None or b is None:
        raise DataError(f"record lacks {start}/{end}")
    return b - a


def patient_seconds(r) -> tuple[int, int]:
    """(length of stay, waiting) in seconds for one PatientRecord."""
    if r.arrival is None:
        raise DataError("record lacks arrival")
    value_added = _span(r, "registration_start", "registration_end")
    therapy = r.request_sent is not None or r.treatment_start is not None or r.delivered is not None
    if r.consult_start is not None or r.consult_end is not None:
        value_added += _span(r, "consult_start", "consult_end")
    elif not therapy:
        raise DataError("record has neither a consultation nor a treatment")
    if therapy:
        value_added += _span(r, "treatment_start", "treatment_end")
        end = r.treatment_end
    else:
        end = r.consult_end
    los = end - r.arrival
    return los, los - value_added


def patient_kpis(r) -> tuple[float, float]:
    """(length_of_stay, waiting) in minutes."""
    los, wait = patient_seconds(r)
    return los / 60.0, wait / 60.0


def eff(f_bar: float, wt_bar: float) -> float:
    """Value-added share of the mean stay, in percent."""
    if f_bar == 0:
        raise DataError("mean flowtime is zero")
    return (f_bar - wt_bar) / f_bar * 100.0


def kpis_from_records(records: Sequence) -> DayKpi:
    if not records:
        raise DataError("no patient records")
    los_total = 0
    wait_total = 0
    for r in records:
        los, wait = patient_seconds(r)
        los_total += los
        wait_total += wait
    n = len(records)
    f_bar = los_total / n / 60.0
    wt_bar = wait_total / n / 60.0
    return DayKpi(P=n, F=los_total / 60.0, F_bar=f_bar, WT_bar=wt_bar, Eff=eff(f_bar, wt_bar))


def day_kpis(d) -> DayKpi:
    return kpis_from_records(d.records)


def expected_kpi(values: Iterable[float]) -> float:
    vals = list(values)
    if not vals:
        raise DataError("expected value of an empty sample")
    return math.fsum(vals) / len(vals)


def percent_deviation(sim: float, real_value: float) -> float:
    if real_value == 0:
        raise DataError("reference value is zero")
    return abs((sim - real_value) / real_value * 100.0)
