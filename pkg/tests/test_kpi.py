import random
from dataclasses import replace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oncoflow.clinic import RECORD_FIELDS, PatientRecord, run_day
from oncoflow.errors import DataError
from oncoflow.kpi import (
    day_kpis,
    eff,
    expected_kpi,
    kpis_from_records,
    patient_kpis,
    percent_deviation,
)
from oncoflow.scenario import status_quo_scenario


def record(**kw):
    return PatientRecord(**kw)


HAND = record(arrival=1800, registration_start=1800, registration_end=1860,
              consult_start=1860, consult_end=3060, request_sent=3060, prep_start=3060,
              prep_end=3360, delivered=3960, treatment_start=3960, treatment_end=7560)


def test_eff_on_observed_means():
    assert eff(265.46, 138.28) == pytest.approx(47.91, abs=0.005)


@pytest.mark.parametrize("sim, ref, dev, tol", [
    (259.50, 265.46, 2.25, 0.005),
    (133.99, 138.28, 3.10, 0.005),
    (208.53, 260.17, 19.85, 0.01),
    (85.23, 136.87, 37.73, 0.01),
    (48.84, 47.91, 1.94, 0.005),
])
def test_percent_deviation_table_values(sim, ref, dev, tol):
    assert percent_deviation(sim, ref) == pytest.approx(dev, abs=tol)


def test_eff_deviation_best_vs_status_quo():
    # efficiencies implied by the two (F, WT) pairs
    best, quo = eff(208.53, 85.23), eff(260.17, 136.87)
    assert percent_deviation(best, quo) == pytest.approx(24.77, abs=0.01)


def test_deviation_of_equal_values_is_zero():
    assert percent_deviation(12.5, 12.5) == 0


def test_deviation_against_zero_reference():
    with pytest.raises(DataError):
        percent_deviation(1.0, 0.0)


def test_hand_trace_kpis():
    assert patient_kpis(HAND) == (96.0, 15.0)
    d = kpis_from_records([HAND])
    assert (d.P, d.F, d.F_bar, d.WT_bar) == (1, 96.0, 96.0, 15.0)
    assert d.Eff == pytest.approx(84.375)


def test_zero_wait_patient():
    r = record(arrival=0, registration_start=0, registration_end=60, consult_start=60,
               consult_end=600, request_sent=600, prep_start=600, prep_end=600,
               delivered=600, treatment_start=600, treatment_end=4200)
    assert patient_kpis(r)[1] == 0
    assert kpis_from_records([r]).Eff == 100.0


def test_control_patient_without_queues():
    r = record(arrival=1000, registration_start=1000, registration_end=1060,
               consult_start=1060, consult_end=2000)
    los, wait = patient_kpis(r)
    assert los == pytest.approx(1000 / 60)
    assert wait == 0


def test_missing_timestamp_is_data_error():
    with pytest.raises(DataError):
        patient_kpis(replace(HAND, treatment_end=None))
    with pytest.raises(DataError):
        patient_kpis(replace(HAND, arrival=None))
    with pytest.raises(DataError):
        patient_kpis(record(arrival=0, registration_start=0, registration_end=60))


def test_expected_kpi():
    assert expected_kpi([1, 2, 3]) == 2
    assert expected_kpi([4.25]) == 4.25
    with pytest.raises(DataError):
        expected_kpi([])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.randoms())
def test_expected_kpi_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert expected_kpi(xs) == expected_kpi(ys)


def test_scale_consistency():
    day = run_day(status_quo_scenario(), (4, 0, 0))
    base = day_kpis(day)
    doubled = [PatientRecord(*(None if v is None else 2 * v for v in r.as_tuple()))
               for r in day.records]
    scaled = kpis_from_records(doubled)
    assert scaled.F_bar == pytest.approx(2 * base.F_bar)
    assert scaled.WT_bar == pytest.approx(2 * base.WT_bar)
    assert scaled.Eff == pytest.approx(base.Eff)


def test_simulated_day_invariants():
    s = status_quo_scenario()
    for i in range(200):
        d = day_kpis(run_day(s, (6, 0, i), trace=False))
        assert d.F_bar == pytest.approx(d.F / d.P)
        assert 0 <= d.WT_bar <= d.F_bar
        assert 0 <= d.Eff <= 100
        assert d.Eff == (d.F_bar - d.WT_bar) / d.F_bar * 100


def test_record_field_order():
    assert RECORD_FIELDS[0] == "arrival" and RECORD_FIELDS[-1] == "treatment_end"
    rng = random.Random(0)
    vals = sorted(rng.randrange(10**5) for _ in RECORD_FIELDS)
    assert PatientRecord(*vals).as_tuple() == tuple(vals)
