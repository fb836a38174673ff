"""CSV readers and writers for campaign outputs.

Minutes and percents are written with two decimals, p-values with six;
nothing is written in scientific notation. Column headers are fixed.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence

from .clinic import RECORD_FIELDS, DayResult
from .errors import DataError
from .experiments import (
    ComparisonReport,
    DoeResult,
    ReplicationResult,
    ValidationReport,
    replication_result,
)
from .kpi import DayKpi
from .scenario import FACTORS
from .stats import AnovaTable

REPLICATION_HEADER = ["replicate", "P", "F_min", "F_bar_min", "WT_bar_min", "Eff_pct"]
TRACE_HEADER = ["id", "class", *RECORD_FIELDS]
DOE_HEADER = ["config", *FACTORS, "E_F_bar_min", "ci_low", "ci_high", "rank"]
MARGINALS_HEADER = ["factor", "level", "mean_E_F_bar_min"]
ANOVA_HEADER = ["source", "df", "SS", "MS", "F", "p", "adj_R2_pct"]
COMPARISON_HEADER = ["kpi", "a_mean", "a_ci_low", "a_ci_high", "b_mean", "b_ci_low",
                     "b_ci_high", "dev_pct", "t", "p"]
VALIDATION_HEADER = ["kpi", "real_mean", "real_ci_low", "real_ci_high", "sim_mean",
                     "sim_ci_low", "sim_ci_high", "dev_pct", "p_value"]
REAL_DATA_HEADER = ["day", "F_bar_min", "WT_bar_min", "Eff_pct"]


def f2(x: float) -> str:
    if x is None:
        return ""
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return f"{x:.2f}"


def f6(x: float) -> str:
    if x is None:
        return ""
    if math.isnan(x) or math.isinf(x):
        return str(x)
    return f"{x:.6f}"


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _ci_cells(ci, fmt=f2) -> list[str]:
    return ["", ""] if ci is None else [fmt(ci[0]), fmt(ci[1])]


def write_replications(path: Path, result: ReplicationResult) -> None:
    _write(path, REPLICATION_HEADER, (
        [i, k.P, f2(k.F), f2(k.F_bar), f2(k.WT_bar), f2(k.Eff)]
        for i, k in enumerate(result.kpis)
    ))


def _read_rows(path: Path, header: Sequence[str]) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != list(header):
                raise DataError(f"{path}: expected header {','.join(header)}")
            return list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _num(row: dict, key: str, path: Path, line: int) -> float:
    try:
        v = float(row[key])
    except (TypeError, ValueError):
        raise DataError(f"{path}:{line}: column {key} is not a number ({row[key]!r})") from None
    if not math.isfinite(v):
        raise DataError(f"{path}:{line}: column {key} is not finite")
    return v


def read_replications(path: Path) -> ReplicationResult:
    rows = _read_rows(path, REPLICATION_HEADER)
    kpis = []
    for line, row in enumerate(rows, start=2):
        kpis.append(DayKpi(
            P=int(_num(row, "P", path, line)),
            F=_num(row, "F_min", path, line),
            F_bar=_num(row, "F_bar_min", path, line),
            WT_bar=_num(row, "WT_bar_min", path, line),
            Eff=_num(row, "Eff_pct", path, line),
        ))
    if not kpis:
        raise DataError(f"{path}: no replicate rows")
    return replication_result(Path(path).stem, kpis)


def read_real_days(path: Path) -> list[DayKpi]:
    """Observed per-day KPIs (patient count and total flowtime unknown)."""
    rows = _read_rows(path, REAL_DATA_HEADER)
    days = []
    for line, row in enumerate(rows, start=2):
        f_bar = _num(row, "F_bar_min", path, line)
        wt_bar = _num(row, "WT_bar_min", path, line)
        eff = _num(row, "Eff_pct", path, line)
        if f_bar <= 0 or wt_bar < 0 or not 0 <= eff <= 100:
            raise DataError(f"{path}:{line}: KPI values out of range")
        days.append(DayKpi(P=0, F=math.nan, F_bar=f_bar, WT_bar=wt_bar, Eff=eff))
    if not days:
        raise DataError(f"{path}: no observed days")
    return days


def write_trace(path: Path, day: DayResult) -> None:
    _write(path, TRACE_HEADER, (
        [p.id, p.cls, *("" if v is None else v for v in p.record.as_tuple())]
        for p in day.patients
    ))


def write_doe(path: Path, d: DoeResult) -> None:
    _write(path, DOE_HEADER, (
        [r.number, *r.levels.as_tuple(), f2(r.E_F_bar), *_ci_cells(r.ci95), r.rank]
        for r in d.rows
    ))


def write_marginals(path: Path, d: DoeResult) -> None:
    _write(path, MARGINALS_HEADER, (
        [f, lv, f2(m)] for (f, lv), m in d.marginals.items()
    ))


def write_anova(path: Path, t: AnovaTable) -> None:
    rows = [[r.name, r.df, f2(r.ss), f2(r.ms), f2(r.F), f6(r.p), ""] for r in t.rows]
    m = t.model
    rows.append([m.name, m.df, f2(m.ss), f2(m.ms), f2(m.F), f6(m.p), f2(100.0 * t.adj_r2)])
    rows.append(["Error", t.error_df, f2(t.error_ss), f2(t.error_ms), "", "", ""])
    rows.append(["Total", t.total_df, f2(t.total_ss), "", "", "", ""])
    _write(path, ANOVA_HEADER, rows)


def write_comparison(path: Path, c: ComparisonReport) -> None:
    _write(path, COMPARISON_HEADER, (
        [r.kpi, f2(r.a_mean), *_ci_cells(r.a_ci95), f2(r.b_mean), *_ci_cells(r.b_ci95),
         f2(r.dev_pct), f6(r.t), f6(r.p)]
        for r in c.rows
    ))


def write_validation(path: Path, v: ValidationReport) -> None:
    _write(path, VALIDATION_HEADER, (
        [r.kpi, f2(r.real_mean), *_ci_cells(r.real_ci95), f2(r.sim_mean),
         *_ci_cells(r.sim_ci95), f2(r.dev_pct), f6(r.p)]
        for r in v.rows
    ))
