"""Replication campaigns, the full-factorial DOE and comparison reports."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .clinic import run_day
from .errors import DataError
from .kpi import KPI_NAMES, DayKpi, day_kpis, expected_kpi, percent_deviation
from .scenario import (
    FACTOR_LEVELS,
    FACTORS,
    FactorLevels,
    Scenario,
    all_factor_levels,
    apply_factor_levels,
)
from .stats import AnovaTable, SampleSummary, factorial_anova, paired_t_test, summarize
from .stochastics import make_stream

_CHUNK = 250


def default_workers() -> int:
    env = os.environ.get("ONCOFLOW_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"ONCOFLOW_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError("ONCOFLOW_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def simulate_kpis(s: Scenario, base_seed: int, stream_index: int,
                  replicates: Sequence[int]) -> list[DayKpi]:
    return [
        day_kpis(run_day(s, make_stream(base_seed, stream_index, i), trace=False))
        for i in replicates
    ]


def _task(args) -> list[DayKpi]:
    return simulate_kpis(*args)


def _run_tasks(tasks: list, workers: Optional[int]) -> list[list[DayKpi]]:
    """Evaluate ``simulate_kpis`` tasks; output order always matches ``tasks``."""
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(_task, tasks))


def _chunks(omega: int) -> list[range]:
    return [range(i, min(i + _CHUNK, omega)) for i in range(0, omega, _CHUNK)]


@dataclass(frozen=True)
class ReplicationResult:
    scenario_id: str
    omega: int
    kpis: tuple[DayKpi, ...]
    summaries: dict = field(default_factory=dict)  # empty when omega < 2

    def values(self, name: str) -> list[float]:
        return [k.get(name) for k in self.kpis]

    def expected(self, name: str) -> float:
        return expected_kpi(self.values(name))

    @property
    def E_F_bar(self) -> float:
        return self.expected("F_bar")

    @property
    def E_WT_bar(self) -> float:
        return self.expected("WT_bar")

    @property
    def E_Eff(self) -> float:
        return self.expected("Eff")


def replication_result(scenario_id: str, kpis: Sequence[DayKpi]) -> ReplicationResult:
    kpis = tuple(kpis)
    if not kpis:
        raise DataError("no replicates")
    summaries = {}
    if len(kpis) >= 2:
        summaries = {n: summarize([k.get(n) for k in kpis]) for n in KPI_NAMES}
    return ReplicationResult(scenario_id, len(kpis), kpis, summaries)


def run_replications(s: Scenario, omega: int, base_seed: int, config_index: int = 0,
                     workers: Optional[int] = None,
                     scenario_id: str = "scenario") -> ReplicationResult:
    """Replicates ``0..omega-1`` on streams ``make_stream(base_seed, config_index, i)``."""
    if omega < 1:
        raise ValueError("omega must be >= 1")
    tasks = [(s, base_seed, config_index, r) for r in _chunks(omega)]
    kpis = [k for part in _run_tasks(tasks, workers) for k in part]
    return replication_result(scenario_id, kpis)


# --- DOE ---------------------------------------------------------------------


@dataclass(frozen=True)
class DoeRow:
    config_index: int  # 0-based lexicographic rank of the level combination
    levels: FactorLevels
    E_F_bar: float
    ci95: tuple[float, float]
    rank: int
    F_bar_values: tuple[float, ...]
    E_WT_bar: float
    E_Eff: float

    @property
    def number(self) -> int:
        return self.config_index + 1


@dataclass(frozen=True)
class DoeResult:
    omega: int
    rows: tuple[DoeRow, ...]  # in config_index order
    marginals: dict  # (factor, level) -> mean of E(F_bar) over rows at that level

    def row(self, levels: FactorLevels | str) -> DoeRow:
        if isinstance(levels, str):
            levels = FactorLevels.parse(levels)
        for r in self.rows:
            if r.levels == levels:
                return r
        raise KeyError(levels)


def marginal_means(rows: Sequence[DoeRow]) -> dict:
    out = {}
    for f in FACTORS:
        for lv in FACTOR_LEVELS[f]:
            vals = [r.E_F_bar for r in rows if getattr(r.levels, f) == lv]
            out[(f, lv)] = expected_kpi(vals)
    return out


def rank_configurations(d: DoeResult) -> list[DoeRow]:
    return sorted(d.rows, key=lambda r: (r.E_F_bar, r.config_index))


def run_doe(base: Scenario, omega: int, base_seed: int, workers: Optional[int] = None,
            common_random_numbers: bool = True) -> DoeResult:
    """Evaluate all 36 level combinations.

    With common random numbers every configuration reads replicate ``i``
    from the same stream, so configurations see the same patient draws
    wherever their parameters coincide.
    """
    if omega < 2:
        raise ValueError("omega must be >= 2")
    configs = list(all_factor_levels())
    tasks, owners = [], []
    for ci, levels in enumerate(configs):
        s = apply_factor_levels(base, levels)
        stream_index = 0 if common_random_numbers else ci
        for r in _chunks(omega):
            tasks.append((s, base_seed, stream_index, r))
            owners.append(ci)
    per_config: list[list[DayKpi]] = [[] for _ in configs]
    for ci, part in zip(owners, _run_tasks(tasks, workers)):
        per_config[ci].extend(part)

    provisional = []
    for ci, levels in enumerate(configs):
        kp = per_config[ci]
        fb = tuple(k.F_bar for k in kp)
        summary = summarize(fb)
        provisional.append(DoeRow(
            ci, levels, summary.mean, summary.ci95, 0, fb,
            expected_kpi(k.WT_bar for k in kp), expected_kpi(k.Eff for k in kp)))
    order = sorted(provisional, key=lambda r: (r.E_F_bar, r.config_index))
    ranks = {r.config_index: i + 1 for i, r in enumerate(order)}
    rows = tuple(_with_rank(r, ranks[r.config_index]) for r in provisional)
    return DoeResult(omega, rows, marginal_means(rows))


def _with_rank(r: DoeRow, rank: int) -> DoeRow:
    return DoeRow(r.config_index, r.levels, r.E_F_bar, r.ci95, rank, r.F_bar_values,
                  r.E_WT_bar, r.E_Eff)


def doe_anova(d: DoeResult) -> AnovaTable:
    """ANOVA of per-replicate mean flowtime on the four factors."""
    assignments, y = [], []
    for r in d.rows:
        lv = tuple(FACTOR_LEVELS[f].index(getattr(r.levels, f)) for f in FACTORS)
        for v in r.F_bar_values:
            assignments.append(lv)
            y.append(v)
    levels = [len(FACTOR_LEVELS[f]) for f in FACTORS]
    return factorial_anova(levels, assignments, y, names=FACTORS)


# --- reports -----------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    kpi: str
    a_mean: float
    a_ci95: Optional[tuple[float, float]]
    b_mean: float
    b_ci95: Optional[tuple[float, float]]
    dev_pct: float
    t: float
    p: float


@dataclass(frozen=True)
class ComparisonReport:
    a_id: str
    b_id: str
    omega: int
    rows: tuple[ComparisonRow, ...]

    def row(self, kpi: str) -> ComparisonRow:
        return next(r for r in self.rows if r.kpi == kpi)


def _ci(summary: Optional[SampleSummary]):
    return None if summary is None else summary.ci95


def compare_scenarios(a: ReplicationResult, b: ReplicationResult) -> ComparisonReport:
    """Per-KPI comparison of ``a`` against reference ``b``, paired by replicate index."""
    if a.omega != b.omega:
        raise DataError(f"replicate counts differ ({a.omega} vs {b.omega})")
    rows = []
    for name in KPI_NAMES:
        ea, eb = a.expected(name), b.expected(name)
        if a.omega >= 2:
            test = paired_t_test(a.values(name), b.values(name))
            t, p = test.t, test.p
        else:
            t, p = float("nan"), float("nan")
        rows.append(ComparisonRow(name, ea, _ci(a.summaries.get(name)), eb,
                                  _ci(b.summaries.get(name)), percent_deviation(ea, eb), t, p))
    return ComparisonReport(a.scenario_id, b.scenario_id, a.omega, tuple(rows))


@dataclass(frozen=True)
class ValidationRow:
    kpi: str
    real_mean: float
    real_ci95: Optional[tuple[float, float]]
    sim_mean: float
    sim_ci95: Optional[tuple[float, float]]
    dev_pct: float
    p: float


@dataclass(frozen=True)
class ValidationReport:
    n_days: int
    omega: int
    rows: tuple[ValidationRow, ...]

    def row(self, kpi: str) -> ValidationRow:
        return next(r for r in self.rows if r.kpi == kpi)


def validation_report(real_days: Sequence[DayKpi], sim: ReplicationResult) -> ValidationReport:
    """Observed days against the simulation; day ``i`` is paired with replicate ``i``."""
    n = len(real_days)
    if n == 0:
        raise DataError("no observed days")
    if sim.omega < n:
        raise DataError(f"need at least {n} replicates to pair with the observed days")
    rows = []
    for name in KPI_NAMES:
        real = [d.get(name) for d in real_days]
        real_mean = expected_kpi(real)
        sim_mean = sim.expected(name)
        p = paired_t_test(real, sim.values(name)[:n]).p if n >= 2 else float("nan")
        rows.append(ValidationRow(
            name, real_mean, summarize(real).ci95 if n >= 2 else None,
            sim_mean, _ci(sim.summaries.get(name)),
            percent_deviation(sim_mean, real_mean), p))
    return ValidationReport(n, sim.omega, tuple(rows))
