"""Discrete-event simulation of an oncology day-hospital served by a detached pharmacy."""

from .clinic import DayResult, run_day
from .experiments import (
    compare_scenarios,
    doe_anova,
    rank_configurations,
    run_doe,
    run_replications,
    validation_report,
)
from .kpi import DayKpi, day_kpis, expected_kpi, percent_deviation
from .scenario import (
    FactorLevels,
    Scenario,
    apply_factor_levels,
    load_scenario,
    status_quo_scenario,
)
from .stochastics import make_stream

__all__ = [
    "DayKpi",
    "DayResult",
    "FactorLevels",
    "Scenario",
    "apply_factor_levels",
    "compare_scenarios",
    "day_kpis",
    "doe_anova",
    "expected_kpi",
    "load_scenario",
    "make_stream",
    "percent_deviation",
    "rank_configurations",
    "run_day",
    "run_doe",
    "run_replications",
    "status_quo_scenario",
    "validation_report",
]
__version__ = "0.1.0"
