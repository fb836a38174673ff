"""Department configuration: defaults, JSON I/O, and DOE factor levels.

All durations are integer seconds and all distribution parameters are in
seconds. Clock times in JSON are ``"HH:MM:SS"``; arrival windows are stored
internally as offsets from ``day_open``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, fields, replace
from typing import Iterator, Union

from .errors import ScenarioParseError, ValidationError
from .stochastics import (
    ArrivalWindow,
    DistributionSpec,
    Normal,
    UniformReal,
    check_probabilities,
    dist_from_dict,
    dist_to_dict,
)

MIN = 60
CLASSES = ("OC", "C", "O")


@dataclass(frozen=True)
class FixedBatch:
    k: int

    def validate(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError("batch_policy.k", f"must be a positive integer, got {self.k}")


@dataclass(frozen=True)
class VariableBatch:
    a: int
    b: int

    def validate(self) -> None:
        if int(self.a) != self.a or int(self.b) != self.b or self.a < 1:
            raise ValidationError("batch_policy", "bounds must be positive integers")
        if self.a > self.b:
            raise ValidationError("batch_policy", f"bounds out of order: a={self.a} > b={self.b}")


BatchPolicy = Union[FixedBatch, VariableBatch]


def _clock(h: int, m: int, s: int = 0) -> int:
    return 3600 * h + 60 * m + s


def hourly_windows(start: int, length: int, count: int) -> tuple[ArrivalWindow, ...]:
    """``count`` contiguous equal-probability windows of ``length`` seconds."""
    return tuple(
        ArrivalWindow(start + i * length, start + (i + 1) * length, 1.0 / count)
        for i in range(count)
    )


# Offsets from an 08:00 opening. Table windows are one hour each, starting 08:30.
STATUS_QUO_WINDOWS = tuple(
    ArrivalWindow(1800 + i * 3600, 1800 + (i + 1) * 3600, p)
    for i, p in enumerate((0.5658, 0.1254, 0.0581, 0.1376, 0.1131))
)


@dataclass(frozen=True)
class Scenario:
    day_open: int = _clock(8, 0)
    oncologists: int = 3
    chairs: int = 13
    treatment_nurses: int = 3
    reception_nurses: int = 1
    pharmacy_technicians: int = 1
    couriers: int = 1
    n_max: int = 4
    registration_duration: int = 60
    setup_duration: int = 3900  # calibrated; see README
    patient_count: Normal = Normal(28.07, 3.94)
    class_mix: tuple[float, float, float] = (0.7150, 0.0618, 0.2232)
    arrival_windows: tuple[ArrivalWindow, ...] = STATUS_QUO_WINDOWS
    consult_duration: DistributionSpec = UniformReal(5 * MIN, 35 * MIN)
    prep_classes: tuple[tuple[float, DistributionSpec], ...] = (
        (0.7138, UniformReal(1 * MIN, 5 * MIN)),
        (0.2034, UniformReal(6 * MIN, 10 * MIN)),
        (0.0828, UniformReal(11 * MIN, 27 * MIN)),
    )
    treatment_classes: tuple[tuple[float, DistributionSpec], ...] = (
        (0.3013, UniformReal(15 * MIN, 60 * MIN)),
        (0.3891, UniformReal(61 * MIN, 120 * MIN)),
        (0.1423, UniformReal(121 * MIN, 180 * MIN)),
        (0.1213, UniformReal(181 * MIN, 240 * MIN)),
        (0.0460, UniformReal(241 * MIN, 300 * MIN)),
    )
    batch_policy: BatchPolicy = VariableBatch(2, 12)
    delivery_base: int = 10 * MIN
    delay_probability: float = 0.2653
    delay_extra: DistributionSpec = UniformReal(2 * MIN, 10 * MIN)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name in ("oncologists", "chairs", "treatment_nurses", "reception_nurses",
                     "pharmacy_technicians", "couriers", "n_max"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValidationError(name, f"must be a positive integer, got {v!r}")
        for name in ("registration_duration", "setup_duration", "delivery_base"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 0:
                raise ValidationError(name, f"must be a non-negative integer of seconds, got {v!r}")
        if not 0 <= self.day_open < 86400:
            raise ValidationError("day_open", "must be a time of day")
        if not isinstance(self.patient_count, Normal):
            raise ValidationError("patient_count", "must be a normal distribution")
        self.patient_count.validate("patient_count")
        if len(self.class_mix) != 3:
            raise ValidationError("class_mix", "needs exactly three probabilities (OC, C, O)")
        check_probabilities(self.class_mix, "class_mix")
        if not self.arrival_windows:
            raise ValidationError("arrival_windows", "at least one window required")
        for i, w in enumerate(self.arrival_windows):
            w.validate(f"arrival_windows[{i}]")
        check_probabilities([w.probability for w in self.arrival_windows], "arrival_windows")
        self.consult_duration.validate("consult_duration")
        for name in ("prep_classes", "treatment_classes"):
            groups = getattr(self, name)
            if not groups:
                raise ValidationError(name, "at least one class required")
            for i, (_, dist) in enumerate(groups):
                dist.validate(f"{name}[{i}]")
            check_probabilities([p for p, _ in groups], name)
        self.batch_policy.validate()
        if not 0.0 <= self.delay_probability <= 1.0:
            raise ValidationError("delay_probability", "must lie in [0, 1]")
        self.delay_extra.validate("delay_extra")

    @property
    def therapy_weights(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        return (tuple(p for p, _ in self.prep_classes),
                tuple(p for p, _ in self.treatment_classes))


def status_quo_scenario() -> Scenario:
    return Scenario()


# --- JSON --------------------------------------------------------------------


def format_clock(seconds: int) -> str:
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def parse_clock(text: str, field_name: str) -> int:
    try:
        h, m, s = (int(p) for p in str(text).split(":"))
    except ValueError:
        raise ValidationError(field_name, f"expected HH:MM:SS, got {text!r}") from None
    if not (0 <= h < 24 and 0 <= m < 60 and 0 <= s < 60):
        raise ValidationError(field_name, f"time out of range: {text!r}")
    return _clock(h, m, s)


def _batch_to_dict(p: BatchPolicy) -> dict:
    if isinstance(p, FixedBatch):
        return {"kind": "fixed", "k": p.k}
    return {"kind": "variable", "a": p.a, "b": p.b}


def _batch_from_dict(d) -> BatchPolicy:
    if not isinstance(d, dict):
        raise ValidationError("batch_policy", "must be an object")
    try:
        if d.get("kind") == "fixed":
            return FixedBatch(_as_int(d["k"], "batch_policy.k"))
        if d.get("kind") == "variable":
            return VariableBatch(_as_int(d["a"], "batch_policy.a"), _as_int(d["b"], "batch_policy.b"))
    except KeyError as exc:
        raise ValidationError("batch_policy", f"missing key {exc}") from None
    raise ValidationError("batch_policy", f"unknown kind {d.get('kind')!r}")


def _as_int(v, name: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ValidationError(name, f"must be an integer, got {v!r}")
    return int(v)


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "day_open": format_clock(s.day_open),
        "oncologists": s.oncologists,
        "chairs": s.chairs,
        "treatment_nurses": s.treatment_nurses,
        "reception_nurses": s.reception_nurses,
        "pharmacy_technicians": s.pharmacy_technicians,
        "couriers": s.couriers,
        "n_max": s.n_max,
        "registration_duration": s.registration_duration,
        "setup_duration": s.setup_duration,
        "patient_count": dist_to_dict(s.patient_count),
        "class_mix": dict(zip(CLASSES, s.class_mix)),
        "arrival_windows": [
            {"start": format_clock(s.day_open + w.start_offset),
             "end": format_clock(s.day_open + w.end_offset),
             "probability": w.probability}
            for w in s.arrival_windows
        ],
        "consult_duration": dist_to_dict(s.consult_duration),
        "prep_classes": [{"probability": p, "duration": dist_to_dict(d)} for p, d in s.prep_classes],
        "treatment_classes": [{"probability": p, "duration": dist_to_dict(d)}
                              for p, d in s.treatment_classes],
        "batch_policy": _batch_to_dict(s.batch_policy),
        "delivery_base": s.delivery_base,
        "delay_probability": s.delay_probability,
        "delay_extra": dist_to_dict(s.delay_extra),
    }


def dump_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2)


def _classes(items, name: str) -> tuple:
    if not isinstance(items, list):
        raise ValidationError(name, "must be a list")
    out = []
    for i, item in enumerate(items):
        try:
            p = float(item["probability"])
            d = dist_from_dict(item["duration"], f"{name}[{i}].duration")
        except (KeyError, TypeError):
            raise ValidationError(f"{name}[{i}]", "needs 'probability' and 'duration'") from None
        out.append((p, d))
    return tuple(out)


_INT_FIELDS = ("oncologists", "chairs", "treatment_nurses", "reception_nurses",
               "pharmacy_technicians", "couriers", "n_max", "registration_duration",
               "setup_duration", "delivery_base")


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a scenario from a (possibly partial) document; missing keys keep defaults."""
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "scenario document must be a JSON object")
    known = {f.name for f in fields(Scenario)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ValidationError(unknown[0], "unknown scenario field")

    kw: dict = {}
    day_open = parse_clock(doc["day_open"], "day_open") if "day_open" in doc else Scenario.day_open
    if "day_open" in doc:
        kw["day_open"] = day_open
    for name in _INT_FIELDS:
        if name in doc:
            kw[name] = _as_int(doc[name], name)
    if "patient_count" in doc:
        kw["patient_count"] = dist_from_dict(doc["patient_count"], "patient_count")
    if "class_mix" in doc:
        mix = doc["class_mix"]
        if not isinstance(mix, dict) or set(mix) != set(CLASSES):
            raise ValidationError("class_mix", "must map exactly OC, C and O to probabilities")
        kw["class_mix"] = tuple(float(mix[c]) for c in CLASSES)
    if "arrival_windows" in doc:
        wins = doc["arrival_windows"]
        if not isinstance(wins, list):
            raise ValidationError("arrival_windows", "must be a list")
        parsed = []
        for i, w in enumerate(wins):
            name = f"arrival_windows[{i}]"
            try:
                start = parse_clock(w["start"], name + ".start") - day_open
                end = parse_clock(w["end"], name + ".end") - day_open
                parsed.append(ArrivalWindow(start, end, float(w["probability"])))
            except (KeyError, TypeError):
                raise ValidationError(name, "needs 'start', 'end' and 'probability'") from None
        kw["arrival_windows"] = tuple(parsed)
    for name in ("consult_duration", "delay_extra"):
        if name in doc:
            kw[name] = dist_from_dict(doc[name], name)
    for name in ("prep_classes", "treatment_classes"):
        if name in doc:
            kw[name] = _classes(doc[name], name)
    if "batch_policy" in doc:
        kw["batch_policy"] = _batch_from_dict(doc["batch_policy"])
    if "delay_probability" in doc:
        v = doc["delay_probability"]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ValidationError("delay_probability", f"must be a number, got {v!r}")
        kw["delay_probability"] = float(v)
    return Scenario(**kw)


def load_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, exc.lineno, exc.colno) from None
    return scenario_from_dict(doc)


# --- design of experiments ---------------------------------------------------

FACTORS = ("alpha", "beta", "gamma", "delta")
FACTOR_LEVELS = {"alpha": "AB", "beta": "ABC", "gamma": "ABC", "delta": "AB"}

COURIERS = {"A": 1, "B": 2}
BATCH = {"A": FixedBatch(3), "B": FixedBatch(6), "C": VariableBatch(2, 12)}
WINDOWS = {
    "A": hourly_windows(1800, 90 * MIN, 3),
    "B": hourly_windows(1800, 60 * MIN, 5),
    "C": STATUS_QUO_WINDOWS,
}
# Level A keeps the observed mean so that {A-C-C-A} reproduces the status quo.
PATIENT_MEANS = {"A": 28.07, "B": 31.0}
PATIENT_SD = 3.94


@dataclass(frozen=True)
class FactorLevels:
    alpha: str = "A"
    beta: str = "C"
    gamma: str = "C"
    delta: str = "A"

    def __post_init__(self) -> None:
        for name in FACTORS:
            if getattr(self, name) not in FACTOR_LEVELS[name]:
                raise ValidationError(name, f"level must be one of {list(FACTOR_LEVELS[name])}")

    @classmethod
    def parse(cls, text: str) -> "FactorLevels":
        """Parse ``"B-A-B-A"`` (alpha-beta-gamma-delta)."""
        parts = [p.strip().upper() for p in text.replace("{", "").replace("}", "").split("-")]
        if len(parts) != 4:
            raise ValidationError("factors", f"expected four dash-separated levels, got {text!r}")
        return cls(*parts)

    def label(self) -> str:
        return "-".join(getattr(self, f) for f in FACTORS)

    def as_tuple(self) -> tuple[str, str, str, str]:
        return (self.alpha, self.beta, self.gamma, self.delta)


STATUS_QUO_LEVELS = FactorLevels("A", "C", "C", "A")


def all_factor_levels() -> Iterator[FactorLevels]:
    """All 36 level combinations, lexicographic over (alpha, beta, gamma, delta)."""
    for combo in itertools.product(*(FACTOR_LEVELS[f] for f in FACTORS)):
        yield FactorLevels(*combo)


def apply_factor_levels(base: Scenario, levels: FactorLevels) -> Scenario:
    return replace(
        base,
        couriers=COURIERS[levels.alpha],
        batch_policy=BATCH[levels.beta],
        arrival_windows=WINDOWS[levels.gamma],
        patient_count=Normal(PATIENT_MEANS[levels.delta], PATIENT_SD),
    )
