"""Seeded random streams and the samplers used by the clinic model.

Every sampler consumes exactly one uniform variate (inverse-transform
sampling). Keeping the draw count per variate fixed is what lets two
configurations that share a seed stay aligned draw-for-draw, which the
experiment harness relies on for common random numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence, Union

import numpy as np

from .errors import ValidationError

_STD_NORMAL = NormalDist()
_BUFFER = 256
_TOL = 1e-9


class RandomSource:
    """A single-owner stream of uniform variates on [0, 1).

    Backed by PCG64 seeded through ``numpy.random.SeedSequence`` so that
    distinct ``(base_seed, config_index, replicate_index)`` keys give
    independent streams. Not safe for concurrent draws.
    """

    __slots__ = ("seed", "key", "draws", "_gen", "_buf", "_pos")

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.key = tuple(int(k) for k in key)
        self.draws = 0
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self._buf: list[float] = []
        self._pos = 0

    def uniform(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BUFFER).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.draws += 1
        return u

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` consecutive draws, identical to ``n`` calls of :meth:`uniform`."""
        return np.fromiter((self.uniform() for _ in range(n)), dtype=float, count=n)

    def substream(self, index: int) -> "RandomSource":
        """An independent child stream; the parent is not advanced."""
        return RandomSource(self.seed, self.key + (int(index),))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, key={self.key}, draws={self.draws})"


def make_stream(base_seed: int, config_index: int, replicate_index: int) -> RandomSource:
    if config_index < 0 or replicate_index < 0:
        raise ValueError("stream indices must be non-negative")
    return RandomSource(base_seed, (config_index, replicate_index))


# --- distributions -----------------------------------------------------------


@dataclass(frozen=True)
class Normal:
    mu: float
    sigma: float

    def validate(self, field: str = "normal") -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValidationError(field, "parameters must be finite")
        if self.sigma < 0:
            raise ValidationError(field, f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class UniformReal:
    a: float
    b: float

    def validate(self, field: str = "uniform_real") -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValidationError(field, "bounds must be finite")
        if self.a > self.b:
            raise ValidationError(field, f"bounds out of order: a={self.a} > b={self.b}")


@dataclass(frozen=True)
class UniformInt:
    a: int
    b: int

    def validate(self, field: str = "uniform_int") -> None:
        if int(self.a) != self.a or int(self.b) != self.b:
            raise ValidationError(field, "bounds must be integers")
        if self.a > self.b:
            raise ValidationError(field, f"bounds out of order: a={self.a} > b={self.b}")


@dataclass(frozen=True)
class Categorical:
    weights: tuple[float, ...]

    def validate(self, field: str = "categorical") -> None:
        check_probabilities(self.weights, field)


@dataclass(frozen=True)
class Constant:
    v: float

    def validate(self, field: str = "constant") -> None:
        if not math.isfinite(self.v):
            raise ValidationError(field, "value must be finite")


DistributionSpec = Union[Normal, UniformReal, UniformInt, Categorical, Constant]

_KINDS = {
    "normal": Normal,
    "uniform_real": UniformReal,
    "uniform_int": UniformInt,
    "categorical": Categorical,
    "constant": Constant,
}


def check_probabilities(weights: Sequence[float], field: str) -> None:
    if len(weights) == 0:
        raise ValidationError(field, "probability sequence is empty")
    for w in weights:
        if not (math.isfinite(w) and 0.0 <= w <= 1.0):
            raise ValidationError(field, f"probability {w} outside [0, 1]")
    total = math.fsum(weights)
    if abs(total - 1.0) > _TOL:
        raise ValidationError(field, f"probabilities sum to {total}, expected 1")


def pick_index(weights: Sequence[float], u: float) -> int:
    """Inverse-CDF lookup of ``u`` in a categorical distribution."""
    acc = 0.0
    last = 0
    for i, w in enumerate(weights):
        if w <= 0.0:
            continue
        acc += w
        last = i
        if u < acc:
            return i
    # float round-off can leave u just above the final cumulative sum
    return last


def sample_value(spec: DistributionSpec, u: float) -> float:
    """Map one uniform ``u`` in [0, 1) to a variate of ``spec``."""
    if isinstance(spec, UniformReal):
        return spec.a + u * (spec.b - spec.a)
    if isinstance(spec, UniformInt):
        span = spec.b - spec.a + 1
        return float(spec.a + min(int(u * span), span - 1))
    if isinstance(spec, Normal):
        if spec.sigma == 0.0:
            return float(spec.mu)
        u = min(max(u, 1e-300), 1.0 - 1e-16)
        return spec.mu + spec.sigma * _STD_NORMAL.inv_cdf(u)
    if isinstance(spec, Categorical):
        return float(pick_index(spec.weights, u))
    if isinstance(spec, Constant):
        return float(spec.v)
    raise TypeError(f"unknown distribution spec {spec!r}")


def sample(spec: DistributionSpec, src: RandomSource) -> float:
    spec.validate()
    return sample_value(spec, src.uniform())


def sample_patient_count(mu: float, sigma: float, src: RandomSource) -> int:
    """Rounded normal draw clamped below at one patient."""
    x = sample_value(Normal(mu, sigma), src.uniform())
    return max(1, math.floor(x + 0.5))


def sample_arrival(windows: Sequence["ArrivalWindow"], src: RandomSource) -> int:
    """Arrival offset (s from day open): pick a window, then a whole minute in it.

    Always consumes two draws, even for a single window.
    """
    i = pick_index([w.probability for w in windows], src.uniform())
    w = windows[i]
    minutes = max(1, (w.end_offset - w.start_offset) // 60)
    m = min(int(src.uniform() * minutes), minutes - 1)
    return w.start_offset + 60 * m


@dataclass(frozen=True)
class ArrivalWindow:
    start_offset: int  # seconds from day open, inclusive
    end_offset: int  # exclusive
    probability: float

    def validate(self, field: str = "arrival_window") -> None:
        if self.start_offset < 0:
            raise ValidationError(field, "start must not precede day open")
        if self.start_offset >= self.end_offset:
            raise ValidationError(field, "start must be before end")
        if not 0.0 <= self.probability <= 1.0:
            raise ValidationError(field, f"probability {self.probability} outside [0, 1]")


def to_seconds(x: float) -> int:
    """Round a sampled real duration to whole seconds (half up), never negative."""
    return max(0, math.floor(x + 0.5))


def dist_to_dict(spec: DistributionSpec) -> dict:
    if isinstance(spec, Normal):
        return {"kind": "normal", "mu": spec.mu, "sigma": spec.sigma}
    if isinstance(spec, UniformReal):
        return {"kind": "uniform_real", "a": spec.a, "b": spec.b}
    if isinstance(spec, UniformInt):
        return {"kind": "uniform_int", "a": spec.a, "b": spec.b}
    if isinstance(spec, Categorical):
        return {"kind": "categorical", "weights": list(spec.weights)}
    if isinstance(spec, Constant):
        return {"kind": "constant", "v": spec.v}
    raise TypeError(f"unknown distribution spec {spec!r}")


def dist_from_dict(d: dict, field: str) -> DistributionSpec:
    if not isinstance(d, dict):
        raise ValidationError(field, "distribution must be an object")
    kind = d.get("kind")
    if kind not in _KINDS:
        raise ValidationError(field, f"unknown distribution kind {kind!r}")
    args = {k: v for k, v in d.items() if k != "kind"}
    try:
        if kind == "categorical":
            spec = Categorical(tuple(float(w) for w in args.pop("weights")))
            if args:
                raise TypeError(f"unexpected keys {sorted(args)}")
        elif kind == "uniform_int":
            spec = UniformInt(int(args.pop("a")), int(args.pop("b")))
            if args:
                raise TypeError(f"unexpected keys {sorted(args)}")
        else:
            spec = _KINDS[kind](**{k: float(v) for k, v in args.items()})
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(field, f"bad {kind} parameters: {exc}") from None
    spec.validate(field)
    return spec
