"""Summary statistics, paired t-test and balanced factorial ANOVA.

Self-contained: the t and F tail probabilities come from the regularized
incomplete beta function implemented here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


def _betacf(x: float, a: float, b: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for x={x}, a={a}, b={b}")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) for 0 <= x <= 1 and a, b > 0."""
    if not (a > 0 and b > 0) or math.isinf(a) or math.isinf(b):
        raise DataError(f"incomplete beta needs a, b > 0 (got a={a}, b={b})")
    if not 0.0 <= x <= 1.0:
        raise DataError(f"incomplete beta needs 0 <= x <= 1 (got x={x})")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(x, a, b) / a
    return 1.0 - math.exp(log_front) * _betacf(1.0 - x, b, a) / b


def t_two_sided_p(t: float, df: float) -> float:
    if df <= 0:
        raise DataError("degrees of freedom must be positive")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_two_sided_p(t, df)
    return 1.0 - tail if t > 0 else tail


def t_quantile(q: float, df: float, tol: float = 1e-9) -> float:
    """Inverse of :func:`t_cdf` by bisection."""
    if not 0.0 < q < 1.0:
        raise DataError("quantile level must be in (0, 1)")
    if q == 0.5:
        return 0.0
    if q < 0.5:
        return -t_quantile(1.0 - q, df, tol)
    lo, hi = 0.0, 1.0
    while t_cdf(hi, df) < q:
        lo, hi = hi, hi * 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, df) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def f_sf(F: float, d1: int, d2: int) -> float:
    """Upper-tail probability of the F(d1, d2) distribution."""
    if d1 <= 0 or d2 <= 0:
        raise DataError("F degrees of freedom must be positive")
    if math.isnan(F) or F < 0:
        raise DataError(f"F statistic must be >= 0 (got {F})")
    if math.isinf(F):
        return 0.0
    return regularized_incomplete_beta(d2 / (d2 + d1 * F), d2 / 2.0, d1 / 2.0)


# --- samples -----------------------------------------------------------------


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float
    ci95: tuple[float, float]


def _mean_sd(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var)


def summarize(xs: Sequence[float]) -> SampleSummary:
    xs = list(xs)
    n = len(xs)
    if n < 2:
        raise DataError("a confidence interval needs at least two values")
    mean, sd = _mean_sd(xs)
    half = t_quantile(0.975, n - 1) * sd / math.sqrt(n)
    return SampleSummary(n, mean, sd, (mean - half, mean + half))


@dataclass(frozen=True)
class PairedTestResult:
    t: float
    df: int
    p: float


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> PairedTestResult:
    """Two-sided paired t-test on ``a - b``."""
    if len(a) != len(b):
        raise DataError(f"paired samples differ in length ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise DataError("paired t-test needs at least two pairs")
    d = [x - y for x, y in zip(a, b)]
    mean, sd = _mean_sd(d)
    if sd == 0.0:
        if mean == 0.0:
            return PairedTestResult(0.0, n - 1, 1.0)
        return PairedTestResult(math.copysign(math.inf, mean), n - 1, 0.0)
    t = mean / (sd / math.sqrt(n))
    return PairedTestResult(t, n - 1, t_two_sided_p(t, n - 1))


# --- ANOVA -------------------------------------------------------------------


@dataclass(frozen=True)
class AnovaRow:
    name: str
    df: int
    ss: float
    ms: float
    F: float
    p: float


@dataclass(frozen=True)
class AnovaTable:
    rows: tuple[AnovaRow, ...]  # main effects, then two-way interactions
    model: AnovaRow
    error_df: int
    error_ss: float
    error_ms: float
    total_df: int
    total_ss: float
    adj_r2: float

    def row(self, name: str) -> AnovaRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)


def _f_and_p(ms: float, ms_err: float, df: int, df_err: int) -> tuple[float, float]:
    if ms_err > 0:
        F = ms / ms_err
        return F, f_sf(F, df, df_err)
    if ms > 0:
        return math.inf, 0.0
    return 0.0, 1.0


def factorial_anova(
    levels_per_factor: Sequence[int],
    assignments: Sequence[Sequence[int]],
    y: Sequence[float],
    names: Optional[Sequence[str]] = None,
) -> AnovaTable:
    """Main effects plus all two-way interactions for balanced full-factorial data.

    ``assignments[i][f]`` is the 0-based level of factor ``f`` for response
    ``y[i]``. The residual pools within-cell variation with any interaction
    of order three or higher, so the sums of squares add up to the total.
    """
    k = len(levels_per_factor)
    names = list(names) if names is not None else [f"x{i}" for i in range(k)]
    if len(names) != k:
        raise DataError("one name per factor required")
    X = np.asarray(assignments, dtype=np.int64)
    Y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape != (len(Y), k):
        raise DataError("assignments must give one level per factor for each response")
    L = np.asarray(levels_per_factor, dtype=np.int64)
    if np.any(L < 2):
        raise DataError("every factor needs at least two levels")
    if np.any(X < 0) or np.any(X >= L):
        raise DataError("factor level out of range")

    n_cells = int(np.prod(L))
    cell = np.ravel_multi_index(X.T, tuple(L))
    counts = np.bincount(cell, minlength=n_cells)
    if counts.min() != counts.max() or counts.min() < 2:
        raise DataError("design must be balanced with at least two replicates per cell")

    N = len(Y)
    grand = Y.mean()
    total_ss = float(np.sum((Y - grand) ** 2))

    def marginal(idx: np.ndarray, size: int) -> np.ndarray:
        return np.bincount(idx, weights=Y, minlength=size) / np.bincount(idx, minlength=size)

    means = [marginal(X[:, f], int(L[f])) for f in range(k)]
    effects: list[tuple[str, int, float]] = []
    for f in range(k):
        per_level = N / L[f]
        ss = float(per_level * np.sum((means[f] - grand) ** 2))
        effects.append((names[f], int(L[f] - 1), ss))
    for f, g in itertools.combinations(range(k), 2):
        lf, lg = int(L[f]), int(L[g])
        m2 = marginal(X[:, f] * lg + X[:, g], lf * lg).reshape(lf, lg)
        resid = m2 - means[f][:, None] - means[g][None, :] + grand
        ss = float(N / (lf * lg) * np.sum(resid ** 2))
        effects.append((f"{names[f]}*{names[g]}", (lf - 1) * (lg - 1), ss))

    model_df = sum(df for _, df, _ in effects)
    model_ss = math.fsum(ss for _, _, ss in effects)
    total_df = N - 1
    error_df = total_df - model_df
    error_ss = max(total_ss - model_ss, 0.0)
    error_ms = error_ss / error_df

    rows = []
    for name, df, ss in effects:
        F, p = _f_and_p(ss / df, error_ms, df, error_df)
        rows.append(AnovaRow(name, df, ss, ss / df, F, p))
    F, p = _f_and_p(model_ss / model_df, error_ms, model_df, error_df)
    model = AnovaRow("Model", model_df, model_ss, model_ss / model_df, F, p)
    adj_r2 = 1.0 - error_ms / (total_ss / total_df) if total_ss > 0 else math.nan
    return AnovaTable(tuple(rows), model, error_df, error_ss, error_ms, total_df, total_ss, adj_r2)
