import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oncoflow.errors import DataError
from oncoflow.stats import (
    f_sf,
    factorial_anova,
    paired_t_test,
    regularized_incomplete_beta,
    summarize,
    t_cdf,
    t_quantile,
    t_two_sided_p,
)
from oracles import beta_grid, beta_quad, brute_anova_ss, random_balanced_design

I = regularized_incomplete_beta


# --- special functions


def test_beta_trivial_values():
    assert I(0.3, 1, 1) == pytest.approx(0.3, abs=1e-12)
    assert I(0.5, 2.5, 2.5) == pytest.approx(0.5, abs=1e-12)
    assert I(0.0, 2, 3) == 0.0 and I(1.0, 2, 3) == 1.0


def test_beta_against_quadrature_point():
    assert abs(I(0.7, 2.5, 3.5) - beta_quad(0.7, 2.5, 3.5)) <= 1e-8


def test_beta_against_quadrature_grid():
    worst = max(abs(I(x, a, b) - beta_quad(x, a, b)) for x, a, b in beta_grid(1000, seed=1))
    assert worst <= 1e-8


def test_beta_against_scipy():
    from scipy.special import betainc

    for x, a, b in beta_grid(300, seed=2):
        assert I(x, a, b) == pytest.approx(betainc(a, b, x), abs=1e-10)


@given(st.floats(0, 1), st.floats(0.05, 200), st.floats(0.05, 200))
@settings(max_examples=300)
def test_beta_reflection(x, a, b):
    assume(1 - (1 - x) == x)  # reflection is only meaningful when 1 - x is exact
    assert I(x, a, b) + I(1 - x, b, a) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
def test_beta_domain(args):
    with pytest.raises(DataError):
        I(*args)


def test_f_sf_examples():
    assert f_sf(1, 8, 8) == pytest.approx(0.5, abs=1e-12)
    assert f_sf(4.0, 2, 10) == pytest.approx(1.8 ** -5, abs=1e-12)
    assert f_sf(0, 3, 7) == 1.0
    with pytest.raises(DataError):
        f_sf(-1, 2, 3)
    with pytest.raises(DataError):
        f_sf(1, 0, 3)


def test_f_sf_closed_form_for_two_numerator_df():
    for F in np.linspace(0, 50, 201):
        for d2 in (1, 2, 3, 7, 30, 200, 5000):
            assert abs(f_sf(F, 2, d2) - (1 + 2 * F / d2) ** (-d2 / 2)) <= 1e-10


def test_f_sf_against_scipy():
    from scipy.stats import f

    for F, d1, d2 in itertools.product([0.1, 1.3, 4.0, 20.0], [1, 2, 5, 19], [3, 40, 17980]):
        assert f_sf(F, d1, d2) == pytest.approx(f.sf(F, d1, d2), rel=1e-9, abs=1e-15)


@given(st.floats(0, 100), st.floats(0, 100), st.integers(1, 50), st.integers(1, 500))
def test_f_sf_monotone(F1, F2, d1, d2):
    lo, hi = sorted((F1, F2))
    assert f_sf(hi, d1, d2) <= f_sf(lo, d1, d2) + 1e-15


def test_t_quantiles_match_reference_table():
    assert t_quantile(0.975, 1) == pytest.approx(12.706, abs=5e-4)
    assert t_quantile(0.975, 14) == pytest.approx(2.145, abs=5e-4)
    assert t_quantile(0.975, 10**6) == pytest.approx(1.960, abs=5e-4)
    assert t_quantile(0.025, 5) == pytest.approx(-t_quantile(0.975, 5))


def test_t_cdf_against_scipy():
    from scipy.stats import t

    for x, df in itertools.product([-8, -2.1, -0.3, 0, 0.7, 3.3], [1, 2, 9, 50, 4999]):
        assert t_cdf(x, df) == pytest.approx(t.cdf(x, df), abs=1e-12)
        assert t_two_sided_p(x, df) == pytest.approx(2 * t.sf(abs(x), df), abs=1e-12)


# --- summaries and paired tests


def test_summary_zero_variance():
    s = summarize([5, 5, 5, 5])
    assert (s.mean, s.sd, s.ci95) == (5, 0, (5, 5))


def test_summary_two_points():
    s = summarize([0, 1])
    assert s.mean == 0.5
    assert s.sd == pytest.approx(math.sqrt(0.5))
    assert s.ci95[1] - s.mean == pytest.approx(12.706 * math.sqrt(0.5) / math.sqrt(2), rel=1e-4)


def test_summary_width_normal_limit():
    x = np.random.default_rng(3).standard_normal(10_000)
    s = summarize(x.tolist())
    assert s.ci95[1] - s.ci95[0] == pytest.approx(2 * 1.96 / 100, rel=0.05)


def test_summary_needs_two_points():
    with pytest.raises(DataError):
        summarize([1.0])


@given(st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=40))
def test_summary_brackets_mean(xs):
    s = summarize(xs)
    assert s.ci95[0] <= s.mean + 1e-9 and s.mean <= s.ci95[1] + 1e-9


def test_ci_shrinks_with_n():
    base = [0.0, 1.0, 2.0, 3.0]
    widths = [summarize(base * m).ci95 for m in (1, 4, 16)]
    spans = [h - lo for lo, h in widths]
    assert spans[0] > spans[1] > spans[2]


def test_paired_degenerate_cases():
    r = paired_t_test([1, 2, 3], [1, 2, 3])
    assert (r.t, r.df, r.p) == (0.0, 2, 1.0)
    r = paired_t_test([2, 3, 4], [1, 2, 3])
    assert r.p == 0.0 and r.t == math.inf


def test_paired_errors():
    with pytest.raises(DataError):
        paired_t_test([1, 2], [1, 2, 3])
    with pytest.raises(DataError):
        paired_t_test([1], [2])


def test_paired_against_scipy():
    from scipy.stats import ttest_rel

    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = rng.normal(0, 1, 12), rng.normal(0.3, 1, 12)
        ours = paired_t_test(a.tolist(), b.tolist())
        ref = ttest_rel(a, b)
        assert ours.t == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p == pytest.approx(ref.pvalue, rel=1e-9)


def test_paired_sign_symmetry():
    a, b = [1.0, 2.5, 3.1, 0.2], [0.4, 2.9, 1.0, 0.0]
    assert paired_t_test(a, b).p == pytest.approx(paired_t_test(b, a).p)
    assert paired_t_test(a, b).t == pytest.approx(-paired_t_test(b, a).t)


def test_paired_null_calibration():
    from scipy.stats import kstest

    rng = np.random.default_rng(5)
    ps = [paired_t_test(rng.standard_normal(15).tolist(), rng.standard_normal(15).tolist()).p
          for _ in range(2000)]
    assert kstest(ps, "uniform").statistic < 0.05


# --- ANOVA


def test_anova_constant_response():
    X = [list(c) for c in itertools.product(range(2), range(3))] * 3
    t = factorial_anova([2, 3], X, [7.0] * len(X), ["a", "b"])
    assert all(r.ss == 0 for r in t.rows)
    assert t.total_ss == 0


def test_anova_doe_design_df():
    X = [list(c) for c in itertools.product(range(2), range(3), range(3), range(2))] * 2
    y = np.random.default_rng(0).normal(size=len(X)).tolist()
    t = factorial_anova([2, 3, 3, 2], X, y, ["alpha", "beta", "gamma", "delta"])
    assert t.model.df == 19
    assert [r.df for r in t.rows[:4]] == [1, 2, 2, 1]
    assert sum(r.df for r in t.rows[4:]) == 13
    assert t.model.df + t.error_df == t.total_df == len(X) - 1


def test_anova_matches_brute_force_two_way():
    rng = np.random.default_rng(6)
    levels = [2, 3]
    X = [list(c) for c in itertools.product(range(2), range(3))] * 4
    y = rng.normal(size=len(X)).tolist()
    t = factorial_anova(levels, X, y)
    ref = brute_anova_ss(levels, X, y)
    for name, r in zip(["0", "1", "0*1"], t.rows):
        assert r.ss == pytest.approx(ref[name], rel=1e-9)
    assert t.total_ss == pytest.approx(ref["total"], rel=1e-9)


def test_anova_matches_brute_force_random_designs():
    rng = np.random.default_rng(7)
    for _ in range(100):
        levels, X, y = random_balanced_design(rng)
        t = factorial_anova(levels, X, y)
        ref = brute_anova_ss(levels, X, y)
        names = [str(f) for f in range(len(levels))] + [
            f"{f}*{g}" for f, g in itertools.combinations(range(len(levels)), 2)]
        for name, r in zip(names, t.rows):
            assert abs(r.ss - ref[name]) <= 1e-9 * abs(ref[name])
        assert math.fsum(r.ss for r in t.rows) + t.error_ss == pytest.approx(t.total_ss, rel=1e-6)


def test_anova_matches_statsmodels():
    pd = pytest.importorskip("pandas")
    smf = pytest.importorskip("statsmodels.formula.api")
    from statsmodels.stats.anova import anova_lm

    rng = np.random.default_rng(8)
    levels = [2, 3, 3]
    X = [list(c) for c in itertools.product(*(range(L) for L in levels))] * 3
    y = (np.array([r[0] * 0.5 + r[1] * 1.5 - r[2] for r in X]) + rng.normal(size=len(X))).tolist()
    t = factorial_anova(levels, X, y, ["a", "b", "c"])
    df = pd.DataFrame(X, columns=["a", "b", "c"]).assign(y=y)
    ref = anova_lm(smf.ols("y ~ (C(a) + C(b) + C(c)) ** 2", data=df).fit(), typ=2)
    mapping = {"a": "C(a)", "b": "C(b)", "c": "C(c)", "a*b": "C(a):C(b)",
               "a*c": "C(a):C(c)", "b*c": "C(b):C(c)"}
    for r in t.rows:
        assert r.ss == pytest.approx(ref.loc[mapping[r.name], "sum_sq"], rel=1e-9)
        assert r.F == pytest.approx(ref.loc[mapping[r.name], "F"], rel=1e-8)
        assert r.p == pytest.approx(ref.loc[mapping[r.name], "PR(>F)"], rel=1e-7, abs=1e-15)
    assert t.error_df == ref.loc["Residual", "df"]


def test_anova_pure_main_effect():
    X = [list(c) for c in itertools.product(range(2), range(3), range(2))] * 2
    y = [4.0 * (r[1] == 2) for r in X]
    t = factorial_anova([2, 3, 2], X, y, ["a", "b", "c"])
    for r in t.rows:
        if r.name == "b":
            assert r.ss > 0
        else:
            assert abs(r.ss) <= 1e-9


def test_anova_sum_of_squares_identity_and_adj_r2():
    rng = np.random.default_rng(9)
    levels, X, y = random_balanced_design(rng, k=3)
    t = factorial_anova(levels, X, y)
    assert t.model.ss + t.error_ss == pytest.approx(t.total_ss, rel=1e-6)
    assert all(r.ss >= 0 for r in t.rows)
    expected = 1 - (t.error_ss / t.error_df) / (t.total_ss / t.total_df)
    assert t.adj_r2 == pytest.approx(expected)


def test_anova_rejects_unbalanced():
    X = [[0, 0], [0, 0], [0, 1], [0, 1], [1, 0], [1, 0], [1, 1]]
    with pytest.raises(DataError):
        factorial_anova([2, 2], X, [1.0] * len(X))
    with pytest.raises(DataError):
        factorial_anova([2, 2], [[0, 0], [0, 1], [1, 0], [1, 1]], [1.0] * 4)
