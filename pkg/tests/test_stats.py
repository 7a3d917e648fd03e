import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multidim_fs.stats import (
    DistributionFit,
    adjust_p_values,
    chi2_cdf,
    chi2_isf,
    chi2_quantile,
    chi2_sf,
    compute_p_values,
    degrees_of_freedom,
    fit_effective_tests,
    ig_limit,
    p_values_from_fit,
    trimmed_fit,
    welch_t_test,
)

mpmath.mp.dps = 40


def mp_chi2_cdf(s, df):
    return float(mpmath.gammainc(mpmath.mpf(df) / 2, 0, mpmath.mpf(s) / 2, regularized=True))


def test_chi2_known_values():
    assert chi2_cdf(0.0, 3) == 0.0
    assert abs(chi2_cdf(3.841458820694124, 1) - 0.95) < 1e-12
    assert abs(chi2_cdf(2.0, 2) - (1 - math.exp(-1))) < 1e-14
    assert abs(chi2_sf(5.991464547107979, 2) - 0.05) < 1e-12


def test_chi2_against_mpmath_grid():
    rng = np.random.default_rng(7)
    for _ in range(200):
        df = int(rng.integers(1, 11))
        s = float(rng.uniform(0, 100))
        assert abs(chi2_cdf(s, df) - mp_chi2_cdf(s, df)) < 1e-10, (s, df)


def test_chi2_sf_far_tail_relative():
    for s, df in [(200.0, 1), (500.0, 4), (300.0, 16)]:
        ref = float(mpmath.gammainc(mpmath.mpf(df) / 2, mpmath.mpf(s) / 2, mpmath.inf, regularized=True))
        assert abs(chi2_sf(s, df) / ref - 1) < 1e-10


@pytest.mark.parametrize("df", [1, 2, 4, 8, 16, 81])
@pytest.mark.parametrize("p", [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999])
def test_quantile_round_trip(p, df):
    assert abs(chi2_cdf(chi2_quantile(p, df), df) - p) < 1e-10


def test_isf_far_tail():
    s = chi2_isf(1e-40, 4)
    assert abs(chi2_sf(s, 4) / 1e-40 - 1) < 1e-8


def test_degrees_of_freedom():
    assert degrees_of_freedom(1, 2) == 1
    assert degrees_of_freedom(2, 2) == 2
    assert degrees_of_freedom(3, 3) == 18


def test_chi2_array_input():
    s = np.array([0.5, 1.0, 9.0])
    np.testing.assert_allclose(chi2_cdf(s, 2), [chi2_cdf(float(v), 2) for v in s], rtol=0, atol=0)


def test_fit_exact_examples():
    # F(s) = exp(-1) for every statistic gives m = 1
    s = chi2_quantile(math.exp(-1), 2)
    assert abs(fit_effective_tests([s] * 5, 2).m_hat - 1) < 1e-9
    s = chi2_quantile(math.exp(-2), 2)
    assert abs(fit_effective_tests([s], 2).m_hat - 0.5) < 1e-9


def test_fit_monte_carlo_max_of_40():
    rng = np.random.default_rng(11)
    sample = rng.chisquare(2, size=(2000, 40)).max(axis=1)
    assert 34 <= fit_effective_tests(sample, 2).m_hat <= 46


@pytest.mark.parametrize("m,df", [(5, 1), (20, 2), (80, 4), (300, 8)])
def test_fit_recovers_m(m, df):
    rng = np.random.default_rng(m)
    sample = rng.chisquare(df, size=(500, m)).max(axis=1)
    assert abs(fit_effective_tests(sample, df).m_hat / m - 1) < 0.15


def test_fit_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        fit_effective_tests([0.0, 0.0], 2)
    with pytest.raises(ValueError):
        fit_effective_tests([], 2)


def test_trimmed_fit_ignores_outliers():
    rng = np.random.default_rng(3)
    sample = rng.chisquare(2, size=(400, 30)).max(axis=1)
    polluted = np.concatenate([sample, [400.0, 500.0, 600.0]])
    plain = fit_effective_tests(sample, 2).m_hat
    assert abs(trimmed_fit(polluted, 2).m_hat / plain - 1) < 0.15
    assert fit_effective_tests(polluted, 2).m_hat > 0


def test_exp_p_value_example():
    fit = DistributionFit(df=2, m_hat=10.0, mode="exp")
    s = chi2_quantile(0.95 ** (1 / 10), 2)
    assert abs(p_values_from_fit([s], fit)[0] - 0.05) < 1e-10


def test_raw_p_values_are_chi2_sf():
    r = compute_p_values([0.0, 3.841458820694124, 10.0], 1, mode="raw")
    assert r.fit.m_hat == 1.0 and r.fit.mode == "raw"
    np.testing.assert_allclose(r.p_value, [1.0, 0.05, chi2_sf(10.0, 1)], rtol=1e-12)


def test_p_values_small_tail_resolved():
    fit = DistributionFit(df=1, m_hat=400.0, mode="exp")
    p = p_values_from_fit([200.0], fit)[0]
    assert 0 < p < 1e-40


@given(st.lists(st.floats(0, 200), min_size=1, max_size=30), st.floats(0.5, 500))
@settings(max_examples=50, deadline=None)
def test_p_values_in_range_and_monotone(stats, m):
    fit = DistributionFit(df=2, m_hat=m, mode="exp")
    s = np.sort(np.asarray(stats))
    p = p_values_from_fit(s, fit)
    assert np.all((p >= 0) & (p <= 1))
    assert np.all(np.diff(p) <= 1e-15)


def test_contrast_fit_sample_used():
    rng = np.random.default_rng(0)
    contrast = rng.chisquare(2, size=(200, 50)).max(axis=1)
    r = compute_p_values([1.0, 50.0], 2, mode="exp", fit_sample=contrast)
    assert r.fit.n_fit == 200
    assert abs(r.fit.m_hat / 50 - 1) < 0.15


def test_ig_limit():
    assert ig_limit(DistributionFit(df=1), 0.05) == pytest.approx(3.841458820694124, abs=1e-9)
    fit = DistributionFit(df=3, m_hat=37.5, mode="exp")
    lim = ig_limit(fit, 0.01)
    assert abs(p_values_from_fit([lim], fit)[0] - 0.01) < 1e-10


# -- adjustment ---------------------------------------------------------------

def test_holm_example():
    got = adjust_p_values([0.01, 0.04, 0.03, 0.005], "holm")
    np.testing.assert_allclose(got, [0.03, 0.06, 0.06, 0.02], atol=1e-15)


def test_bh_example():
    got = adjust_p_values([0.01, 0.04, 0.03, 0.005], "BH")
    np.testing.assert_allclose(got, [0.02, 0.04, 0.04, 0.02], atol=1e-15)


def test_by_example():
    c = 1 + 1 / 2 + 1 / 3 + 1 / 4
    got = adjust_p_values([0.01, 0.04, 0.03, 0.005], "BY")
    np.testing.assert_allclose(got, np.minimum(1, np.array([0.02, 0.04, 0.04, 0.02]) * c), atol=1e-15)


def test_adjust_clamps_and_validates():
    assert adjust_p_values([0.9, 0.8], "holm").tolist() == [1.0, 1.0]
    with pytest.raises(ValueError):
        adjust_p_values([0.1], "bonferroni")
    with pytest.raises(ValueError):
        adjust_p_values([1.5], "holm")


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), st.sampled_from(["holm", "BH", "BY"]))
@settings(max_examples=80, deadline=None)
def test_adjust_properties(p, method):
    p = np.asarray(p)
    a = adjust_p_values(p, method)
    assert np.all(a >= p - 1e-15) and np.all(a <= 1)
    o = np.argsort(p, kind="stable")
    assert np.all(np.diff(a[o]) >= -1e-15)
    if method == "BY":
        assert np.all(a >= adjust_p_values(p, "BH") - 1e-15)


# -- Welch --------------------------------------------------------------------

def mp_welch(a, b):
    a = [mpmath.mpf(float(v)) for v in a]
    b = [mpmath.mpf(float(v)) for v in b]

    def mv(x):
        m = sum(x) / len(x)
        return m, sum((v - m) ** 2 for v in x) / (len(x) - 1)

    ma, va = mv(a)
    mb, vb = mv(b)
    sa, sb = va / len(a), vb / len(b)
    t = (ma - mb) / mpmath.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (len(a) - 1) + sb**2 / (len(b) - 1))
    return float(mpmath.betainc(df / 2, mpmath.mpf(1) / 2, 0, df / (df + t * t), regularized=True))


def test_welch_against_mpmath():
    rng = np.random.default_rng(4)
    for _ in range(20):
        a = rng.normal(0, rng.uniform(0.5, 3), size=int(rng.integers(3, 40)))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 3), size=int(rng.integers(3, 40)))
        assert abs(welch_t_test(a, b) - mp_welch(a, b)) < 1e-9


def test_welch_toy():
    p = welch_t_test([1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0])
    assert abs(p - mp_welch([1, 2, 3, 4], [2, 4, 6, 8])) < 1e-12


def test_welch_degenerate():
    with pytest.raises(ValueError, match="degenerate"):
        welch_t_test([1.0, 1.0, 1.0], [2.0, 2.0])


def test_contrast_sample_without_positive_values_falls_back(caplog):
    rng = np.random.default_rng(1)
    stats = rng.chisquare(2, size=(100, 20)).max(axis=1)
    with caplog.at_level("WARNING"):
        r = compute_p_values(stats, 2, mode="exp", fit_sample=[0.0, 0.0])
    assert "no positive contrast" in caplog.text
    assert r.fit == trimmed_fit(stats, 2)
