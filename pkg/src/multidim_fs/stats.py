"""Null distributions, p-values and multiple-testing adjustment.

The statistic of an irrelevant variable for one tuple follows chi-squared
with ``(c - 1) * c**(k - 1)`` degrees of freedom. The maximum over many
correlated tuples is modeled as ``F(s)**m`` where ``F`` is the chi-squared
CDF and ``m`` the effective number of independent tests, fitted by maximum
likelihood on statistics known (or presumed) to be irrelevant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import betainc

logger = logging.getLogger(__name__)

_EPS = 1e-16
_MAX_ITER = 10_000
_LOG_F_MIN = math.log(1e-300)
_LOG_F_MAX = math.log1p(-1e-16)

ADJUST_METHODS = ("holm", "BH", "BY")


# -- regularized incomplete gamma ------------------------------------------

def _gamma_prefactor(a: float, x: float) -> float:
    return math.exp(a * math.log(x) - x - math.lgamma(a))


def _lower_series(a: float, x: float) -> float:
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * _gamma_prefactor(a, x)


def _upper_fraction(a: float, x: float) -> float:
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * _gamma_prefactor(a, x)


def gamma_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _lower_series(a, x)
    return 1.0 - _upper_fraction(a, x)


def gamma_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _lower_series(a, x)
    return _upper_fraction(a, x)


def _check_chi2(s, df):
    if df <= 0 or not math.isfinite(df):
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if s < 0 or math.isnan(s):
        raise ValueError(f"chi-squared argument must be >= 0, got {s}")


def chi2_cdf(s, df):
    if np.ndim(s):
        return np.array([chi2_cdf(float(v), df) for v in np.ravel(s)]).reshape(np.shape(s))
    _check_chi2(s, df)
    if math.isinf(s):
        return 1.0
    return gamma_p(0.5 * df, 0.5 * s)


def chi2_sf(s, df):
    if np.ndim(s):
        return np.array([chi2_sf(float(v), df) for v in np.ravel(s)]).reshape(np.shape(s))
    _check_chi2(s, df)
    if math.isinf(s):
        return 0.0
    return gamma_q(0.5 * df, 0.5 * s)


def chi2_quantile(p: float, df: float) -> float:
    """Inverse of :func:`chi2_cdf` by bracketed root finding."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"probability must lie in [0, 1), got {p}")
    if p == 0.0:
        return 0.0
    if p > 0.5:
        return chi2_isf(1.0 - p, df)
    hi = max(float(df), 1.0)
    while chi2_cdf(hi, df) < p:
        hi *= 2.0
    return brentq(lambda x: chi2_cdf(x, df) - p, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def chi2_isf(q: float, df: float) -> float:
    """Value whose chi-squared upper-tail probability is ``q``."""
    if not 0.0 < q <= 1.0:
        raise ValueError(f"tail probability must lie in (0, 1], got {q}")
    if q == 1.0:
        return 0.0
    hi = max(float(df), 1.0)
    while chi2_sf(hi, df) > q:
        hi *= 2.0
    lq = math.log(q)
    # log-space keeps the root well conditioned deep in the tail
    return brentq(
        lambda x: math.log(max(chi2_sf(x, df), 1e-320)) - lq,
        0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500,
    )


def degrees_of_freedom(dimensions: int, levels: int) -> float:
    return float((levels - 1) * levels ** (dimensions - 1))


# -- max-statistic null model ----------------------------------------------

@dataclass(frozen=True)
class DistributionFit:
    df: float
    m_hat: float = 1.0
    mode: str = "raw"
    n_fit: int = 0

    def __post_init__(self):
        if self.mode not in ("raw", "exp"):
            raise ValueError(f"unknown fit mode {self.mode!r}")
        if self.mode == "raw" and self.m_hat != 1.0:
            raise ValueError("raw mode has m_hat = 1")
        if not (self.m_hat > 0 and math.isfinite(self.m_hat)):
            raise ValueError(f"m_hat must be positive and finite, got {self.m_hat}")

    def to_dict(self):
        return {"df": self.df, "m_hat": self.m_hat, "mode": self.mode, "n_fit": self.n_fit}


def _log_cdf(stats, df):
    stats = np.maximum(np.asarray(stats, dtype=np.float64), 0.0)
    q = chi2_sf(stats, df)
    with np.errstate(divide="ignore"):
        return np.log1p(-q)


def fit_effective_tests(stats, df: float) -> DistributionFit:
    """Maximum-likelihood ``m`` for the family ``CDF(s) = F(s)**m``."""
    stats = np.asarray(stats, dtype=np.float64)
    if stats.size == 0:
        raise ValueError("empty fit sample")
    if np.any(stats < 0) or not np.all(np.isfinite(stats)):
        raise ValueError("fit sample must be finite and non-negative")
    if np.all(stats == 0):
        raise ValueError("degenerate fit sample")
    log_f = np.clip(_log_cdf(stats, df), _LOG_F_MIN, _LOG_F_MAX)
    m_hat = -stats.size / float(np.sum(log_f))
    return DistributionFit(df=df, m_hat=m_hat, mode="exp", n_fit=int(stats.size))


def trimmed_fit(stats, df: float, p_cut: float = 0.01, max_iter: int = 20) -> DistributionFit:
    """Fit on all positive statistics, drop those the fit calls significant
    at ``p_cut`` and refit, until the kept set stops changing."""
    stats = np.asarray(stats, dtype=np.float64)
    usable = np.isfinite(stats) & (stats > 0)
    keep = usable
    fit = fit_effective_tests(stats[keep], df)
    for _ in range(max_iter):
        p = p_values_from_fit(stats, fit)
        new_keep = usable & (p >= p_cut)
        if np.array_equal(new_keep, keep) or not new_keep.any():
            break
        keep = new_keep
        fit = fit_effective_tests(stats[keep], df)
    return fit


def p_values_from_fit(stats, fit: DistributionFit) -> np.ndarray:
    """``1 - F(s)**m``; negative statistics are treated as zero."""
    log_f = _log_cdf(stats, fit.df)
    with np.errstate(invalid="ignore"):
        p = -np.expm1(fit.m_hat * log_f)
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True)
class PValueResult:
    p_value: np.ndarray
    fit: DistributionFit
    adjusted_p_value: np.ndarray | None = None
    method: str | None = None

    def adjust(self, method: str) -> "PValueResult":
        return replace(self, adjusted_p_value=adjust_p_values(self.p_value, method), method=method)


def compute_p_values(stats, df: float, mode: str = "exp", fit_sample=None) -> PValueResult:
    """p-values of ``stats`` under the raw chi-squared or the fitted max model.

    In exp mode ``fit_sample`` holds statistics of known-irrelevant variables
    (contrast variables); without it the fit is trimmed iteratively.
    """
    stats = np.asarray(stats, dtype=np.float64)
    if mode == "raw":
        fit = DistributionFit(df=df)
    elif mode == "exp":
        if fit_sample is None:
            fit = trimmed_fit(stats, df)
        else:
            sample = np.asarray(fit_sample, dtype=np.float64)
            sample = sample[sample > 0]
            if sample.size:
                fit = fit_effective_tests(sample, df)
            else:
                logger.warning("no positive contrast statistic; fitting on the variables themselves")
                fit = trimmed_fit(stats, df)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return PValueResult(p_value=p_values_from_fit(stats, fit), fit=fit)


def ig_limit(fit: DistributionFit, alpha: float) -> float:
    """Statistic value whose p-value under ``fit`` equals ``alpha``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha == 1.0:
        return 0.0
    q = -math.expm1(math.log1p(-alpha) / fit.m_hat)
    return chi2_isf(q, fit.df)


# -- multiple testing --------------------------------------------------------

def adjust_p_values(p, method: str = "holm") -> np.ndarray:
    """Holm step-down, Benjamini-Hochberg or Benjamini-Yekutieli step-up."""
    p = np.asarray(p, dtype=np.float64)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    n = p.size
    if n == 0:
        return p.copy()
    order = np.argsort(p, kind="stable")
    ps = p[order]
    rank = np.arange(1, n + 1)
    if method == "holm":
        adj = np.maximum.accumulate((n - rank + 1) * ps)
    elif method in ("BH", "BY"):
        scale = 1.0 if method == "BH" else float(np.sum(1.0 / rank))
        adj = np.minimum.accumulate((scale * n * ps / rank)[::-1])[::-1]
    else:
        raise ValueError(f"unknown adjustment {method!r}; expected one of {ADJUST_METHODS}")
    out = np.empty(n)
    out[order] = np.minimum(adj, 1.0)
    return out


# -- reference univariate filter ------------------------------------------

def welch_t_test(a, b) -> float:
    """Two-sided p-value of Welch's unequal-variance t-test."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least two values")
    va = a.var(ddof=1) / a.size
    vb = b.var(ddof=1) / b.size
    se2 = va + vb
    if se2 == 0.0:
        raise ValueError("degenerate groups: zero variance in both")
    t = (a.mean() - b.mean()) / math.sqrt(se2)
    df = se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    return float(betainc(0.5 * df, 0.5, df / (df + t * t)))
