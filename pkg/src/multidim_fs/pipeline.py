"""End-to-end relevance analysis: contrast augmentation, discretization,
max-IG search, null fit, adjustment and the level cut."""

from __future__ import annotations

import logging
import secrets
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import Dataset, add_contrast_variables
from .discretization import DiscretizationParams, default_range, discretize_all
from .engine import EngineParams, compute_max_info_gains
from .stats import (
    ADJUST_METHODS,
    DistributionFit,
    adjust_p_values,
    compute_p_values,
    degrees_of_freedom,
    welch_t_test,
)
from .validation import DataError, check_dimensions, check_level, check_seed

logger = logging.getLogger(__name__)

# product of divisions and discretizations below which a "lin" null family
# was once used for 1D fits; kept for reference, behaves as "exp"
LIN_MODE_THRESHOLD = 12


@dataclass(frozen=True)
class MdfsParams:
    dimensions: int = 1
    divisions: int = 1
    discretizations: int = 1
    range: float | None = None
    pseudocount_xi: float = 0.25
    n_contrast: int = 30
    seed: int | None = None
    adjust_method: str = "holm"
    level: float = 0.05
    track_tuples: bool = False

    def __post_init__(self):
        check_dimensions(self.dimensions)
        check_level(self.level)
        if self.n_contrast < 0:
            raise ValueError(f"n_contrast must be >= 0, got {self.n_contrast}")
        if self.adjust_method not in ADJUST_METHODS:
            raise ValueError(
                f"adjust_method must be one of {ADJUST_METHODS}, got {self.adjust_method!r}"
            )
        if self.seed is not None:
            check_seed(self.seed)
        # validates divisions, discretizations and range
        DiscretizationParams(self.divisions, self.discretizations, self.range, self.seed or 0)

    @property
    def fit_mode(self) -> str:
        return "raw" if self.dimensions == 1 and self.discretizations == 1 else "exp"


@dataclass(frozen=True)
class MdfsResult:
    statistic: np.ndarray
    p_value: np.ndarray
    adjusted_p_value: np.ndarray
    relevant_variables: np.ndarray
    fit: DistributionFit
    params: MdfsParams
    seed: int
    variable_names: tuple[str, ...] = ()
    contrast_source: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))
    contrast_statistic: np.ndarray = field(default_factory=lambda: np.zeros(0))
    best_tuple: np.ndarray | None = None
    best_discretization: np.ndarray | None = None
    wall_time: float = 0.0

    def params_dict(self) -> dict:
        d = asdict(self.params)
        d["seed"] = self.seed
        d["range"] = (
            default_range(self.params.discretizations)
            if self.params.range is None
            else self.params.range
        )
        return d


def run_mdfs(ds: Dataset, params: MdfsParams, workers: int = 1) -> MdfsResult:
    start = time.perf_counter()
    m = ds.n_variables
    if ds.n_objects < 4:
        raise DataError(f"need at least 4 objects, got {ds.n_objects}")
    if params.dimensions > m:
        raise DataError(f"k exceeds variable count: dimensions={params.dimensions}, variables={m}")

    seed = params.seed if params.seed is not None else secrets.randbits(63)
    rng = np.random.default_rng(seed)
    aug = add_contrast_variables(ds, params.n_contrast, rng)

    disc = DiscretizationParams(params.divisions, params.discretizations, params.range, seed)
    view = discretize_all(aug.data, disc)
    engine_params = EngineParams(params.dimensions, params.pseudocount_xi, disc, params.track_tuples)
    mig = compute_max_info_gains(view, aug.data.decision, engine_params, workers=workers)

    df = degrees_of_freedom(params.dimensions, disc.levels)
    statistic = mig.ig[:m]
    contrast_stat = mig.ig[m:]
    fit_sample = contrast_stat if (params.n_contrast > 0 and params.fit_mode == "exp") else None
    pv = compute_p_values(statistic, df, params.fit_mode, fit_sample).adjust(params.adjust_method)
    relevant = np.flatnonzero(pv.adjusted_p_value < params.level)
    logger.info(
        "k=%d: %d relevant of %d (df=%g, m_hat=%.4g, mode=%s)",
        params.dimensions, relevant.size, m, df, pv.fit.m_hat, pv.fit.mode,
    )
    return MdfsResult(
        statistic=statistic,
        p_value=pv.p_value,
        adjusted_p_value=pv.adjusted_p_value,
        relevant_variables=relevant,
        fit=pv.fit,
        params=params,
        seed=seed,
        variable_names=ds.variable_names,
        contrast_source=np.asarray(aug.contrast_source),
        contrast_statistic=contrast_stat,
        best_tuple=None if mig.best_tuple is None else mig.best_tuple[:m],
        best_discretization=None if mig.best_discretization is None else mig.best_discretization[:m],
        wall_time=time.perf_counter() - start,
    )


def relevant_variables(result: MdfsResult, level: float | None = None):
    """Recut stored adjusted p-values at ``level``.

    Returns the sorted relevant indices and the same indices ordered by
    ascending p-value (ties by index).
    """
    level = result.params.level if level is None else check_level(level)
    relevant = np.flatnonzero(result.adjusted_p_value < level)
    order = np.lexsort((relevant, result.p_value[relevant]))
    return relevant, relevant[order]


def t_test_all(ds: Dataset, adjust: str = "holm"):
    """Welch p-values per variable, class 1 vs class 0.

    Returns ``(p, adjusted, failed)``; variables with zero variance in both
    groups get NaN and are flagged in ``failed``; they are excluded from the
    adjustment.
    """
    y = ds.decision.astype(bool)
    p = np.full(ds.n_variables, np.nan)
    failed = np.zeros(ds.n_variables, dtype=bool)
    for i in range(ds.n_variables):
        try:
            p[i] = welch_t_test(ds.features[y, i], ds.features[~y, i])
        except ValueError:
            failed[i] = True
    adjusted = np.full(ds.n_variables, np.nan)
    adjusted[~failed] = adjust_p_values(p[~failed], adjust)
    return p, adjusted, failed
