"""scikit-learn compatible wrappers."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .dataset import Dataset
from .discretization import DiscretizationParams, apply_thresholds, discretize_all
from .pipeline import MdfsParams, run_mdfs


class MDFSSelector(SelectorMixin, BaseEstimator):
    """Select variables that are k-weakly relevant to a binary target.

    Fitted attributes: ``statistic_``, ``p_values_``, ``adjusted_p_values_``,
    ``relevant_variables_``, ``fit_`` (the null model) and ``result_``.

    Parameters
    ----------
    dimensions : int
        Tuple size k searched exhaustively (1..5).
    discretizations, divisions, range :
        Randomized discretization settings; ``range=None`` picks 0 for a
        single discretization and 0.5 otherwise.
    n_contrast : int
        Number of permuted contrast columns used to fit the null.
    """

    def __init__(
        self,
        dimensions=1,
        divisions=1,
        discretizations=1,
        range=None,
        pseudocount=0.25,
        n_contrast=30,
        seed=None,
        adjust="holm",
        level=0.05,
        track_tuples=False,
        workers=1,
    ):
        self.dimensions = dimensions
        self.divisions = divisions
        self.discretizations = discretizations
        self.range = range
        self.pseudocount = pseudocount
        self.n_contrast = n_contrast
        self.seed = seed
        self.adjust = adjust
        self.level = level
        self.track_tuples = track_tuples
        self.workers = workers

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=False, dtype=np.float64)
        self.classes_, y_enc = np.unique(y, return_inverse=True)
        if self.classes_.size != 2:
            raise ValueError(f"binary target required, got {self.classes_.size} classes")
        params = MdfsParams(
            dimensions=self.dimensions, divisions=self.divisions,
            discretizations=self.discretizations, range=self.range,
            pseudocount_xi=self.pseudocount, n_contrast=self.n_contrast, seed=self.seed,
            adjust_method=self.adjust, level=self.level, track_tuples=self.track_tuples,
        )
        self.result_ = run_mdfs(Dataset(X, y_enc), params, workers=self.workers)
        self.statistic_ = self.result_.statistic
        self.p_values_ = self.result_.p_value
        self.adjusted_p_values_ = self.result_.adjusted_p_value
        self.relevant_variables_ = self.result_.relevant_variables
        self.fit_ = self.result_.fit
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "relevant_variables_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.relevant_variables_] = True
        return mask


class RandomizedDiscretizer(TransformerMixin, BaseEstimator):
    """Rank-based randomized discretizer.

    ``transform`` returns integer levels of shape
    ``(n_samples, n_features * discretizations)``, grouped by discretization.
    """

    def __init__(self, divisions=1, discretizations=1, range=None, seed=0):
        self.divisions = divisions
        self.discretizations = discretizations
        self.range = range
        self.seed = seed

    def fit(self, X, y=None):
        X = validate_data(self, X, dtype=np.float64)
        params = DiscretizationParams(self.divisions, self.discretizations, self.range, self.seed)
        self.thresholds_ = discretize_all(X, params).thresholds
        return self

    def transform(self, X):
        check_is_fitted(self, "thresholds_")
        X = validate_data(self, X, dtype=np.float64, reset=False)
        levels = apply_thresholds(X, self.thresholds_)  # [D, M, N]
        return levels.transpose(2, 0, 1).reshape(X.shape[0], -1)
