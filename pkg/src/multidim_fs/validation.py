"""Input validation helpers shared by the estimators, the pipeline and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

MAX_DIMENSIONS = 5
MAX_DIVISIONS = 15


class DataError(ValueError):
    """Raised when input data violates the dataset contract."""


def check_decision(y, n_samples: int | None = None) -> np.ndarray:
    """Return ``y`` as a uint8 vector of 0/1 labels.

    Accepts {0, 1}, {-1, 1} and booleans; -1 maps to 0.
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise DataError(f"decision must be one-dimensional, got shape {y.shape}")
    if n_samples is not None and y.shape[0] != n_samples:
        raise DataError(
            f"decision length {y.shape[0]} does not match {n_samples} objects"
        )
    if y.dtype == bool:
        y = y.astype(np.int64)
    if not np.issubdtype(y.dtype, np.number):
        raise DataError("decision must be numeric")
    if not np.all(np.isfinite(y)):
        raise DataError("decision contains non-finite values")
    values = set(np.unique(y).tolist())
    if not values <= {0, 1} and not values <= {-1, 1}:
        raise DataError(f"non-binary decision: values {sorted(values)}")
    if len(values) < 2:
        raise DataError("constant decision")
    return (y > 0).astype(np.uint8)


def check_features(X, min_objects: int = 2) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"features must be a 2-D matrix, got shape {X.shape}")
    if X.shape[0] < min_objects:
        raise DataError(f"need at least {min_objects} objects, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise DataError("need at least 1 variable")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
    return X


def check_dimensions(k) -> int:
    if not isinstance(k, numbers.Integral) or not 1 <= k <= MAX_DIMENSIONS:
        raise ValueError(f"dimensions must be 1..{MAX_DIMENSIONS}, got {k!r}")
    return int(k)


def check_divisions(divisions) -> int:
    if not isinstance(divisions, numbers.Integral) or not 1 <= divisions <= MAX_DIVISIONS:
        raise ValueError(f"divisions must be 1..{MAX_DIVISIONS}, got {divisions!r}")
    return int(divisions)


def check_discretizations(d) -> int:
    if not isinstance(d, numbers.Integral) or d < 1:
        raise ValueError(f"discretizations must be >= 1, got {d!r}")
    return int(d)


def check_range(r) -> float:
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ValueError(f"range must lie in [0, 1], got {r}")
    return r


def check_level(level) -> float:
    level = float(level)
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    return level


def check_seed(seed) -> int:
    if not isinstance(seed, numbers.Integral) or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)
