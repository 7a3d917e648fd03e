"""Seeded randomized rank-based discretization.

Every variable is cut into ``c = divisions + 1`` levels. The share of each
level is drawn from Uniform(1 - range, 1 + range); shares are turned into
distinct ranks in [2, N] and the sorted values at those ranks become the
thresholds. A value falls into level ``|{j : v > t_j}|``.

Random streams are derived per (seed, discretization, variable): the key of a
Philox4x64 generator is taken from ``SeedSequence(seed)`` and its 256-bit
counter starts at ``(0, 0, variable, discretization)``. Discretization ``t``
of variable ``v`` therefore never depends on how many discretizations were
requested or on the order in which they are computed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .validation import (
    check_discretizations,
    check_divisions,
    check_range,
    check_seed,
)


def default_range(discretizations: int) -> float:
    return 0.0 if discretizations == 1 else 0.5


@dataclass(frozen=True)
class DiscretizationParams:
    divisions: int = 1
    discretizations: int = 1
    range: float | None = None
    seed: int = 0

    def __post_init__(self):
        check_divisions(self.divisions)
        check_discretizations(self.discretizations)
        r = default_range(self.discretizations) if self.range is None else self.range
        object.__setattr__(self, "range", check_range(r))
        object.__setattr__(self, "seed", check_seed(self.seed))

    @property
    def levels(self) -> int:
        return self.divisions + 1


@dataclass(frozen=True)
class DiscretizedView:
    """``levels[t, v, n]`` is the level of object n in variable v under
    discretization t; ``thresholds[t, v]`` holds the cut values."""

    levels: np.ndarray
    thresholds: np.ndarray
    params: DiscretizationParams

    @property
    def n_discretizations(self) -> int:
        return self.levels.shape[0]

    @property
    def n_variables(self) -> int:
        return self.levels.shape[1]

    @property
    def n_objects(self) -> int:
        return self.levels.shape[2]


def substream(seed: int, discretization: int, variable: int) -> np.random.Generator:
    key = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    return np.random.Generator(
        np.random.Philox(key=key, counter=[0, 0, variable, discretization])
    )


def sample_shares(rng: np.random.Generator, divisions: int, range: float) -> np.ndarray:
    if range == 0.0:
        return np.ones(divisions + 1)
    return rng.uniform(1.0 - range, 1.0 + range, size=divisions + 1)


def cut_positions(shares, n: int) -> np.ndarray:
    """Map level shares to strictly increasing 1-based ranks in [2, n]."""
    shares = np.asarray(shares, dtype=np.float64)
    divisions = shares.size - 1
    if divisions < 1:
        raise ValueError("need at least two shares")
    if n - 1 < divisions:
        raise ValueError(f"N={n} too small for {divisions} distinct cut ranks in [2, N]")
    cum = np.cumsum(shares)[:-1] / shares.sum()
    ranks = [min(max(math.floor(n * c + 0.5), 2), n) for c in cum]
    for j in range(1, divisions):
        if ranks[j] <= ranks[j - 1]:
            ranks[j] = ranks[j - 1] + 1
    if ranks[-1] > n:
        ranks[-1] = n
        for j in range(divisions - 2, -1, -1):
            if ranks[j] >= ranks[j + 1]:
                ranks[j] = ranks[j + 1] - 1
    return np.asarray(ranks, dtype=np.int64)


def discretize_variable(values, ranks) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    thresholds = np.sort(values)[np.asarray(ranks) - 1]
    return np.searchsorted(thresholds, values, side="left").astype(np.uint8)


def discretize_all(X, params: DiscretizationParams) -> DiscretizedView:
    """Discretize every column of ``X`` (an N x M matrix or a Dataset)."""
    X = np.asarray(getattr(X, "features", X), dtype=np.float64)
    n, m = X.shape
    d = params.discretizations
    sorted_cols = np.sort(X, axis=0)

    if params.range == 0.0:
        ranks = cut_positions(np.ones(params.levels), n)
        all_ranks = np.broadcast_to(ranks, (d, m, ranks.size))
    else:
        all_ranks = np.empty((d, m, params.divisions), dtype=np.int64)
        for t in range(d):
            for v in range(m):
                shares = sample_shares(substream(params.seed, t, v), params.divisions, params.range)
                all_ranks[t, v] = cut_positions(shares, n)

    cols = np.arange(m)[:, None]
    thresholds = np.empty((d, m, params.divisions))
    levels = np.empty((d, m, n), dtype=np.uint8)
    for t in range(d):
        thr = sorted_cols[all_ranks[t] - 1, cols]
        thresholds[t] = thr
        levels[t] = (X.T[:, :, None] > thr[:, None, :]).sum(axis=2)
    levels.flags.writeable = False
    thresholds.flags.writeable = False
    return DiscretizedView(levels=levels, thresholds=thresholds, params=params)


def apply_thresholds(X, thresholds) -> np.ndarray:
    """Discretize new data with thresholds from an earlier :func:`discretize_all`."""
    X = np.asarray(X, dtype=np.float64)
    thresholds = np.asarray(thresholds)
    return (X.T[None, :, :, None] > thresholds[:, :, None, :]).sum(axis=3).astype(np.uint8)
