"""Dataset ingestion, validation and contrast-variable augmentation."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .validation import DataError, check_decision, check_features

logger = logging.getLogger(__name__)

DEFAULT_DECISION_COLUMN = "decision"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """N objects x M real variables plus a binary decision vector."""

    features: np.ndarray
    decision: np.ndarray
    variable_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = check_features(self.features)
        y = check_decision(self.decision, X.shape[0])
        names = tuple(self.variable_names) or tuple(
            f"V{i + 1}" for i in range(X.shape[1])
        )
        if len(names) != X.shape[1]:
            raise DataError(
                f"{len(names)} variable names given for {X.shape[1]} variables"
            )
        constant = np.flatnonzero(np.all(X == X[0], axis=0))
        if constant.size:
            logger.warning(
                "%d constant variable(s) will receive zero information gain: %s",
                constant.size,
                ", ".join(names[i] for i in constant[:10]),
            )
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "decision", _frozen(y))
        object.__setattr__(self, "variable_names", names)

    @property
    def n_objects(self) -> int:
        return self.features.shape[0]

    @property
    def n_variables(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class AugmentedDataset:
    """A dataset whose trailing columns are permuted copies of original ones."""

    data: Dataset
    contrast_mask: np.ndarray
    contrast_source: np.ndarray

    @property
    def n_original(self) -> int:
        return int(np.count_nonzero(~self.contrast_mask))


def load_matrix_csv(path, decision_column=DEFAULT_DECISION_COLUMN, delimiter=","):
    """Read a CSV file with a header row into a :class:`Dataset`.

    ``decision_column`` is a header name or a zero-based column position.
    """
    if not os.path.exists(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [r for r in reader if r]

    if isinstance(decision_column, int) or str(decision_column).lstrip("-").isdigit():
        col = int(decision_column)
        if not -len(header) <= col < len(header):
            raise DataError(f"{path}: decision column {col} out of range")
        col %= len(header)
    else:
        try:
            col = header.index(decision_column)
        except ValueError:
            raise DataError(
                f"{path}: decision column {decision_column!r} not in header"
            ) from None

    values = np.empty((len(rows), len(header)), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(
                f"{path}: row {i + 2} has {len(row)} fields, header has {len(header)}"
            )
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell {cell!r} at row {i + 2}, column {header[j]!r}"
                ) from None

    keep = [j for j in range(len(header)) if j != col]
    return Dataset(
        features=values[:, keep],
        decision=values[:, col],
        variable_names=tuple(header[j] for j in keep),
    )


def write_matrix_csv(ds: Dataset, path, decision_column=DEFAULT_DECISION_COLUMN, delimiter=","):
    """Write ``ds`` so that :func:`load_matrix_csv` reproduces it exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow([*ds.variable_names, decision_column])
        for row, d in zip(ds.features, ds.decision):
            w.writerow([repr(float(v)) for v in row] + [int(d)])


def load_madelon(data_path, labels_path, n_features: int | None = 500):
    """Load the UCI Madelon layout: whitespace-separated integer rows plus a
    label file with one value in {-1, 1} per line."""
    for p in (data_path, labels_path):
        if not os.path.exists(p):
            raise DataError(f"no such file: {p}")
    rows = []
    with open(data_path) as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if not fields:
                continue
            if n_features is None:
                n_features = len(fields)
            if len(fields) != n_features:
                raise DataError(
                    f"{data_path}: row length mismatch at line {lineno} "
                    f"({len(fields)} fields, expected {n_features})"
                )
            try:
                rows.append([int(f) for f in fields])
            except ValueError:
                raise DataError(f"{data_path}: non-integer value at line {lineno}") from None
    with open(labels_path) as fh:
        try:
            labels = [int(float(s)) for s in fh.read().split()]
        except ValueError:
            raise DataError(f"{labels_path}: non-numeric label") from None
    if len(labels) != len(rows):
        raise DataError(
            f"label count mismatch: {len(labels)} labels for {len(rows)} rows"
        )
    if not set(labels) <= {-1, 1}:
        raise DataError(f"{labels_path}: labels must be -1 or 1")
    return Dataset(features=np.asarray(rows, dtype=np.float64), decision=np.asarray(labels))


def add_contrast_variables(ds: Dataset, n_contrast: int, rng: np.random.Generator):
    """Append ``n_contrast`` permuted copies of randomly chosen original columns.

    Sources are drawn uniformly with replacement.
    """
    if n_contrast < 0:
        raise ValueError(f"n_contrast must be >= 0, got {n_contrast}")
    m = ds.n_variables
    if n_contrast == 0:
        return AugmentedDataset(
            data=ds,
            contrast_mask=_frozen(np.zeros(m, dtype=bool)),
            contrast_source=_frozen(np.zeros(0, dtype=np.int64)),
        )
    sources = rng.integers(0, m, size=n_contrast)
    contrast = np.empty((ds.n_objects, n_contrast), dtype=np.float64)
    for j, s in enumerate(sources):
        contrast[:, j] = rng.permutation(ds.features[:, s])
    names = ds.variable_names + tuple(f"contrast{j + 1}" for j in range(n_contrast))
    data = Dataset(
        features=np.hstack([ds.features, contrast]),
        decision=ds.decision,
        variable_names=names,
    )
    mask = np.zeros(m + n_contrast, dtype=bool)
    mask[m:] = True
    return AugmentedDataset(data=data, contrast_mask=_frozen(mask), contrast_source=_frozen(sources))


def make_parity_dataset(
    n_objects=2000,
    n_base=5,
    n_combined=15,
    n_noise=480,
    flip=0.01,
    seed=0,
):
    """Synthetic data built the way Madelon was.

    Base variables are Gaussian clusters on the vertices of a hypercube; each
    vertex gets a random class so that the decision is a random parity-like
    function of the base variables. ``n_combined`` variables are noisy linear
    combinations of the base ones, the rest is pure noise. Returns the
    dataset and the indices of the base and combined columns.
    """
    rng = np.random.default_rng(seed)
    n_vertices = 2**n_base
    vertex_class = rng.permutation(np.arange(n_vertices) % 2)
    vertex = rng.integers(0, n_vertices, size=n_objects)
    bits = (vertex[:, None] >> np.arange(n_base)) & 1
    base = 2.0 * bits - 1.0 + rng.normal(scale=0.5, size=(n_objects, n_base))
    y = vertex_class[vertex].astype(np.int64)
    flipped = rng.random(n_objects) < flip
    y[flipped] = 1 - y[flipped]

    weights = rng.uniform(-1.0, 1.0, size=(n_base, n_combined))
    combined = base @ weights + rng.normal(scale=0.1, size=(n_objects, n_combined))
    noise = rng.normal(size=(n_objects, n_noise))

    X = np.hstack([base, combined, noise])
    order = rng.permutation(X.shape[1])
    X = X[:, order]
    inverse = np.argsort(order)
    informative = np.sort(inverse[: n_base + n_combined])
    base_idx = np.sort(inverse[:n_base])
    return Dataset(features=X, decision=y), base_idx, informative
