"""Multidimensional feature selection by exhaustive information-gain search."""

from .dataset import (
    AugmentedDataset,
    Dataset,
    add_contrast_variables,
    load_madelon,
    load_matrix_csv,
    make_parity_dataset,
    write_matrix_csv,
)
from .discretization import DiscretizationParams, DiscretizedView, discretize_all
from .engine import (
    ContingencyCounts,
    EngineParams,
    MaxIGResult,
    TupleRecord,
    compute_interesting_tuples,
    compute_max_info_gains,
)
from .estimators import MDFSSelector, RandomizedDiscretizer
from .pipeline import MdfsParams, MdfsResult, relevant_variables, run_mdfs
from .stats import DistributionFit, adjust_p_values, ig_limit
from .validation import DataError

__version__ = "0.1.0"
