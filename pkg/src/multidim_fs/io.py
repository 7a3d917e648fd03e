"""Result files: versioned JSON (canonical) and a flat CSV export."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .pipeline import MdfsParams, MdfsResult, relevant_variables
from .stats import DistributionFit, ig_limit

SCHEMA_VERSION = 1


def atomic_write(path, text: str):
    """Write via a temporary file in the same directory and rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def result_to_dict(result: MdfsResult, timing: bool = True) -> dict:
    _, ordered = relevant_variables(result)
    names = result.variable_names
    d = {
        "schema_version": SCHEMA_VERSION,
        "variable_names": list(names),
        "statistic": result.statistic.tolist(),
        "p_value": result.p_value.tolist(),
        "adjusted_p_value": result.adjusted_p_value.tolist(),
        "relevant": result.relevant_variables.tolist(),
        "relevant_ordered": ordered.tolist(),
        "relevant_names": [names[i] for i in ordered],
        "fit": result.fit.to_dict(),
        "ig_limit": ig_limit(result.fit, result.params.level),
        "params": result.params_dict(),
        "seed": result.seed,
        "contrast_source": np.asarray(result.contrast_source).tolist(),
        "best_tuple": None if result.best_tuple is None else result.best_tuple.tolist(),
        "best_discretization": (
            None if result.best_discretization is None else result.best_discretization.tolist()
        ),
    }
    if timing:
        d["timing"] = {"wall_seconds": result.wall_time}
    return d


def result_from_dict(d: dict) -> MdfsResult:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    p = dict(d["params"])
    params = MdfsParams(**p)
    bt = d.get("best_tuple")
    bd = d.get("best_discretization")
    return MdfsResult(
        statistic=np.asarray(d["statistic"], dtype=np.float64),
        p_value=np.asarray(d["p_value"], dtype=np.float64),
        adjusted_p_value=np.asarray(d["adjusted_p_value"], dtype=np.float64),
        relevant_variables=np.asarray(d["relevant"], dtype=np.int64),
        fit=DistributionFit(**d["fit"]),
        params=params,
        seed=int(d["seed"]),
        variable_names=tuple(d["variable_names"]),
        contrast_source=np.asarray(d.get("contrast_source", []), dtype=np.int64),
        best_tuple=None if bt is None else np.asarray(bt, dtype=np.int64),
        best_discretization=None if bd is None else np.asarray(bd, dtype=np.int64),
        wall_time=float(d.get("timing", {}).get("wall_seconds", 0.0)),
    )


def dumps_json(result: MdfsResult, timing: bool = True) -> str:
    return json.dumps(result_to_dict(result, timing=timing), indent=1) + "\n"


def dumps_csv(result: MdfsResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variable", "name", "statistic", "p_value", "adjusted_p_value", "relevant"])
    rel = set(result.relevant_variables.tolist())
    for i, name in enumerate(result.variable_names):
        w.writerow([
            i, name, repr(float(result.statistic[i])), repr(float(result.p_value[i])),
            repr(float(result.adjusted_p_value[i])), int(i in rel),
        ])
    return buf.getvalue()


def load_result(path) -> MdfsResult:
    with open(path) as fh:
        return result_from_dict(json.load(fh))
