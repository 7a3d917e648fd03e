"""Exhaustive k-tuple information-gain engine.

The statistic for variable ``i`` in a tuple is

    2 * (CE(tuple without i) - CE(tuple))

where ``CE`` is the count-weighted conditional entropy of the decision in
nats, with per-class pseudocounts ``beta_d = xi * N_d / min(N_0, N_1)`` added
to every voxel. Without pseudocounts and for k = 1 this is the G statistic
of the 2 x c contingency table. ``compute_max_info_gains`` maximizes it over
all tuples containing ``i`` and over all discretizations.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .discretization import DiscretizationParams, DiscretizedView
from .validation import check_decision, check_dimensions

N_CHUNKS = 64


@dataclass(frozen=True)
class EngineParams:
    dimensions: int = 1
    pseudocount_xi: float = 0.25
    disc: DiscretizationParams = field(default_factory=DiscretizationParams)
    track_tuples: bool = False

    def __post_init__(self):
        check_dimensions(self.dimensions)
        xi = float(self.pseudocount_xi)
        if not 0.0 <= xi <= 1.0:
            raise ValueError(f"pseudocount must lie in [0, 1], got {xi}")
        object.__setattr__(self, "pseudocount_xi", xi)


@dataclass(frozen=True)
class ContingencyCounts:
    """``counts[d, voxel]`` with ``voxel = sum_j level_j * c**j``."""

    k: int
    c: int
    counts: np.ndarray

    @property
    def n_objects(self) -> int:
        return int(self.counts.sum())

    def marginal(self, axis: int) -> "ContingencyCounts":
        """Sum out tuple member ``axis``."""
        shape = (2,) + (self.c,) * self.k
        # voxel index is little-endian in members, numpy reshape is big-endian
        arr = self.counts.reshape(shape[:1] + shape[1:][::-1])
        summed = arr.sum(axis=self.k - axis)
        return ContingencyCounts(self.k - 1, self.c, summed.reshape(2, -1))


@dataclass(frozen=True)
class MaxIGResult:
    ig: np.ndarray
    best_tuple: np.ndarray | None
    best_discretization: np.ndarray | None
    run_params: dict


@dataclass(frozen=True, order=True)
class TupleRecord:
    variable: int
    tuple: tuple[int, ...]
    ig: float


def pseudocounts(xi: float, n0: int, n1: int) -> tuple[float, float]:
    lo = min(n0, n1)
    return xi * n0 / lo, xi * n1 / lo


def entropy_tables(n0: int, n1: int, xi: float):
    """Lookup tables so that a voxel with class counts (a, b) contributes
    ``g[a + b] - f0[a] - f1[b]`` to the conditional entropy."""
    b0, b1 = pseudocounts(xi, n0, n1)
    k = np.arange(n0 + n1 + 1, dtype=np.float64)

    def xlogx(x):
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = x[pos] * np.log(x[pos])
        return out

    return xlogx(k + b0), xlogx(k + b1), xlogx(k + b0 + b1)


def count_voxels(levels_tuple, decision, c: int | None = None, method: str = "radix"):
    """Two-class voxel counts of a tuple of level vectors.

    ``method="bits"`` (c = 2 only) counts with packed bit-vectors and
    popcount; ``"radix"`` accumulates packed voxel indices directly.
    """
    lv = np.atleast_2d(np.asarray(levels_tuple, dtype=np.uint8))
    y = check_decision(decision)
    if lv.shape[1] != y.shape[0]:
        raise ValueError(f"level vectors of length {lv.shape[1]} vs decision of length {y.shape[0]}")
    k = lv.shape[0]
    if c is None:
        c = int(lv.max()) + 1 if lv.size else 1
        c = max(c, 2)
    if lv.size and lv.max() >= c:
        raise ValueError(f"level {int(lv.max())} out of range for c={c}")
    nvox = c**k
    cnt0 = np.zeros(nvox, np.int64)
    cnt1 = np.zeros(nvox, np.int64)
    tup = np.arange(k, dtype=np.int64)
    if method == "bits":
        if c != 2:
            raise ValueError("bit-vector counting requires c = 2")
        bits, ybits, valid = pack_bits(lv, y)
        K.count_chain(bits, ybits, valid, tup, k, cnt0, cnt1)
    elif method == "radix":
        K.count_radix(np.ascontiguousarray(lv), y, tup, k, c, cnt0, cnt1, nvox)
    else:
        raise ValueError(f"unknown counting method {method!r}")
    return ContingencyCounts(k, c, np.stack([cnt0, cnt1]))


def pack_bits(levels, y):
    """Pack level-1 indicators (rows of ``levels``) and the decision into
    uint64 words. Bits past N are zero; ``valid`` masks them."""
    levels = np.asarray(levels)
    n = levels.shape[-1]
    n_words = max((n + 63) // 64, 1)
    pad = n_words * 64 - n

    def pack(rows):
        rows = np.asarray(rows, dtype=bool)
        rows = np.pad(rows, [(0, 0)] * (rows.ndim - 1) + [(0, pad)])
        packed = np.packbits(rows, axis=-1, bitorder="little")
        return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)

    bits = pack(levels == 1)
    ybits = pack(np.asarray(y)[None, :] == 1)[0]
    valid = pack(np.ones((1, n), dtype=bool))[0]
    return bits, ybits, valid


def conditional_entropy(counts: ContingencyCounts, xi: float, n0: int, n1: int) -> float:
    """Count-weighted conditional entropy (nats) with per-voxel pseudocounts."""
    b0, b1 = pseudocounts(xi, n0, n1)
    c0 = counts.counts[0].astype(np.float64) + b0
    c1 = counts.counts[1].astype(np.float64) + b1
    tot = c0 + c1
    total = 0.0
    for a, t in ((c0, tot), (c1, tot)):
        pos = a > 0
        total -= float(np.sum(a[pos] * np.log(a[pos] / t[pos])))
    return total


def tuple_ig(tuple_counts: ContingencyCounts, xi: float, n0: int, n1: int, marginal_counts=None):
    """Per-member statistic ``2 * (CE(without member) - CE(tuple))``."""
    k = tuple_counts.k
    if marginal_counts is None:
        marginal_counts = [tuple_counts.marginal(i) for i in range(k)]
    full = conditional_entropy(tuple_counts, xi, n0, n1)
    return np.array(
        [2.0 * (conditional_entropy(m, xi, n0, n1) - full) for m in marginal_counts]
    )


def _chunks(m: int, k: int):
    n_first = m - k + 1
    n = min(N_CHUNKS, n_first)
    return [np.arange(i, n_first, n, dtype=np.int64) for i in range(n)]


class _Search:
    """One exhaustive pass over all tuples, for all discretizations."""

    def __init__(self, view: DiscretizedView, decision, params: EngineParams,
                 threshold=math.inf, counting="auto"):
        if counting not in ("auto", "radix"):
            raise ValueError(f"unknown counting strategy {counting!r}")
        self.bits = counting == "auto"
        y = check_decision(decision, view.n_objects)
        self.view = view
        self.y = y
        self.k = params.dimensions
        self.c = view.params.levels
        self.m = view.n_variables
        if self.m < self.k:
            raise ValueError(
                f"dimensions k={self.k} exceeds the number of variables ({self.m})"
            )
        self.n_obj = int(y.size)
        self.n_one = int(y.sum())
        self.f0, self.f1, self.g = entropy_tables(self.n_obj - self.n_one, self.n_one, params.pseudocount_xi)
        self.threshold = float(threshold)
        self.chunks = _chunks(self.m, self.k)
        km1 = max(self.k - 1, 0)
        nc = len(self.chunks)
        self.best_val = np.full((nc, self.m), -np.inf)
        self.best_part = np.full((nc, self.m, km1), -1, dtype=np.int64)
        self.best_disc = np.full((nc, self.m), -1, dtype=np.int64)
        cap = 0 if math.isinf(self.threshold) and self.threshold > 0 else 4096
        self.records = [[] for _ in range(nc)]
        self._cap = [cap] * nc

    def _rec_buffers(self, cap):
        return (
            np.empty(cap, np.int64),
            np.empty((cap, self.k), np.int64),
            np.empty(cap, np.int64),
            np.empty(cap, np.float64),
            np.zeros(1, np.int64),
        )

    def _run_chunk(self, i, t, call):
        while True:
            rv, rt, rd, ri, nrec = self._rec_buffers(self._cap[i])
            bv = self.best_val[i].copy()
            bp = self.best_part[i].copy()
            bd = self.best_disc[i].copy()
            call(self.chunks[i], bv, bp, bd, rv, rt, rd, ri, nrec)
            n = int(nrec[0])
            if n <= self._cap[i]:
                break
            self._cap[i] = n
        self.best_val[i], self.best_part[i], self.best_disc[i] = bv, bp, bd
        if n:
            self.records[i].append((rv[:n], rt[:n], rd[:n], ri[:n]))

    def _map(self, fn, workers):
        idx = range(len(self.chunks))
        if workers <= 1:
            for i in idx:
                fn(i)
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(fn, idx))

    def run(self, workers: int = 1):
        k, c, thr = self.k, self.c, self.threshold
        f0, f1, g = self.f0, self.f1, self.g
        for t in range(self.view.n_discretizations):
            levels = self.view.levels[t]
            if self.bits and c == 2 and k in (2, 3):
                bits, ybits, _ = pack_bits(levels, self.y)
                ones = np.zeros(self.m, np.int64)
                ones1 = np.zeros(self.m, np.int64)
                ce1 = np.zeros(self.m)
                K.single_tables(bits, ybits, self.n_obj, self.n_one, f0, f1, g, ones, ones1, ce1)
                if k == 2:
                    def call(firsts, bv, bp, bd, rv, rt, rd, ri, nrec, t=t):
                        K.kernel_pairs(bits, ybits, self.n_obj, self.n_one, ones, ones1, ce1,
                                       firsts, f0, f1, g, t, thr, bv, bp, bd, rv, rt, rd, ri, nrec)
                else:
                    pair_n = np.zeros((self.m, self.m), np.int64)
                    pair_n1 = np.zeros((self.m, self.m), np.int64)
                    ce2 = np.zeros((self.m, self.m))
                    _fill_pair_tables(bits, ybits, self.n_obj, self.n_one, ones, ones1,
                                      _chunks(self.m, 2), f0, f1, g, pair_n, pair_n1, ce2, workers)

                    def call(firsts, bv, bp, bd, rv, rt, rd, ri, nrec, t=t):
                        K.kernel_triples(bits, ybits, self.n_obj, self.n_one, ones, ones1,
                                         pair_n, pair_n1, ce2, firsts, f0, f1, g, t, thr,
                                         bv, bp, bd, rv, rt, rd, ri, nrec)
            elif self.bits and c == 2:
                bits, ybits, valid = pack_bits(levels, self.y)

                def call(firsts, bv, bp, bd, rv, rt, rd, ri, nrec, t=t):
                    cnt0, cnt1, m0, m1, tup = K._scratch(k, 2, self.m)
                    K.kernel_chain(bits, ybits, valid, k, firsts, f0, f1, g, t, thr,
                                   bv, bp, bd, rv, rt, rd, ri, nrec, cnt0, cnt1, m0, m1, tup)
            else:
                levels = np.ascontiguousarray(levels)

                def call(firsts, bv, bp, bd, rv, rt, rd, ri, nrec, t=t):
                    cnt0, cnt1, m0, m1, tup = K._scratch(k, c, self.m)
                    K.kernel_radix(levels, self.y, c, k, firsts, f0, f1, g, t, thr,
                                   bv, bp, bd, rv, rt, rd, ri, nrec, cnt0, cnt1, m0, m1, tup)

            self._map(lambda i: self._run_chunk(i, t, call), workers)
        return self

    def best(self):
        km1 = max(self.k - 1, 0)
        val = np.full(self.m, -np.inf)
        part = np.full((self.m, km1), -1, dtype=np.int64)
        disc = np.full(self.m, -1, dtype=np.int64)
        for i in range(len(self.chunks)):
            K.merge_best(self.best_val[i], self.best_part[i], self.best_disc[i], val, part, disc)
        return val, part, disc

    def all_records(self):
        parts = [r for chunk in self.records for r in chunk]
        if not parts:
            return (np.empty(0, np.int64), np.empty((0, self.k), np.int64),
                    np.empty(0, np.int64), np.empty(0))
        return tuple(np.concatenate(x) for x in zip(*parts))


def _fill_pair_tables(bits, ybits, n_obj, n_one, ones, ones1, pair_chunks, f0, f1, g,
                      pair_n, pair_n1, ce2, workers):
    def fn(pc):
        K.pair_tables(bits, ybits, n_obj, n_one, ones, ones1, pc, f0, f1, g, pair_n, pair_n1, ce2)

    if workers <= 1:
        for pc in pair_chunks:
            fn(pc)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fn, pair_chunks))


def compute_max_info_gains(view: DiscretizedView, decision, params: EngineParams,
                           workers: int = 1, counting: str = "auto"):
    """Per-variable maximum statistic over all k-tuples and discretizations.

    ``counting="auto"`` uses packed bit-vectors when c = 2 and the radix
    loop otherwise; ``"radix"`` forces the radix loop.
    """
    search = _Search(view, decision, params, counting=counting).run(workers)
    val, part, disc = search.best()
    dp = view.params
    run_params = {
        "dimensions": params.dimensions,
        "divisions": dp.divisions,
        "discretizations": view.n_discretizations,
        "range": dp.range,
        "pseudocount": params.pseudocount_xi,
        "seed": dp.seed,
    }
    return MaxIGResult(
        ig=val,
        best_tuple=part if params.track_tuples else None,
        best_discretization=disc if params.track_tuples else None,
        run_params=run_params,
    )


def compute_interesting_tuples(view: DiscretizedView, decision, params: EngineParams,
                               ig_threshold: float, workers: int = 1):
    """All (variable, tuple) pairs whose statistic, maximized over
    discretizations, reaches ``ig_threshold``; sorted by (variable, tuple)."""
    if params.dimensions < 2:
        raise ValueError("interesting tuples need dimensions >= 2")
    if ig_threshold == math.inf:
        return []
    search = _Search(view, decision, params, threshold=ig_threshold).run(workers)
    var, tup, _disc, ig = search.all_records()
    if var.size == 0:
        return []
    keys = np.column_stack([var, tup])
    # lexsort: last key is primary; -ig puts the per-(variable, tuple) max first
    order = np.lexsort([-ig] + [keys[:, j] for j in range(keys.shape[1] - 1, -1, -1)])
    keys, ig = keys[order], ig[order]
    first = np.ones(len(keys), dtype=bool)
    first[1:] = np.any(keys[1:] != keys[:-1], axis=1)
    return [
        TupleRecord(int(kv[0]), tuple(int(x) for x in kv[1:]), float(v))
        for kv, v in zip(keys[first], ig[first])
    ]
