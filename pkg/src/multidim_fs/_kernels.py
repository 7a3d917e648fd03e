"""Numba kernels for exhaustive tuple search.

All kernels walk the k-tuples whose smallest member is in ``firsts`` in
lexicographic order, compute the two-class voxel counts of each tuple, and
update per-variable running maxima under a total order:
larger IG, then lexicographically smaller partner tuple, then smaller
discretization index. Because the order is total, merging per-chunk maxima
gives the same answer for any chunking or thread schedule.

Conditional entropies are summed voxel by voxel (voxel index
``sum_j level_j * c**j``) from lookup tables, so every counting path that
produces the same integer counts produces bit-identical statistics.
"""

import numpy as np
from llvmlite import ir
from numba import njit, types
from numba.extending import intrinsic

ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


@intrinsic
def popcount(typingctx, x):
    sig = types.uint64(types.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])

    return sig, codegen


@njit(cache=True, nogil=True)
def ce_from_counts(cnt0, cnt1, nvox, f0, f1, g):
    s = 0.0
    for v in range(nvox):
        s += g[cnt0[v] + cnt1[v]] - f0[cnt0[v]] - f1[cnt1[v]]
    return s


@njit(cache=True, nogil=True)
def marginalize(cnt0, cnt1, nvox, c, axis, out0, out1):
    ci = 1
    for _ in range(axis):
        ci *= c
    nout = nvox // c
    for m in range(nout):
        out0[m] = 0
        out1[m] = 0
    for idx in range(nvox):
        m = idx % ci + (idx // (ci * c)) * ci
        out0[m] += cnt0[idx]
        out1[m] += cnt1[idx]


@njit(cache=True, nogil=True)
def mobius(sub, k):
    """Turn superset popcounts into exact-pattern counts, in place."""
    n = 1 << k
    for i in range(k):
        bit = 1 << i
        for mask in range(n):
            if not mask & bit:
                sub[mask] -= sub[mask | bit]


@njit(cache=True, nogil=True)
def update_best(v, val, tup, skip, t, best_val, best_part, best_disc):
    bv = best_val[v]
    if val < bv:
        return
    if val == bv:
        cmp = 0
        j = 0
        for i in range(tup.shape[0]):
            if i == skip:
                continue
            p = tup[i]
            q = best_part[v, j]
            j += 1
            if p < q:
                cmp = -1
                break
            if p > q:
                cmp = 1
                break
        if cmp > 0:
            return
        if cmp == 0 and t >= best_disc[v]:
            return
    best_val[v] = val
    j = 0
    for i in range(tup.shape[0]):
        if i != skip:
            best_part[v, j] = tup[i]
            j += 1
    best_disc[v] = t


@njit(cache=True, nogil=True)
def record(v, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec):
    i = nrec[0]
    if i < rec_var.shape[0]:
        rec_var[i] = v
        for j in range(tup.shape[0]):
            rec_tup[i, j] = tup[j]
        rec_disc[i] = t
        rec_ig[i] = val
    nrec[0] = i + 1


@njit(cache=True, nogil=True)
def process_tuple(tup, k, c, cnt0, cnt1, nvox, m0, m1, f0, f1, g, t, thr,
                  best_val, best_part, best_disc,
                  rec_var, rec_tup, rec_disc, rec_ig, nrec):
    ce_full = ce_from_counts(cnt0, cnt1, nvox, f0, f1, g)
    nmarg = nvox // c
    for i in range(k):
        marginalize(cnt0, cnt1, nvox, c, i, m0, m1)
        ce_m = ce_from_counts(m0, m1, nmarg, f0, f1, g)
        val = 2.0 * (ce_m - ce_full)
        v = tup[i]
        update_best(v, val, tup, i, t, best_val, best_part, best_disc)
        if val >= thr:
            record(v, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec)


@njit(cache=True, nogil=True)
def first_combination(a, k, m, tup):
    tup[0] = a
    for j in range(1, k):
        tup[j] = a + j
    return tup[k - 1] < m


@njit(cache=True, nogil=True)
def next_combination(k, m, tup):
    j = k - 1
    while j >= 1 and tup[j] == m - k + j:
        j -= 1
    if j < 1:
        return False
    tup[j] += 1
    for l in range(j + 1, k):
        tup[l] = tup[l - 1] + 1
    return True


@njit(cache=True, nogil=True)
def count_radix(levels, y, tup, k, c, cnt0, cnt1, nvox):
    for v in range(nvox):
        cnt0[v] = 0
        cnt1[v] = 0
    n_obj = levels.shape[1]
    for n in range(n_obj):
        idx = 0
        mult = 1
        for j in range(k):
            idx += levels[tup[j], n] * mult
            mult *= c
        if y[n]:
            cnt1[idx] += 1
        else:
            cnt0[idx] += 1


@njit(cache=True, nogil=True)
def count_chain(bits, ybits, valid, tup, k, cnt0, cnt1):
    """Voxel counts for c=2 by AND / AND-NOT chains and popcount."""
    nvox = 1 << k
    n_words = bits.shape[1]
    for mask in range(nvox):
        tot = 0
        one = 0
        for w in range(n_words):
            acc = valid[w]
            for j in range(k):
                if (mask >> j) & 1:
                    acc &= bits[tup[j], w]
                else:
                    acc &= ~bits[tup[j], w]
            tot += popcount(acc)
            one += popcount(acc & ybits[w])
        cnt1[mask] = one
        cnt0[mask] = tot - one


def _scratch(k, c, m):
    nvox = c**k
    return (
        np.zeros(nvox, np.int64),
        np.zeros(nvox, np.int64),
        np.zeros(max(nvox // c, 1), np.int64),
        np.zeros(max(nvox // c, 1), np.int64),
        np.empty(k, np.int64),
    )


@njit(cache=True, nogil=True)
def kernel_radix(levels, y, c, k, firsts, f0, f1, g, t, thr,
                 best_val, best_part, best_disc,
                 rec_var, rec_tup, rec_disc, rec_ig, nrec,
                 cnt0, cnt1, m0, m1, tup):
    m = levels.shape[0]
    nvox = 1
    for _ in range(k):
        nvox *= c
    for a in firsts:
        if not first_combination(a, k, m, tup):
            continue
        while True:
            count_radix(levels, y, tup, k, c, cnt0, cnt1, nvox)
            process_tuple(tup, k, c, cnt0, cnt1, nvox, m0, m1, f0, f1, g, t, thr,
                          best_val, best_part, best_disc,
                          rec_var, rec_tup, rec_disc, rec_ig, nrec)
            if not next_combination(k, m, tup):
                break


@njit(cache=True, nogil=True)
def kernel_chain(bits, ybits, valid, k, firsts, f0, f1, g, t, thr,
                 best_val, best_part, best_disc,
                 rec_var, rec_tup, rec_disc, rec_ig, nrec,
                 cnt0, cnt1, m0, m1, tup):
    m = bits.shape[0]
    nvox = 1 << k
    for a in firsts:
        if not first_combination(a, k, m, tup):
            continue
        while True:
            count_chain(bits, ybits, valid, tup, k, cnt0, cnt1)
            process_tuple(tup, k, 2, cnt0, cnt1, nvox, m0, m1, f0, f1, g, t, thr,
                          best_val, best_part, best_disc,
                          rec_var, rec_tup, rec_disc, rec_ig, nrec)
            if not next_combination(k, m, tup):
                break


@njit(cache=True, nogil=True)
def single_tables(bits, ybits, n_obj, n_one, f0, f1, g, ones, ones1, ce1):
    """Per-variable popcounts and one-dimensional conditional entropies."""
    m, n_words = bits.shape
    cnt0 = np.zeros(2, np.int64)
    cnt1 = np.zeros(2, np.int64)
    for v in range(m):
        tot = 0
        one = 0
        for w in range(n_words):
            tot += popcount(bits[v, w])
            one += popcount(bits[v, w] & ybits[w])
        ones[v] = tot
        ones1[v] = one
        cnt1[0] = n_one - one
        cnt0[0] = (n_obj - tot) - (n_one - one)
        cnt1[1] = one
        cnt0[1] = tot - one
        ce1[v] = ce_from_counts(cnt0, cnt1, 2, f0, f1, g)


@njit(cache=True, nogil=True)
def kernel_pairs(bits, ybits, n_obj, n_one, ones, ones1, ce1, firsts, f0, f1, g, t, thr,
                 best_val, best_part, best_disc,
                 rec_var, rec_tup, rec_disc, rec_ig, nrec):
    m, n_words = bits.shape
    sub = np.zeros(4, np.int64)
    sub1 = np.zeros(4, np.int64)
    cnt0 = np.zeros(4, np.int64)
    tup = np.empty(2, np.int64)
    for a in firsts:
        for b in range(a + 1, m):
            nab = 0
            nab1 = 0
            for w in range(n_words):
                x = bits[a, w] & bits[b, w]
                nab += popcount(x)
                nab1 += popcount(x & ybits[w])
            sub[0] = n_obj
            sub[1] = ones[a]
            sub[2] = ones[b]
            sub[3] = nab
            sub1[0] = n_one
            sub1[1] = ones1[a]
            sub1[2] = ones1[b]
            sub1[3] = nab1
            mobius(sub, 2)
            mobius(sub1, 2)
            for v in range(4):
                cnt0[v] = sub[v] - sub1[v]
            ce = ce_from_counts(cnt0, sub1, 4, f0, f1, g)
            tup[0] = a
            tup[1] = b
            val = 2.0 * (ce1[b] - ce)
            update_best(a, val, tup, 0, t, best_val, best_part, best_disc)
            if val >= thr:
                record(a, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec)
            val = 2.0 * (ce1[a] - ce)
            update_best(b, val, tup, 1, t, best_val, best_part, best_disc)
            if val >= thr:
                record(b, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec)


@njit(cache=True, nogil=True)
def pair_tables(bits, ybits, n_obj, n_one, ones, ones1, firsts, f0, f1, g, pair_n, pair_n1, ce2):
    m, n_words = bits.shape
    sub = np.zeros(4, np.int64)
    sub1 = np.zeros(4, np.int64)
    cnt0 = np.zeros(4, np.int64)
    for a in firsts:
        for b in range(a + 1, m):
            nab = 0
            nab1 = 0
            for w in range(n_words):
                x = bits[a, w] & bits[b, w]
                nab += popcount(x)
                nab1 += popcount(x & ybits[w])
            pair_n[a, b] = nab
            pair_n1[a, b] = nab1
            sub[0] = n_obj
            sub[1] = ones[a]
            sub[2] = ones[b]
            sub[3] = nab
            sub1[0] = n_one
            sub1[1] = ones1[a]
            sub1[2] = ones1[b]
            sub1[3] = nab1
            mobius(sub, 2)
            mobius(sub1, 2)
            for v in range(4):
                cnt0[v] = sub[v] - sub1[v]
            ce2[a, b] = ce_from_counts(cnt0, sub1, 4, f0, f1, g)


@njit(cache=True, nogil=True)
def kernel_triples(bits, ybits, n_obj, n_one, ones, ones1, pair_n, pair_n1, ce2,
                   firsts, f0, f1, g, t, thr,
                   best_val, best_part, best_disc,
                   rec_var, rec_tup, rec_disc, rec_ig, nrec):
    m, n_words = bits.shape
    sub = np.zeros(8, np.int64)
    sub1 = np.zeros(8, np.int64)
    cnt0 = np.zeros(8, np.int64)
    ab = np.empty(n_words, np.uint64)
    tup = np.empty(3, np.int64)
    for a in firsts:
        for b in range(a + 1, m - 1):
            for w in range(n_words):
                ab[w] = bits[a, w] & bits[b, w]
            for c in range(b + 1, m):
                nabc = 0
                nabc1 = 0
                for w in range(n_words):
                    x = ab[w] & bits[c, w]
                    nabc += popcount(x)
                    nabc1 += popcount(x & ybits[w])
                sub[0] = n_obj
                sub[1] = ones[a]
                sub[2] = ones[b]
                sub[3] = pair_n[a, b]
                sub[4] = ones[c]
                sub[5] = pair_n[a, c]
                sub[6] = pair_n[b, c]
                sub[7] = nabc
                sub1[0] = n_one
                sub1[1] = ones1[a]
                sub1[2] = ones1[b]
                sub1[3] = pair_n1[a, b]
                sub1[4] = ones1[c]
                sub1[5] = pair_n1[a, c]
                sub1[6] = pair_n1[b, c]
                sub1[7] = nabc1
                mobius(sub, 3)
                mobius(sub1, 3)
                for v in range(8):
                    cnt0[v] = sub[v] - sub1[v]
                ce = ce_from_counts(cnt0, sub1, 8, f0, f1, g)
                tup[0] = a
                tup[1] = b
                tup[2] = c
                val = 2.0 * (ce2[b, c] - ce)
                update_best(a, val, tup, 0, t, best_val, best_part, best_disc)
                if val >= thr:
                    record(a, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec)
                val = 2.0 * (ce2[a, c] - ce)
                update_best(b, val, tup, 1, t, best_val, best_part, best_disc)
                if val >= thr:
                    record(b, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec)
                val = 2.0 * (ce2[a, b] - ce)
                update_best(c, val, tup, 2, t, best_val, best_part, best_disc)
                if val >= thr:
                    record(c, val, tup, t, rec_var, rec_tup, rec_disc, rec_ig, nrec)


@njit(cache=True, nogil=True)
def merge_best(src_val, src_part, src_disc, best_val, best_part, best_disc):
    m, km1 = src_part.shape
    tup = np.empty(km1 + 1, np.int64)
    for v in range(m):
        if src_val[v] == -np.inf:
            continue
        # rebuild a tuple whose member at position 0 is skipped
        tup[0] = -1
        for j in range(km1):
            tup[j + 1] = src_part[v, j]
        update_best(v, src_val[v], tup, 0, src_disc[v], best_val, best_part, best_disc)
