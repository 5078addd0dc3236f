"""numba-compiled kernels.

The parallel loops run over independent (slice, row) items and every output
element is written by exactly one iteration, so results do not depend on
the number of threads or on scheduling.
"""
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe, which warns on older TBB installs
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

NAME = "numba"


@njit(cache=True)
def bcirc_matrix(slices):
    n3, n1, n2 = slices.shape
    out = np.empty((n3 * n1, n3 * n2), dtype=slices.dtype)
    for r in range(n3):
        for c in range(n3):
            src = slices[(r - c) % n3]
            for i in range(n1):
                for j in range(n2):
                    out[r * n1 + i, c * n2 + j] = src[i, j]
    return out


@njit(cache=True)
def _sqdist_row(x, i, out):
    n, p = x.shape
    for j in range(n):
        s = 0.0
        for q in range(p):
            diff = x[j, q] - x[i, q]
            s += diff.real * diff.real + diff.imag * diff.imag
        out[j] = s


@njit(cache=True, parallel=True)
def pairwise_sqdist(xs):
    h, n, _ = xs.shape
    out = np.empty((h, n, n))
    for t in prange(h * n):
        r, i = t // n, t % n
        _sqdist_row(xs[r], i, out[r, i])
    return out


@njit(cache=True)
def _knn_row(drow, i, k, allowed):
    # bounded insertion: O(n k), ties keep the lower index
    n = drow.shape[0]
    best = np.full(k, np.inf)
    sel = np.full(k, -1, dtype=np.int64)
    for j in range(n):
        dj = drow[j]
        if j == i or not allowed[j] or not dj < best[k - 1]:
            continue
        a = k - 1
        while a > 0 and best[a - 1] > dj:
            best[a] = best[a - 1]
            sel[a] = sel[a - 1]
            a -= 1
        best[a] = dj
        sel[a] = j
    return sel


@njit(cache=True, parallel=True)
def knn_indices(dist, k, candidates):
    h, n, _ = dist.shape
    out = np.empty((h, n, k), dtype=np.int64)
    for t in prange(h * n):
        r, i = t // n, t % n
        out[r, i] = _knn_row(dist[r, i], i, k, candidates[i])
    return out


@njit(cache=True, parallel=True)
def knn_mask(dist, k, candidates):
    h, n, _ = dist.shape
    out = np.zeros((h, n, n), dtype=np.bool_)
    for t in prange(h * n):
        r, i = t // n, t % n
        sel = _knn_row(dist[r, i], i, k, candidates[i])
        for a in range(k):
            if sel[a] >= 0:
                out[r, i, sel[a]] = True
    return out


@njit(cache=True)
def _lme_row(x, i, k, reg_eps, cond_limit, idx_out, w_out):
    n, p = x.shape
    drow = np.empty(n)
    _sqdist_row(x, i, drow)
    sel = _knn_row(drow, i, k, np.ones(n, dtype=np.bool_))
    idx_out[:] = sel
    c = np.empty((k, p), dtype=x.dtype)
    for a in range(k):
        for q in range(p):
            c[a, q] = x[sel[a], q] - x[i, q]
    gram = np.conj(c) @ np.ascontiguousarray(c.T)
    status = 0
    if not np.linalg.cond(gram) <= cond_limit:
        tr = 0.0
        for a in range(k):
            tr += gram[a, a].real
        shift = reg_eps * tr / k if tr > 0 else reg_eps
        for a in range(k):
            gram[a, a] += shift
        status = 1
        if not np.linalg.cond(gram) <= 1e16:
            status = 2
            gram = np.eye(k).astype(x.dtype)
    sol = np.linalg.solve(gram, np.ones(k, dtype=x.dtype))
    w_out[:] = sol / np.sum(sol)
    return status


@njit(cache=True, parallel=True)
def lme_weights(xs, k, reg_eps, cond_limit):
    h, n, p = xs.shape
    idx = np.empty((h, n, k), dtype=np.int64)
    w = np.empty((h, n, k), dtype=xs.dtype)
    status = np.zeros((h, n), dtype=np.int8)
    for t in prange(h * n):
        r, i = t // n, t % n
        status[r, i] = _lme_row(xs[r], i, k, reg_eps, cond_limit, idx[r, i], w[r, i])
    return idx, w, status


@njit(cache=True, parallel=True)
def nearest_index(test, train):
    m, q = test.shape
    n = train.shape[0]
    out = np.empty(m, dtype=np.int64)
    for a in prange(m):
        best = np.inf
        arg = 0
        for b in range(n):
            s = 0.0
            for j in range(q):
                diff = test[a, j] - train[b, j]
                s += diff * diff
            if s < best:
                best = s
                arg = b
        out[a] = arg
    return out


def set_threads(n):
    """Use up to ``n`` threads in the parallel loops; returns the count in effect."""
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
