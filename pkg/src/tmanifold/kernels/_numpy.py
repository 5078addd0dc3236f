"""Pure-numpy kernels (vectorised, no compilation)."""
import numpy as np

NAME = "numpy"


def bcirc_matrix(slices):
    n3, n1, n2 = slices.shape
    shift = (np.arange(n3)[:, None] - np.arange(n3)[None, :]) % n3
    blocks = slices[shift]  # (n3, n3, n1, n2): block (r, c) = A^(r-c mod n3)
    return np.ascontiguousarray(blocks.transpose(0, 2, 1, 3).reshape(n3 * n1, n3 * n2))


def pairwise_sqdist(xs):
    diff = xs[:, :, None, :] - xs[:, None, :, :]
    return np.sum(diff.real**2 + diff.imag**2, axis=-1) if np.iscomplexobj(diff) else np.sum(diff**2, axis=-1)


def _masked(dist, candidates):
    n = dist.shape[-1]
    allowed = candidates & ~np.eye(n, dtype=bool)
    return np.where(allowed[None], dist, np.inf)


def knn_indices(dist, k, candidates):
    masked = _masked(dist, candidates)
    order = np.argsort(masked, axis=-1, kind="stable")[..., :k]
    valid = np.isfinite(np.take_along_axis(masked, order, axis=-1))
    return np.where(valid, order, -1).astype(np.int64)


def knn_mask(dist, k, candidates):
    idx = knn_indices(dist, k, candidates)
    h, n, _ = idx.shape
    mask = np.zeros((h, n, n + 1), dtype=bool)
    # column n swallows the -1 placeholders
    np.put_along_axis(mask, np.where(idx < 0, n, idx), True, axis=-1)
    return mask[..., :n]


def lme_weights(xs, k, reg_eps, cond_limit):
    h, n, p = xs.shape
    dist = pairwise_sqdist(xs)
    idx = knn_indices(dist, k, np.ones((n, n), dtype=bool))
    neigh = np.take_along_axis(xs[:, None, :, :], idx[..., None], axis=2)  # (h, n, k, p)
    c = neigh - xs[:, :, None, :]
    gram = np.conj(c) @ np.swapaxes(c, -1, -2)
    status = np.zeros((h, n), dtype=np.int8)
    cond = np.linalg.cond(gram)
    bad = ~(cond <= cond_limit)
    if np.any(bad):
        tr = np.einsum("...ii->...", gram).real
        shift = np.where(tr > 0, reg_eps * tr / k, reg_eps)
        gram = gram + np.where(bad, shift, 0.0)[..., None, None] * np.eye(k)
        status[bad] = 1
        still = bad & ~(np.linalg.cond(gram) <= 1e16)
        status[still] = 2
        gram[still] = np.eye(k)
    ones = np.ones((h, n, k, 1), dtype=gram.dtype)
    sol = np.linalg.solve(gram, ones)[..., 0]
    w = sol / np.sum(sol, axis=-1, keepdims=True)
    return idx, w, status


def nearest_index(test, train):
    d = np.sum((test[:, None, :] - train[None, :, :]) ** 2, axis=-1)
    return np.argmin(d, axis=1).astype(np.int64)


def set_threads(n):
    """The numpy kernels are single-threaded."""
    return 1
