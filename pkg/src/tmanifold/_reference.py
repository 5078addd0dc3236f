"""Plain matrix versions of the three methods.

These never touch the tensor code: graphs come from ``scipy.spatial``
distances and the eigenproblems go straight to ``scipy.linalg.eigh``. At
``n3 = 1`` the tensor methods must agree with them up to the embedding
subspace, which makes them useful as test oracles and for ``selftest``.

Samples are rows of ``x`` (n x p) except in :func:`lde`, which takes the
columns of a p x n matrix like its tensor counterpart.
"""
import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist


def knn_graph(x, k, labels=None, mode="unsupervised", weight_rule="heat", t=None):
    """Symmetric (OR) kNN affinity matrix over the rows of ``x``."""
    n = x.shape[0]
    dist = cdist(x, x, "sqeuclidean")
    if mode == "unsupervised":
        allowed = np.ones((n, n), dtype=bool)
    else:
        same = labels[:, None] == labels[None, :]
        allowed = same if mode == "within_class" else ~same
    np.fill_diagonal(allowed, False)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        cand = np.flatnonzero(allowed[i])
        order = cand[np.argsort(dist[i, cand], kind="stable")][:k]
        adj[i, order] = True
    adj |= adj.T
    if weight_rule == "binary":
        return adj.astype(float)
    if t is None:
        off = dist[~np.eye(n, dtype=bool)]
        t = float(np.median(off)) if off.size else 1.0
        t = t if t > 0 else 1.0
    return np.where(adj, np.exp(-dist / t), 0.0)


def laplacian(w):
    return np.diag(w.sum(axis=1)) - w


def trace_ratio(a, b, d, v0, eps=1e-10, max_iter=100):
    """Newton iteration for ``max tr(V'AV) / tr(V'BV)`` with ``V'V = I``."""
    v = np.linalg.qr(v0)[0]
    rho = np.trace(v.T @ a @ v) / np.trace(v.T @ b @ v)
    for _ in range(max_iter):
        _, vecs = scipy.linalg.eigh(a - rho * b)
        v = vecs[:, ::-1][:, :d]
        new = np.trace(v.T @ a @ v) / np.trace(v.T @ b @ v)
        if abs(new - rho) <= eps:
            return v, new
        rho = new
    return v, rho


def lde(x, labels, d, k1, k2, weight_rule="heat", t=None, seed=0):
    """Local discriminant embedding of the columns of ``x`` (p x n)."""
    labels = np.asarray(labels)
    w = knn_graph(x.T, k1, labels, "within_class", weight_rule, t)
    wb = knn_graph(x.T, k2, labels, "between_class", weight_rule, t)
    within = x @ laplacian(w) @ x.T
    between = x @ laplacian(wb) @ x.T
    v0 = np.random.default_rng(seed).standard_normal((x.shape[0], d))
    return trace_ratio(between, within, d, v0)


def _smallest_nonzero(vals, vecs, d):
    tol = 1e-8 * len(vals) * np.abs(vals).max()
    keep = np.flatnonzero(np.abs(vals) > tol)[:d]
    return vals[keep], vecs[:, keep]


def laplacian_eigenmaps(x, d, k, weight_rule="heat", t=None):
    w = knn_graph(x, k, weight_rule=weight_rule, t=t)
    deg = np.diag(w.sum(axis=1))
    vals, vecs = scipy.linalg.eigh(deg - w, deg)
    return _smallest_nonzero(vals, vecs, d)


def lle_weights(x, k, reg_eps=1e-3, cond_limit=1e12):
    n = x.shape[0]
    dist = cdist(x, x, "sqeuclidean")
    w = np.zeros((n, n))
    for i in range(n):
        others = np.delete(np.arange(n), i)
        nbrs = others[np.argsort(dist[i, others], kind="stable")][:k]
        diff = x[nbrs] - x[i]
        g = diff @ diff.T
        if np.linalg.cond(g) > cond_limit:
            tr = np.trace(g)
            g = g + (reg_eps * tr / k if tr > 0 else reg_eps) * np.eye(k)
        e = np.linalg.solve(g, np.ones(k))
        w[i, nbrs] = e / e.sum()
    return w


def lle(x, d, k, reg_eps=1e-3):
    n = x.shape[0]
    resid = np.eye(n) - lle_weights(x, k, reg_eps)
    vals, vecs = scipy.linalg.eigh(resid.T @ resid)
    vals, vecs = _smallest_nonzero(vals, vecs, d)
    return vals, np.sqrt(n) * vecs


def projector_distance(u, v):
    """``||P_u - P_v||_F`` for the orthogonal projectors onto the column spaces."""
    qu = np.linalg.qr(u)[0]
    qv = np.linalg.qr(v)[0]
    return float(np.linalg.norm(qu @ qu.T - qv @ qv.T))
