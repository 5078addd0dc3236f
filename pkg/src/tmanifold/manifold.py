"""Tensor manifold learning: discriminant embedding (MLDE), Laplacian
eigenmaps (MLE) and locally linear embedding (LME) under the t-product.

Orientation: MLDE takes samples as lateral slices (p x n x n3) and learns a
projection ``V`` (p x d x n3) with ``Y = V^T * X``. MLE and LME take samples
as horizontal slices (n x p x n3) and return coordinates ``Y`` (n x d x n3)
for the training samples only.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BadK, IllPosed, ShapeMismatch, SingularDegree, SingularGram
from .graph import GraphSpec, build_discriminant_graphs, build_graphs
from .spectral import FDiagonal, generalized_eig
from .tensor import (
    as_tensor,
    from_half_spectrum,
    half_spectrum,
    identity_tensor,
    t_product,
    t_product_many,
    t_transpose,
)
from .trace_ratio import SolverTrace, TraceRatioProblem, newton_qr

GRAM_COND_LIMIT = 1e12


@dataclass(frozen=True)
class MldeModel:
    v: np.ndarray
    rho_star: float
    solver_trace: SolverTrace
    problem: TraceRatioProblem = None


@dataclass(frozen=True)
class Embedding:
    y: np.ndarray
    eigentubes: FDiagonal
    method: str
    residual: float = 0.0


@dataclass(frozen=True)
class LmeWeights:
    """Reconstruction weights.

    ``indices[r, i]`` lists the ``k`` neighbours of sample ``i`` on slice
    ``r`` and ``weights[r, i]`` their weights (summing to one). ``w`` is the
    assembled n1 x n1 x n3 affinity tensor.
    """

    indices: np.ndarray
    weights: np.ndarray
    w: np.ndarray
    domain: str
    regularized: int


def mlde_fit(x, labels, d, k1, k2, weight_rule="heat", t=None, eps=1e-10, max_iter=100, seed=0):
    """Fit the discriminant projection.

    Parameters
    ----------
    x : ndarray, shape (p, n, n3)
        Training samples as lateral slices.
    labels : array-like of int, length n
    d : int
        Target dimension, ``d < p``.
    k1, k2 : int
        Neighbour counts of the within-class and between-class graphs.
    weight_rule : {"heat", "binary"}
    t : float, optional
        Heat-kernel width; median squared distance per slice when omitted.
    eps, max_iter :
        Newton-QR stopping rule.
    seed : int
        Seeds the starting tensor ``V0``.
    """
    x = as_tensor(x, "x")
    p = x.shape[0]
    if not 1 <= d < p:
        raise ShapeMismatch(f"need 1 <= d < p, got d={d}, p={p}")
    samples = np.ascontiguousarray(np.transpose(x, (1, 0, 2)))
    g = build_discriminant_graphs(samples, labels, k1, k2, weight_rule, t)
    if not np.any(g.w_between):
        raise IllPosed("between-class graph is empty (need at least two classes)")
    xt = t_transpose(x)
    within = t_product_many(x, g.lap, xt)
    between = t_product_many(x, g.lap_between, xt)
    problem = TraceRatioProblem(between, within, d)
    try:
        v, rho, trace = newton_qr(problem, eps=eps, max_iter=max_iter, seed=seed)
    except IllPosed as exc:
        raise IllPosed(f"{exc}; the within-class scatter is rank deficient, try a larger k1") from None
    return MldeModel(v=v, rho_star=rho, solver_trace=trace, problem=problem)


def mlde_project(model, x):
    x = as_tensor(x, "x")
    if x.shape[0] != model.v.shape[0] or x.shape[2] != model.v.shape[2]:
        raise ShapeMismatch(f"cannot project {x.shape} with a {model.v.shape} basis")
    return t_product(t_transpose(model.v), x)


def mle_fit(x, d, k, weight_rule="heat", t=None):
    """Laplacian eigenmaps on the transform-domain kNN graphs.

    Returns coordinates with ``Y^T * D * Y = I_d``; the eigentubes are scaled
    by ``n3`` to match ``L * Y = (1/n3) D * Y * Lambda``.
    """
    x = as_tensor(x, "x")
    n1, _, n3 = x.shape
    if not 1 <= d < n1:
        raise ShapeMismatch(f"need 1 <= d < n1, got d={d}, n1={n1}")
    g = build_graphs(x, spec=GraphSpec(k=k, weight_rule=weight_rule, t=t))
    if g.deg.tubes.real.min() <= 0:
        raise SingularDegree("some vertex has zero degree in a transform slice")
    pairs = generalized_eig(g.lap, g.deg.to_tensor(), d, "smallest_nonzero")
    return Embedding(y=pairs.eigenslices, eigentubes=pairs.eigentubes.scaled(n3), method="mle",
                     residual=pairs.residual)


def lme_weights(x, k, reg_eps=1e-3, domain="spatial"):
    """Affine reconstruction weights of every sample from its ``k`` nearest
    neighbours, slice by slice.

    With ``domain="spatial"`` (the default) neighbours and weights come from
    the frontal slices ``X^(r)`` and are stored as the frontal slices of
    ``W``. With ``domain="transform"`` they come from the half-spectrum
    slices and are placed in ``W_hat``, mirrored by conjugation.

    A Gram matrix whose condition number exceeds 1e12 is replaced by
    ``G + reg_eps * trace(G) / k * I``.
    """
    x = as_tensor(x, "x")
    n1, _, n3 = x.shape
    if not 1 <= k < n1:
        raise BadK(f"k must satisfy 1 <= k < n1={n1}, got {k}")
    if domain == "spatial":
        xs = np.ascontiguousarray(np.moveaxis(x, 2, 0))
    elif domain == "transform":
        xs = half_spectrum(x)
    else:
        raise ValueError(f"domain must be 'spatial' or 'transform', got {domain!r}")
    idx, w, status = kernels.lme_weights(xs, k, float(reg_eps), GRAM_COND_LIMIT)
    if np.any(status == kernels.LME_SINGULAR):
        r, i = np.argwhere(status == kernels.LME_SINGULAR)[0]
        raise SingularGram(f"Gram matrix of sample {i} on slice {r} is singular (reg_eps={reg_eps})")

    slices = np.zeros((xs.shape[0], n1, n1), dtype=w.dtype)
    rows = np.broadcast_to(np.arange(n1)[None, :, None], idx.shape)
    sl = np.broadcast_to(np.arange(xs.shape[0])[:, None, None], idx.shape)
    slices[sl, rows, idx] = w
    if domain == "spatial":
        wt = np.ascontiguousarray(np.moveaxis(slices, 0, 2))
    else:
        wt = from_half_spectrum(slices, n3)
    return LmeWeights(indices=idx, weights=w, w=wt, domain=domain,
                      regularized=int(np.count_nonzero(status == kernels.LME_REGULARIZED)))


def lme_fit(x, d, k, reg_eps=1e-3, domain="spatial"):
    """Locally linear embedding with ``(1/n1) Y^T * Y = I_d``.

    ``M = (I - W)^T * (I - W)``; the coordinates are the eigenslices of the
    ``d`` smallest non-zero eigentubes, scaled by ``sqrt(n1)``. The
    eigentubes are scaled by ``n1 * n3`` to match
    ``M * Y = (1/(n1 n3)) Y * Lambda``.
    """
    x = as_tensor(x, "x")
    n1, _, n3 = x.shape
    if not 1 <= d < n1:
        raise ShapeMismatch(f"need 1 <= d < n1, got d={d}, n1={n1}")
    lw = lme_weights(x, k, reg_eps, domain)
    resid = identity_tensor(n1, n3) - lw.w
    m = t_product(t_transpose(resid), resid)
    pairs = generalized_eig(m, identity_tensor(n1, n3), d, "smallest_nonzero")
    return Embedding(y=np.sqrt(n1) * pairs.eigenslices, eigentubes=pairs.eigentubes.scaled(n1 * n3),
                     method="lme", residual=pairs.residual)


def lme_matrix(x, k, reg_eps=1e-3, domain="spatial"):
    """The tensor ``M = (I - W)^T * (I - W)`` used by :func:`lme_fit`."""
    x = as_tensor(x, "x")
    lw = lme_weights(x, k, reg_eps, domain)
    resid = identity_tensor(x.shape[0], x.shape[2]) - lw.w
    return t_product(t_transpose(resid), resid)
