"""Neighbourhood graphs built on the transform-domain slices of a data tensor.

Samples are the horizontal (mode-1) slices of ``x`` (n1 x n2 x n3). For each
half-spectrum slice r the rows of ``X_hat^(r)`` are compared by complex
Euclidean distance; the mirrored slices get the same (real) weights, so
the spatial affinity tensor is real and f-symmetric.
"""
from dataclasses import dataclass
import warnings

import numpy as np

from . import kernels
from .errors import BadK, ConfigError, EmptyNeighborhood, LabelMismatch, NotFSymmetric
from .spectral import FDiagonal
from .tensor import (
    as_tensor,
    from_half_spectrum,
    full_from_half,
    half_spectrum,
    is_f_symmetric,
)

_MODES = ("unsupervised", "within_class", "between_class")


@dataclass(frozen=True)
class GraphSpec:
    """How to connect samples and weight the edges.

    ``t=None`` with the heat kernel picks, per slice, the median squared
    distance over all sample pairs.
    """

    neighbor_rule: str = "knn"
    k: int = 5
    epsilon: float = None
    weight_rule: str = "heat"
    t: float = None
    mode: str = "unsupervised"

    def __post_init__(self):
        if self.neighbor_rule not in ("knn", "epsilon"):
            raise ConfigError(f"neighbor_rule must be 'knn' or 'epsilon', got {self.neighbor_rule!r}")
        if self.weight_rule not in ("heat", "binary"):
            raise ConfigError(f"weight_rule must be 'heat' or 'binary', got {self.weight_rule!r}")
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.neighbor_rule == "knn" and (self.k is None or self.k < 1):
            raise BadK(f"k must be >= 1, got {self.k}")
        if self.neighbor_rule == "epsilon" and not (self.epsilon is not None and self.epsilon > 0):
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.t is not None and not self.t > 0:
            raise ConfigError(f"t must be > 0, got {self.t}")


@dataclass(frozen=True)
class AffinityGraphs:
    """Affinity, degree and Laplacian tensors; primed fields hold the
    between-class graph when built by :func:`build_discriminant_graphs`."""

    w: np.ndarray
    deg: FDiagonal
    lap: np.ndarray
    w_between: np.ndarray = None
    deg_between: FDiagonal = None
    lap_between: np.ndarray = None
    isolated: tuple = ()
    edges: int = 0
    edges_between: int = 0


def _candidates(labels, mode, n):
    if mode == "unsupervised":
        return np.ones((n, n), dtype=bool)
    same = labels[:, None] == labels[None, :]
    return same if mode == "within_class" else ~same


def _heat_scale(dist):
    n = dist.shape[-1]
    off = dist[:, ~np.eye(n, dtype=bool)]
    t = np.median(off, axis=1) if off.shape[1] else np.ones(dist.shape[0])
    return np.where(t > 0, t, 1.0)


def adjacency(dist, spec, candidates):
    """Symmetric boolean adjacency per half-spectrum slice."""
    n = dist.shape[-1]
    if spec.neighbor_rule == "knn":
        directed = kernels.knn_mask(dist, spec.k, candidates)
        adj = directed | np.swapaxes(directed, -1, -2)
    else:
        adj = dist <= spec.epsilon
    return adj & candidates[None] & ~np.eye(n, dtype=bool)[None]


def _weights(dist, adj, spec):
    if spec.weight_rule == "binary":
        return adj.astype(np.float64)
    t = np.full(dist.shape[0], spec.t) if spec.t is not None else _heat_scale(dist)
    return np.where(adj, np.exp(-dist / t[:, None, None]), 0.0)


def _assemble(w_half, n3):
    deg_half = w_half.sum(axis=2)
    lap_half = -w_half.copy()
    idx = np.arange(w_half.shape[-1])
    lap_half[:, idx, idx] += deg_half
    deg = FDiagonal(np.ascontiguousarray(full_from_half(deg_half.astype(complex), n3).T))
    return from_half_spectrum(w_half, n3), deg, from_half_spectrum(lap_half, n3)


def _check_inputs(x, labels, spec):
    x = as_tensor(x, "x")
    n1 = x.shape[0]
    if spec.mode != "unsupervised":
        if labels is None:
            raise ConfigError(f"mode {spec.mode!r} needs labels")
        labels = np.asarray(labels)
        if labels.shape != (n1,):
            raise LabelMismatch(f"{labels.size} labels for {n1} samples")
    if spec.neighbor_rule == "knn" and spec.k >= n1:
        raise BadK(f"k={spec.k} must be smaller than the number of samples {n1}")
    return x, labels


def _slice_weights(xhat, labels, spec):
    dist = kernels.pairwise_sqdist(xhat)
    n = xhat.shape[1]
    adj = adjacency(dist, spec, _candidates(labels, spec.mode, n))
    w_half = _weights(dist, adj, spec)
    lonely = [(int(r), int(i)) for r, i in zip(*np.nonzero(~adj.any(axis=2)))]
    return w_half, lonely, int(adj[0].sum() // 2)


def _report_isolated(lonely, spec):
    if lonely:
        warnings.warn(
            f"{len(lonely)} (slice, vertex) pairs have no neighbours under the "
            f"{spec.mode} {spec.neighbor_rule} rule",
            EmptyNeighborhood,
            stacklevel=3,
        )


def build_graphs(x, labels=None, spec=GraphSpec()):
    """Affinity, degree and Laplacian tensors for one graph type."""
    x, labels = _check_inputs(x, labels, spec)
    w_half, lonely, edges = _slice_weights(half_spectrum(x), labels, spec)
    _report_isolated(lonely, spec)
    w, deg, lap = _assemble(w_half, x.shape[2])
    return AffinityGraphs(w=w, deg=deg, lap=lap, isolated=tuple(lonely), edges=edges)


def build_discriminant_graphs(x, labels, k1, k2, weight_rule="heat", t=None):
    """Within-class graph (``k1`` neighbours) and between-class graph (``k2``)."""
    within = GraphSpec(k=k1, weight_rule=weight_rule, t=t, mode="within_class")
    between = GraphSpec(k=k2, weight_rule=weight_rule, t=t, mode="between_class")
    x, labels = _check_inputs(x, labels, within)
    _check_inputs(x, labels, between)
    xhat = half_spectrum(x)
    n3 = x.shape[2]
    wh, lonely, edges = _slice_weights(xhat, labels, within)
    bh, _, edges_b = _slice_weights(xhat, labels, between)
    _report_isolated(lonely, within)
    w, deg, lap = _assemble(wh, n3)
    wb, degb, lapb = _assemble(bh, n3)
    return AffinityGraphs(
        w=w,
        deg=deg,
        lap=lap,
        w_between=wb,
        deg_between=degb,
        lap_between=lapb,
        isolated=tuple(lonely),
        edges=edges,
        edges_between=edges_b,
    )


def degree_and_laplacian(w):
    """Degree tube table (per-slice row sums of ``W_hat``) and ``L = D - W``."""
    w = as_tensor(w, "w")
    if w.shape[0] != w.shape[1] or not is_f_symmetric(w, 1e-8):
        raise NotFSymmetric("affinity tensor must be square and f-symmetric")
    half = half_spectrum(w)
    deg_half = half.sum(axis=2)
    lap_half = -half
    idx = np.arange(w.shape[0])
    lap_half[:, idx, idx] += deg_half
    n3 = w.shape[2]
    deg = FDiagonal(np.ascontiguousarray(full_from_half(deg_half, n3).T))
    return deg, from_half_spectrum(lap_half, n3)
