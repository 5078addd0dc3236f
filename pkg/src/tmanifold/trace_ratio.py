"""Tensor trace-ratio problem and its Newton-QR solver.

Maximise ``Trace(V^T * A * V) / Trace(V^T * B * V)`` over f-orthonormal
``V`` (n x d x n3). The solver does Newton's method on

    f(rho) = max_V Trace(V^T * (A - rho B) * V),

whose derivative at generic ``rho`` is ``-Trace(V(rho)^T * B * V(rho))``,
so each Newton step reduces to ``rho <- objective(V(rho))``.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from .errors import (
    DegenerateDenominator,
    IllPosed,
    NotConverged,
    NotFOrthogonal,
    NotFSymmetric,
    ShapeMismatch,
)
from .spectral import (
    FDiagonal,
    f_orthonormalize,
    hermitian_half,
    is_positive_semidefinite,
    top_eigenslices,
    tubal_rank,
)
from .tensor import (
    as_tensor,
    frobenius_norm,
    from_half_spectrum,
    full_from_half,
    identity_tensor,
    is_f_symmetric,
    t_product_many,
    t_transpose,
    trace,
)

logger = logging.getLogger(__name__)

ORTHO_TOL = 1e-6
NULL_ANGLE_TOL = 1e-6
DEGENERATE_GAP_RTOL = 1e-12


@dataclass(frozen=True)
class TraceRatioProblem:
    a: np.ndarray
    b: np.ndarray
    d: int

    def __post_init__(self):
        a = as_tensor(self.a, "a")
        b = as_tensor(self.b, "b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.shape != b.shape or a.shape[0] != a.shape[1]:
            raise ShapeMismatch(f"a {a.shape} and b {b.shape} must be equal square tensors")
        if not 1 <= self.d < a.shape[0]:
            raise ShapeMismatch(f"need 1 <= d < n, got d={self.d}, n={a.shape[0]}")
        if not is_f_symmetric(a, 1e-8) or not is_f_symmetric(b, 1e-8):
            raise NotFSymmetric("a and b must both be f-symmetric")

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def n3(self):
        return self.a.shape[2]


@dataclass
class SolverTrace:
    rho_history: list = field(default_factory=list)
    f_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    degenerate: bool = False

    def as_dict(self):
        return {
            "rho_history": [float(r) for r in self.rho_history],
            "f_history": [float(f) for f in self.f_history],
            "iterations": self.iterations,
            "converged": self.converged,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class WellPosedness:
    tubal_rank_b: int
    required_rank: int
    b_psd: bool
    common_null: bool

    @property
    def rank_ok(self):
        return self.tubal_rank_b >= self.required_rank

    @property
    def well_posed(self):
        return self.rank_ok and self.b_psd and not self.common_null


def _quad_trace(v, m):
    return trace(t_product_many(t_transpose(v), m, v))


def objective(p, v):
    """Trace ratio at an f-orthonormal ``v``."""
    v = as_tensor(v, "v")
    if v.shape != (p.n, p.d, p.n3):
        raise ShapeMismatch(f"v must be {(p.n, p.d, p.n3)}, got {v.shape}")
    gram = t_product_many(t_transpose(v), v) - identity_tensor(p.d, p.n3)
    if frobenius_norm(gram) > ORTHO_TOL:
        raise NotFOrthogonal(f"||V^T*V - I|| = {frobenius_norm(gram):.3e} > {ORTHO_TOL}")
    den = _quad_trace(v, p.b)
    if den <= 1e-12 * frobenius_norm(p.b):
        raise DegenerateDenominator(f"Trace(V^T*B*V) = {den:.3e} is not positive")
    return _quad_trace(v, p.a) / den


def _leading(p, rho):
    """Half-spectrum top-d eigenpairs of ``A - rho B`` (signed descending)."""
    return top_eigenslices(p.a - rho * p.b, p.d, "signed_desc")


def f_of_rho(p, rho):
    """Return ``(f(rho), V(rho), D(rho))``.

    ``V(rho)`` collects the eigenslices of the ``d`` signed-largest
    eigentubes of ``A - rho B`` and ``(A - rho B) * V = V * D``.
    """
    vals, vecs, _ = _leading(p, rho)
    v = from_half_spectrum(vecs, p.n3)
    tubes = FDiagonal(np.ascontiguousarray(full_from_half(vals.astype(complex), p.n3).T))
    value = float(tubes.tubes.real.sum() / p.n3)
    return value, v, tubes


def check_well_posed(p):
    """Report the rank condition on ``b``, its semi-definiteness and whether
    ``a`` and ``b`` share a near-null direction in some transform slice."""
    rank_b = tubal_rank(p.b)
    psd = is_positive_semidefinite(p.b)
    ha = hermitian_half(p.a)
    hb = hermitian_half(p.b)
    common = False
    for k in range(ha.shape[0]):
        na = _null_basis(ha[k])
        nb = _null_basis(hb[k])
        if na.shape[1] and nb.shape[1]:
            cos_max = np.linalg.svd(np.conj(na).T @ nb, compute_uv=False).max()
            if cos_max >= np.cos(NULL_ANGLE_TOL):
                common = True
                break
    return WellPosedness(rank_b, p.n - p.d + 1, psd, common)


def _null_basis(m, rtol=1e-10):
    vals, vecs = np.linalg.eigh(m)
    scale = max(np.abs(vals).max(), np.finfo(float).tiny)
    return vecs[:, np.abs(vals) <= rtol * scale] if np.abs(vals).max() > 0 else vecs


def newton_qr(p, v0=None, eps=1e-10, max_iter=100, seed=0):
    """Newton-QR iteration for the trace-ratio problem.

    Returns ``(v_star, rho_star, trace)``. ``v0`` defaults to the
    f-orthonormalisation of a seeded Gaussian tensor and is re-orthonormalised
    when it is not already f-orthonormal.
    """
    if eps <= 0 or max_iter < 1:
        raise ValueError("need eps > 0 and max_iter >= 1")
    report = check_well_posed(p)
    if not (report.rank_ok and report.b_psd):
        raise IllPosed(
            f"denominator tensor has tubal rank {report.tubal_rank_b} "
            f"(need >= {report.required_rank}), psd={report.b_psd}"
        )
    if v0 is None:
        v0 = f_orthonormalize(np.random.default_rng(seed).standard_normal((p.n, p.d, p.n3)))
    else:
        v0 = as_tensor(v0, "v0")
        gram = t_product_many(t_transpose(v0), v0) - identity_tensor(p.d, p.n3)
        if frobenius_norm(gram) > 1e-8:
            v0 = f_orthonormalize(v0)

    rho = objective(p, v0)
    tr = SolverTrace(rho_history=[rho])
    scale = frobenius_norm(p.a) + frobenius_norm(p.b)
    for _ in range(max_iter):
        vals, vecs, gap = _leading(p, rho)
        tr.f_history.append(float(full_from_half(vals, p.n3).sum() / p.n3))
        if np.any(gap <= DEGENERATE_GAP_RTOL * scale):
            tr.degenerate = True
        v = from_half_spectrum(vecs, p.n3)
        rho_new = objective(p, v)
        tr.rho_history.append(rho_new)
        tr.iterations += 1
        step = abs(rho - rho_new)
        if step <= eps:
            tr.converged = True
            break
        rho = rho_new
    else:
        tr.f_history.append(f_of_rho(p, rho_new)[0])
        raise NotConverged(f"no convergence in {max_iter} iterations (last step {step:.3e})", tr)
    tr.f_history.append(f_of_rho(p, rho_new)[0])
    logger.debug("newton_qr converged in %d iterations, rho*=%.12g", tr.iterations, rho_new)
    return v, rho_new, tr


def optimality_residual(p, v, rho):
    """``||(A - rho B) * V - V * Lambda||_F`` with ``Lambda = V^T (A - rho B) V``."""
    c = p.a - rho * p.b
    lam = t_product_many(t_transpose(v), c, v)
    return frobenius_norm(t_product_many(c, v) - t_product_many(v, lam))
