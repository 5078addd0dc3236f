"""Eigentubes, eigenslices and related per-slice spectral tests.

Everything here works on the half spectrum: slices ``0..n3//2`` of the
tube-wise DFT. The remaining slices are complex conjugates, so their
eigenvalues coincide and their eigenvectors are the conjugates. The DC
slice (and the Nyquist slice for even ``n3``) is real and is solved with
a real symmetric solver so that spatial eigenslices come out real.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    InsufficientNonzero,
    NotFSymmetric,
    NotPositiveDefinite,
    ShapeMismatch,
    SliceEigFailure,
)
from .tensor import (
    as_tensor,
    from_half_spectrum,
    full_from_half,
    half_spectrum,
    is_f_symmetric,
    self_conjugate_slices,
    t_product,
    t_product_many,
)

F_SYMMETRY_TOL = 1e-8
DEFINITE_RTOL = 1e-10
ZERO_RTOL = 1e-8
_ORDERINGS = ("magnitude", "signed_desc", "signed_asc")


@dataclass(frozen=True)
class FDiagonal:
    """Tube table of an f-diagonal tensor.

    ``tubes[l, k]`` is the transform-domain value of tube ``l`` on slice ``k``.
    """

    tubes: np.ndarray

    @property
    def n(self):
        return self.tubes.shape[0]

    @property
    def n3(self):
        return self.tubes.shape[1]

    def spatial(self):
        """Tubes in the spatial domain (real part of the inverse DFT)."""
        return np.fft.ifft(self.tubes, axis=1).real

    def imag_residue(self):
        return float(np.max(np.abs(np.fft.ifft(self.tubes, axis=1).imag), initial=0.0))

    def to_tensor(self):
        n, n3 = self.tubes.shape
        out = np.zeros((n, n, n3))
        out[np.arange(n), np.arange(n), :] = self.spatial()
        return out

    def scaled(self, factor):
        return FDiagonal(self.tubes * factor)

    def head(self, m):
        return FDiagonal(self.tubes[:m])


@dataclass(frozen=True)
class EigenPairs:
    """Eigenslices (lateral slices of ``eigenslices``) with their eigentubes."""

    eigenslices: np.ndarray
    eigentubes: FDiagonal
    residual: float


def hermitian_half(a):
    """Half-spectrum slices of an f-symmetric tensor, exactly Hermitian.

    Self-conjugate slices are returned with zero imaginary part.
    """
    half = half_spectrum(a)
    half = 0.5 * (half + np.conj(np.swapaxes(half, -1, -2)))
    for k in self_conjugate_slices(a.shape[2]):
        half[k] = half[k].real
    return half


def _require_f_symmetric(a, name, tol=F_SYMMETRY_TOL):
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square in modes 1 and 2, got {a.shape}")
    if not is_f_symmetric(a, tol):
        raise NotFSymmetric(f"{name} is not f-symmetric (tol {tol:.0e})")


def _reduce_generalized(am, bm):
    """``L^-1 A L^-H`` with ``B = L L^H``, plus ``L`` for back-substitution."""
    low = np.linalg.cholesky(bm)
    c = np.linalg.solve(low, np.conj(np.linalg.solve(low, am)).T)
    return 0.5 * (c + np.conj(c).T), low


def _slice_eigh(half, bhalf, n3):
    """Ascending eigenpairs of each half-spectrum slice (generalised if ``bhalf``).

    Only numpy's LAPACK is used here; scipy's bundled OpenBLAS has been seen
    to crash in the generalised drivers when run with several BLAS threads.
    """
    real = set(self_conjugate_slices(n3))
    h, n, _ = half.shape
    vals = np.empty((h, n))
    vecs = np.empty((h, n, n), dtype=complex)
    for k in range(h):
        am = half[k].real if k in real else half[k]
        try:
            if bhalf is None:
                vals[k], vecs[k] = np.linalg.eigh(am)
            else:
                bm = bhalf[k].real if k in real else bhalf[k]
                c, low = _reduce_generalized(am, bm)
                vals[k], y = np.linalg.eigh(c)
                vecs[k] = np.linalg.solve(np.conj(low).T, y)
        except np.linalg.LinAlgError as exc:
            raise SliceEigFailure(f"eigensolver failed on transform slice {k}: {exc}") from None
    return vals, vecs


def _sort_columns(vals, vecs, ordering):
    if ordering == "signed_asc":
        key = vals
    elif ordering == "signed_desc":
        key = -vals
    else:
        key = -np.abs(vals)
    order = np.argsort(key, axis=1, kind="stable")
    return np.take_along_axis(vals, order, axis=1), np.take_along_axis(vecs, order[:, None, :], axis=2)


def normalize_phase(vecs):
    """Rotate every column so its first non-negligible entry is real positive."""
    mag = np.abs(vecs)
    thresh = 1e-8 * np.max(mag, axis=-2, keepdims=True)
    first = np.argmax(mag > thresh, axis=-2)[..., None, :]
    pivot = np.take_along_axis(vecs, first, axis=-2)
    phase = np.where(np.abs(pivot) > 0, np.conj(pivot) / np.where(pivot == 0, 1, np.abs(pivot)), 1.0)
    return vecs * phase


def _assemble(vals, vecs, n3):
    """Spatial eigenslices and tube table from half-spectrum eigenpairs."""
    eigenslices = from_half_spectrum(vecs, n3)
    tubes = full_from_half(vals.astype(complex), n3).T
    return eigenslices, FDiagonal(np.ascontiguousarray(tubes))


def eig_f_symmetric(a, ordering="magnitude"):
    """Full eigendecomposition ``A * V = V * Lambda`` of an f-symmetric tensor.

    ``ordering`` sorts eigenvalues within each transform slice: by
    decreasing magnitude, signed descending or signed ascending.
    """
    if ordering not in _ORDERINGS:
        raise ValueError(f"ordering must be one of {_ORDERINGS}, got {ordering!r}")
    a = as_tensor(a, "a")
    _require_f_symmetric(a, "a")
    n3 = a.shape[2]
    vals, vecs = _slice_eigh(hermitian_half(a), None, n3)
    vals, vecs = _sort_columns(vals, vecs, ordering)
    v, tubes = _assemble(vals, normalize_phase(vecs), n3)
    resid = np.linalg.norm((t_product(a, v) - t_product(v, tubes.to_tensor())).ravel())
    return EigenPairs(v, tubes, float(resid))


def top_eigenslices(a, d, ordering="signed_desc"):
    """Leading ``d`` eigenpairs per slice without the residual bookkeeping.

    Returns ``(vals_half, vecs_half)`` with shapes ``(h, d)`` and ``(h, n, d)``
    plus the per-slice gap between positions ``d`` and ``d + 1``.
    """
    n3 = a.shape[2]
    vals, vecs = _slice_eigh(hermitian_half(a), None, n3)
    vals, vecs = _sort_columns(vals, vecs, ordering)
    gap = np.abs(vals[:, d - 1] - vals[:, d]) if d < vals.shape[1] else np.full(vals.shape[0], np.inf)
    return vals[:, :d], normalize_phase(vecs[:, :, :d]), gap


def slice_eigvalsh(a):
    """Eigenvalues of every half-spectrum slice of an f-symmetric tensor."""
    return np.linalg.eigvalsh(hermitian_half(as_tensor(a)))


def generalized_eig(a, b, d, which="largest", zero_tol=None):
    """Solve ``A * U = B * U * Lambda`` slice-wise and keep ``d`` eigenslices.

    ``b`` must be f-symmetric positive definite. The returned eigenslices
    are B-orthonormal, ``U^T * B * U = I_d``. With ``which="smallest_nonzero"``
    eigenvalues with ``|lambda| <= zero_tol`` are skipped per slice before
    the ``d`` smallest are taken.
    """
    if which not in ("largest", "smallest_nonzero"):
        raise ValueError(f"which must be 'largest' or 'smallest_nonzero', got {which!r}")
    a = as_tensor(a, "a")
    b = as_tensor(b, "b")
    if a.shape != b.shape:
        raise ShapeMismatch(f"a {a.shape} and b {b.shape} differ")
    _require_f_symmetric(a, "a")
    _require_f_symmetric(b, "b")
    n, _, n3 = a.shape
    if not 1 <= d <= n:
        raise ValueError(f"d must be in [1, {n}], got {d}")
    bhalf = hermitian_half(b)
    bmin = np.linalg.eigvalsh(bhalf).min(axis=1)
    bscale = max(np.abs(np.linalg.eigvalsh(bhalf)).max(), np.finfo(float).tiny)
    if np.any(bmin <= DEFINITE_RTOL * bscale):
        raise NotPositiveDefinite(f"b is not positive definite (min slice eigenvalue {bmin.min():.3e})")
    vals, vecs = _slice_eigh(hermitian_half(a), bhalf, n3)

    if which == "largest":
        vals, vecs = vals[:, ::-1][:, :d], vecs[:, :, ::-1][:, :, :d]
    else:
        if zero_tol is None:
            zero_tol = ZERO_RTOL * n * np.abs(vals).max()
        keep_vals = np.empty((vals.shape[0], d))
        keep_vecs = np.empty((vals.shape[0], n, d), dtype=complex)
        for k in range(vals.shape[0]):
            nz = np.flatnonzero(np.abs(vals[k]) > zero_tol)
            if nz.size < d:
                raise InsufficientNonzero(
                    f"transform slice {k} has {nz.size} non-zero eigenvalues, need {d}"
                )
            keep_vals[k] = vals[k, nz[:d]]
            keep_vecs[k] = vecs[k][:, nz[:d]]
        vals, vecs = keep_vals, keep_vecs

    u, tubes = _assemble(vals, normalize_phase(vecs), n3)
    resid = np.linalg.norm((t_product(a, u) - t_product_many(b, u, tubes.to_tensor())).ravel())
    return EigenPairs(u, tubes, float(resid))


def _definiteness_bounds(a):
    a = as_tensor(a, "a")
    _require_f_symmetric(a, "a")
    ev = slice_eigvalsh(a)
    tol = DEFINITE_RTOL * np.abs(ev).max()
    return ev.min(), tol


def is_positive_definite(a):
    lo, tol = _definiteness_bounds(a)
    return bool(lo > tol)


def is_positive_semidefinite(a):
    lo, tol = _definiteness_bounds(a)
    return bool(lo >= -tol)


def tubal_rank(a, tol=1e-10):
    """Number of singular tubes whose largest transform-domain entry exceeds
    ``tol`` times the largest singular value of any slice."""
    sv = np.linalg.svd(half_spectrum(as_tensor(a)), compute_uv=False)  # (h, min(n1, n2))
    top = sv.max(initial=0.0)
    if top == 0.0:
        return 0
    return int(np.count_nonzero(sv.max(axis=0) > tol * top))


def is_laplacian(a, tol=1e-9):
    """True iff every transform slice is a real symmetric matrix with
    non-positive off-diagonal entries and zero row sums (within ``tol``)."""
    a = as_tensor(a)
    if a.shape[0] != a.shape[1]:
        return False
    half = half_spectrum(a)
    atol = tol * max(1.0, float(np.abs(half).max()))
    if np.abs(half.imag).max() > atol:
        return False
    re = half.real
    if np.abs(re - np.swapaxes(re, -1, -2)).max() > atol:
        return False
    off = re[:, ~np.eye(a.shape[0], dtype=bool)]
    if off.size and off.max() > atol:
        return False
    return bool(np.abs(re.sum(axis=2)).max() <= atol)


def f_orthonormalize(v):
    """t-QR factor ``Q`` of ``v`` (n x d x n3, n >= d): ``Q^T * Q = I_d``.

    Per-slice QR with the diagonal of ``R`` made real positive, so the result
    is deterministic and spans the same lateral-slice module as ``v``.
    """
    v = as_tensor(v, "v")
    n, d, n3 = v.shape
    if d > n:
        raise ShapeMismatch(f"cannot f-orthonormalize {d} lateral slices of length {n}")
    half = half_spectrum(v)
    for k in self_conjugate_slices(n3):
        half[k] = half[k].real
    q, r = np.linalg.qr(half)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    phase = np.where(np.abs(diag) > 0, diag / np.where(diag == 0, 1, np.abs(diag)), 1.0)
    return from_half_spectrum(q * phase[:, None, :], n3)


def random_f_orthonormal(n, d, n3, rng):
    return f_orthonormalize(rng.standard_normal((n, d, n3)))
