"""Third-order tensors and the t-product algebra.

A tensor is a plain real ``numpy.ndarray`` of shape ``(n1, n2, n3)``;
``a[:, :, k]`` is the k-th frontal slice and ``a[i, j, :]`` a tube.
Transform-domain work uses stacks of slices shaped ``(n3, n1, n2)`` so
that each slice is contiguous, which is also the byte order of the T3B
file format.

Forward DFT along tubes is unnormalised, the inverse carries ``1/n3``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeMismatch, SymmetryViolation

SYMMETRY_TOL = 1e-9
BCIRC_MAX_ROWS = 4096


def as_tensor(a, name="tensor"):
    """Return ``a`` as a finite float64 array of shape (n1, n2, n3)."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ShapeMismatch(f"{name} must be a non-empty third-order tensor, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


@dataclass(frozen=True)
class TransformTensor:
    """Full-spectrum image of a tensor, slices stacked as ``(n3, n1, n2)``.

    ``real_origin`` is True when the slices came from a real tensor and are
    therefore conjugate-symmetric.
    """

    slices: np.ndarray
    real_origin: bool = False

    @property
    def shape(self):
        n3, n1, n2 = self.slices.shape
        return n1, n2, n3

    def norm(self):
        return float(np.linalg.norm(self.slices.ravel()))


def to_transform(a):
    a = as_tensor(a)
    fa = np.fft.fft(a, axis=2)
    return TransformTensor(np.ascontiguousarray(np.moveaxis(fa, 2, 0)), real_origin=True)


def symmetry_defect(slices):
    """Largest deviation from conjugate symmetry of a full slice stack."""
    n3 = slices.shape[0]
    mirrored = np.conj(slices[(-np.arange(n3)) % n3])
    return float(np.max(np.abs(slices - mirrored), initial=0.0))


def from_transform(ft, tol=SYMMETRY_TOL):
    """Inverse DFT along tubes, returning a real tensor.

    Raises :class:`SymmetryViolation` if the slices are not conjugate-symmetric
    within ``tol * ||ft||_F``; the leftover imaginary part is dropped.
    """
    slices = ft.slices if isinstance(ft, TransformTensor) else np.asarray(ft)
    scale = max(float(np.linalg.norm(slices.ravel())), np.finfo(float).tiny)
    defect = symmetry_defect(slices)
    if defect > tol * scale:
        raise SymmetryViolation(
            f"transform slices not conjugate-symmetric: defect {defect:.3e} > {tol:.1e} * {scale:.3e}"
        )
    return np.ascontiguousarray(np.fft.ifft(np.moveaxis(slices, 0, 2), axis=2).real)


def half_spectrum(a):
    """Transform slices 1..floor(n3/2)+1 as a ``(h, n1, n2)`` stack.

    These determine the rest by conjugation. For even ``n3`` the Nyquist
    slice is included; it is not the conjugate of any computed slice.
    """
    return np.ascontiguousarray(np.moveaxis(np.fft.rfft(a, axis=2), 2, 0))


def from_half_spectrum(half, n3):
    """Inverse of :func:`half_spectrum`; the conjugate mirror is implied."""
    return np.ascontiguousarray(np.fft.irfft(np.moveaxis(half, 0, 2), n=n3, axis=2))


def full_from_half(half, n3):
    """Expand a half-spectrum stack to all ``n3`` slices by conjugation."""
    h = half.shape[0]
    rest = np.conj(half[1 : n3 - h + 1][::-1])
    return np.concatenate([half, rest], axis=0)


def self_conjugate_slices(n3):
    """Indices (0-based, within the half spectrum) of slices that are real."""
    return (0, n3 // 2) if n3 % 2 == 0 and n3 > 1 else (0,)


def t_product(a, b):
    """t-product ``a * b`` computed slice-wise in the transform domain."""
    a = as_tensor(a, "a")
    b = as_tensor(b, "b")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeMismatch(f"cannot t-multiply {a.shape} by {b.shape}")
    return from_half_spectrum(half_spectrum(a) @ half_spectrum(b), a.shape[2])


def t_product_many(*tensors):
    """Left-to-right chain of t-products without leaving the transform domain."""
    ts = [as_tensor(t) for t in tensors]
    for left, right in zip(ts, ts[1:]):
        if left.shape[1] != right.shape[0] or left.shape[2] != right.shape[2]:
            raise ShapeMismatch(f"cannot t-multiply {left.shape} by {right.shape}")
    acc = half_spectrum(ts[0])
    for t in ts[1:]:
        acc = acc @ half_spectrum(t)
    return from_half_spectrum(acc, ts[0].shape[2])


def unfold(a):
    a = as_tensor(a)
    return np.concatenate([a[:, :, k] for k in range(a.shape[2])], axis=0)


def fold(mat, n1, n3):
    mat = np.asarray(mat, dtype=np.float64)
    if mat.shape[0] != n1 * n3:
        raise ShapeMismatch(f"cannot fold {mat.shape} into n1={n1}, n3={n3}")
    return np.ascontiguousarray(np.stack([mat[k * n1 : (k + 1) * n1] for k in range(n3)], axis=2))


def bcirc(a):
    """Block-circulant matrix of size ``(n1*n3, n2*n3)``."""
    a = as_tensor(a)
    if a.shape[0] * a.shape[2] > BCIRC_MAX_ROWS:
        raise ShapeMismatch(
            f"bcirc of {a.shape} would have {a.shape[0] * a.shape[2]} rows (limit {BCIRC_MAX_ROWS})"
        )
    return kernels.bcirc_matrix(np.ascontiguousarray(np.moveaxis(a, 2, 0)))


def bcirc_oracle(a, b):
    """Reference t-product ``fold(bcirc(a) @ unfold(b))``, for testing only."""
    a = as_tensor(a, "a")
    b = as_tensor(b, "b")
    if a.shape[1] != b.shape[0] or a.shape[2] != b.shape[2]:
        raise ShapeMismatch(f"cannot t-multiply {a.shape} by {b.shape}")
    return fold(bcirc(a) @ unfold(b), a.shape[0], a.shape[2])


def t_transpose(a):
    a = as_tensor(a)
    n3 = a.shape[2]
    return np.ascontiguousarray(np.transpose(a, (1, 0, 2))[:, :, (-np.arange(n3)) % n3])


def identity_tensor(n, n3):
    if n < 1 or n3 < 1:
        raise ShapeMismatch(f"identity tensor needs n, n3 >= 1, got {n}, {n3}")
    eye = np.zeros((n, n, n3))
    eye[:, :, 0] = np.eye(n)
    return eye


def trace(a):
    """Tensor trace, the mean over transform slices of the slice traces.

    Since the first frontal slice is the mean of the transform slices this
    reduces to the trace of ``a[:, :, 0]``; that is what we evaluate.
    """
    a = as_tensor(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"trace needs a square tensor, got {a.shape}")
    return float(np.trace(a[:, :, 0]))


def transform_trace(a):
    """Trace evaluated literally as ``(1/n3) sum_i Trace(A_hat_i)``."""
    a = as_tensor(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"trace needs a square tensor, got {a.shape}")
    fa = np.fft.fft(a, axis=2)
    return float(np.einsum("iik->", fa).real / a.shape[2])


def frobenius_norm(a):
    return float(np.linalg.norm(as_tensor(a).ravel()))


def inner_product(a, b):
    a = as_tensor(a, "a")
    b = as_tensor(b, "b")
    if a.shape != b.shape:
        raise ShapeMismatch(f"inner product of {a.shape} and {b.shape}")
    return float(np.dot(a.ravel(), b.ravel()))


def is_f_symmetric(a, tol=SYMMETRY_TOL):
    a = as_tensor(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"f-symmetry needs a square tensor, got {a.shape}")
    defect = np.linalg.norm((a - t_transpose(a)).ravel())
    return bool(defect <= tol * max(1.0, np.linalg.norm(a.ravel())))
