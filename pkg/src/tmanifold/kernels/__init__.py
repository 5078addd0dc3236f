"""Hot inner loops, with a numba implementation and a pure-numpy fallback.

The backend is picked once at import time from ``TMANIFOLD_BACKEND``
(``numba``, the default, or ``numpy``). If numba cannot be imported the
numpy path is used silently. Both backends expose the same functions and
agree to rounding; each is deterministic on its own.
"""
import os

_requested = os.environ.get("TMANIFOLD_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"TMANIFOLD_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        from . import _numba as _impl
    except ImportError:
        from . import _numpy as _impl
else:
    from . import _numpy as _impl

BACKEND = _impl.NAME

bcirc_matrix = _impl.bcirc_matrix
pairwise_sqdist = _impl.pairwise_sqdist
knn_mask = _impl.knn_mask
knn_indices = _impl.knn_indices
lme_weights = _impl.lme_weights
nearest_index = _impl.nearest_index
set_threads = _impl.set_threads

# status codes returned by lme_weights
LME_OK = 0
LME_REGULARIZED = 1
LME_SINGULAR = 2

__all__ = [
    "BACKEND",
    "bcirc_matrix",
    "pairwise_sqdist",
    "knn_mask",
    "knn_indices",
    "lme_weights",
    "nearest_index",
    "set_threads",
]
