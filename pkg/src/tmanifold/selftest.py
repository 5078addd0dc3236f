"""Quick end-to-end self checks run by ``tmanifold selftest``.

Two groups: the FFT t-product against the block-circulant definition, and
each method at ``n3 = 1`` against its plain matrix counterpart.
"""
from dataclasses import dataclass

import numpy as np

from . import _reference as ref
from .manifold import lme_fit, mle_fit, mlde_fit
from .tensor import bcirc_oracle, t_product

ORACLE_RTOL = 1e-12
SUBSPACE_TOL = 1e-5


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def oracle_equivalence(trials=200, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n1, n2, m = rng.integers(1, 9, size=3)
        n3 = int(rng.choice([1, 2, 3, 4, 5, 8]))
        a = rng.standard_normal((n1, n2, n3))
        b = rng.standard_normal((n2, m, n3))
        want = bcirc_oracle(a, b)
        err = np.linalg.norm((t_product(a, b) - want).ravel()) / max(np.linalg.norm(want.ravel()), 1e-300)
        worst = max(worst, err)
    return Check("oracle_equivalence", worst <= ORACLE_RTOL, f"max relative error {worst:.2e} over {trials} pairs")


def _two_blobs(rng, n_per, p, sep):
    x = rng.standard_normal((2 * n_per, p))
    x[n_per:, 0] += sep
    return x, np.repeat([1, 2], n_per)


def matrix_degeneration(seed=0):
    rng = np.random.default_rng(seed)
    checks = []

    x, labels = _two_blobs(rng, 15, 6, 4.0)
    model = mlde_fit(x.T[:, :, None], labels, 2, 4, 4, seed=seed)
    v_ref, _ = ref.lde(x.T, labels, 2, 4, 4, seed=seed)
    dist = ref.projector_distance(model.v[:, :, 0], v_ref)
    checks.append(Check("mlde_vs_lde", dist <= SUBSPACE_TOL, f"projector distance {dist:.2e}"))

    emb = mle_fit(x[:, :, None], 2, 6)
    _, y_ref = ref.laplacian_eigenmaps(x, 2, 6)
    dist = ref.projector_distance(emb.y[:, :, 0], y_ref)
    checks.append(Check("mle_vs_laplacian_eigenmaps", dist <= SUBSPACE_TOL, f"projector distance {dist:.2e}"))

    emb = lme_fit(x[:, :, None], 2, 8)
    _, y_ref = ref.lle(x, 2, 8)
    dist = ref.projector_distance(emb.y[:, :, 0], y_ref)
    checks.append(Check("lme_vs_lle", dist <= SUBSPACE_TOL, f"projector distance {dist:.2e}"))
    return checks


def run_all(seed=0):
    return [oracle_equivalence(seed=seed), *matrix_degeneration(seed)]
