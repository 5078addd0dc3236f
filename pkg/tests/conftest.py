import numpy as np
import pytest

from tmanifold.tensor import identity_tensor, t_product, t_transpose


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def random_f_symmetric(rng, n, n3):
    a = rng.standard_normal((n, n, n3))
    return a + t_transpose(a)


def random_spd(rng, n, n3, shift=1.0):
    c = rng.standard_normal((n, n, n3))
    return t_product(c, t_transpose(c)) + shift * identity_tensor(n, n3)


def fro(a):
    return float(np.linalg.norm(np.asarray(a).ravel()))


def projector(u):
    q = np.linalg.qr(u)[0]
    return q @ q.T


def s_curve(n, rng):
    """Points on a 2-D S-shaped sheet in 3-D."""
    t = 3 * np.pi * (rng.uniform(size=n) - 0.5)
    y = 2.0 * rng.uniform(size=n)
    return np.column_stack([np.sin(t), y, np.sign(t) * (np.cos(t) - 1)])


def random_feasible_half(rng, count, n, d, n3):
    """Half-spectrum slices of ``count`` random f-orthonormal n x d x n3 tensors."""
    h = n3 // 2 + 1
    z = rng.standard_normal((count, h, n, d)) + 1j * rng.standard_normal((count, h, n, d))
    z[:, 0] = z[:, 0].real
    if n3 % 2 == 0 and n3 > 1:
        z[:, -1] = z[:, -1].real
    return np.linalg.qr(z)[0]


def batch_objective(a, b, q):
    """Trace ratio for every half-spectrum stack in ``q`` (count, h, n, d)."""
    n3 = a.shape[2]
    h = q.shape[1]
    ah = np.moveaxis(np.fft.rfft(a, axis=2), 2, 0)
    bh = np.moveaxis(np.fft.rfft(b, axis=2), 2, 0)
    w = np.full(h, 2.0)
    w[0] = 1.0
    if n3 % 2 == 0 and n3 > 1:
        w[-1] = 1.0
    qh = np.conj(np.swapaxes(q, -1, -2))
    num = np.einsum("k,ckii->c", w, qh @ ah @ q).real
    den = np.einsum("k,ckii->c", w, qh @ bh @ q).real
    return num / den


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
