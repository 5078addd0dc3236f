import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tmanifold.errors import ShapeMismatch, SymmetryViolation
from tmanifold.tensor import (
    TransformTensor,
    as_tensor,
    bcirc,
    bcirc_oracle,
    fold,
    frobenius_norm,
    from_half_spectrum,
    from_transform,
    half_spectrum,
    identity_tensor,
    inner_product,
    is_f_symmetric,
    t_product,
    t_product_many,
    t_transpose,
    to_transform,
    trace,
    transform_trace,
    unfold,
)

from conftest import fro

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def conformable_pair(draw):
    n1, q, n2 = (draw(st.integers(1, 5)) for _ in range(3))
    n3 = draw(st.sampled_from([1, 2, 3, 4, 5, 8]))
    a = draw(arrays(np.float64, (n1, q, n3), elements=finite))
    b = draw(arrays(np.float64, (q, n2, n3), elements=finite))
    return a, b


def naive_dft(a):
    n3 = a.shape[2]
    k = np.arange(n3)
    f = np.exp(-2j * np.pi * np.outer(k, k) / n3)
    return np.einsum("ijt,kt->ijk", a, f)


class TestTransform:
    def test_constant_tube(self):
        a = np.full((1, 1, 4), 2.5)
        ft = to_transform(a)
        np.testing.assert_allclose(ft.slices[:, 0, 0], [10.0, 0, 0, 0], atol=1e-14)

    def test_length_one_is_identity(self, rng):
        a = rng.standard_normal((3, 2, 1))
        ft = to_transform(a)
        np.testing.assert_array_equal(ft.slices[0].real, a[:, :, 0])
        assert np.all(ft.slices.imag == 0)

    def test_matches_direct_dft_and_conjugate_symmetry(self, rng):
        a = rng.standard_normal((3, 2, 4))
        ft = to_transform(a)
        np.testing.assert_allclose(np.moveaxis(ft.slices, 0, 2), naive_dft(a), atol=1e-12)
        for i in range(1, 4):
            np.testing.assert_allclose(ft.slices[i], np.conj(ft.slices[4 - i]), atol=1e-12)
        assert np.abs(ft.slices[0].imag).max() <= 1e-12 * ft.norm()
        assert ft.shape == (3, 2, 4)

    @pytest.mark.parametrize("shape", [(4, 4, 5), (16, 16, 8), (1, 7, 2)])
    def test_round_trip(self, rng, shape):
        a = rng.standard_normal(shape)
        assert np.abs(from_transform(to_transform(a)) - a).max() <= 1e-12

    def test_zero_transform(self):
        out = from_transform(TransformTensor(np.zeros((3, 2, 2), dtype=complex)))
        assert out.shape == (2, 2, 3) and not out.any()

    def test_broken_symmetry_raises(self, rng):
        ft = to_transform(rng.standard_normal((3, 3, 4))).slices.copy()
        ft[1] += 1e-3 * (1 + 1j)
        with pytest.raises(SymmetryViolation):
            from_transform(ft)

    def test_half_spectrum_round_trip_even_and_odd(self, rng):
        for n3 in (1, 2, 5, 6):
            a = rng.standard_normal((2, 3, n3))
            np.testing.assert_allclose(from_half_spectrum(half_spectrum(a), n3), a, atol=1e-13)

    def test_parseval_scaling(self, rng):
        a = rng.standard_normal((3, 4, 5))
        assert fro(a) ** 2 == pytest.approx(to_transform(a).norm() ** 2 / 5, rel=1e-12)


class TestProduct:
    def test_matrix_case(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
        b = np.array([[1.0], [0.0]])[:, :, None]
        np.testing.assert_allclose(t_product(a, b)[:, :, 0], [[1.0], [3.0]])

    def test_tube_identity_in_oracle(self):
        a = np.array([1.0, 0.0, 0.0]).reshape(1, 1, 3)
        b = np.array([2.0, -1.0, 7.0]).reshape(1, 1, 3)
        np.testing.assert_array_equal(bcirc_oracle(a, b), b)

    def test_identity_exact_in_oracle(self, rng):
        b = rng.standard_normal((2, 3, 3))
        np.testing.assert_array_equal(bcirc_oracle(identity_tensor(2, 3), b), b)

    def test_right_identity(self, rng):
        a = rng.standard_normal((3, 4, 5))
        np.testing.assert_allclose(t_product(a, identity_tensor(4, 5)), a, atol=1e-13)
        np.testing.assert_allclose(t_product(identity_tensor(3, 5), a), a, atol=1e-13)

    @pytest.mark.parametrize("shape", [(3, 3, 4), (2, 2, 2)])
    def test_random_vs_oracle(self, rng, shape):
        a, b = rng.standard_normal(shape), rng.standard_normal(shape)
        want = bcirc_oracle(a, b)
        assert fro(t_product(a, b) - want) <= 1e-12 * fro(want)

    @settings(max_examples=200, deadline=None)
    @given(conformable_pair())
    def test_oracle_property(self, pair):
        a, b = pair
        want = bcirc_oracle(a, b)
        assert fro(t_product(a, b) - want) <= 1e-12 * max(fro(want), 1e-300) + 1e-12

    def test_associativity(self, rng):
        a, b, c = (rng.standard_normal(s) for s in [(3, 4, 5), (4, 2, 5), (2, 6, 5)])
        left = t_product(t_product(a, b), c)
        assert fro(left - t_product(a, t_product(b, c))) <= 1e-11 * fro(left)
        assert fro(left - t_product_many(a, b, c)) <= 1e-11 * fro(left)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            t_product(rng.standard_normal((2, 3, 2)), rng.standard_normal((2, 3, 2)))
        with pytest.raises(ShapeMismatch):
            t_product(rng.standard_normal((2, 3, 2)), rng.standard_normal((3, 3, 4)))
        with pytest.raises(ShapeMismatch):
            bcirc_oracle(rng.standard_normal((2, 3, 2)), rng.standard_normal((2, 3, 2)))

    def test_bcirc_layout(self):
        a = np.stack([np.full((1, 1), v) for v in (1.0, 2.0, 3.0)], axis=2)
        np.testing.assert_array_equal(bcirc(a), [[1, 3, 2], [2, 1, 3], [3, 2, 1]])

    def test_bcirc_size_guard(self):
        with pytest.raises(ShapeMismatch):
            bcirc(np.zeros((1025, 1, 4)))

    def test_fold_unfold(self, rng):
        a = rng.standard_normal((3, 2, 4))
        np.testing.assert_array_equal(fold(unfold(a), 3, 4), a)
        with pytest.raises(ShapeMismatch):
            fold(np.zeros((5, 2)), 3, 4)


class TestTranspose:
    def test_matrix_case(self, rng):
        a = rng.standard_normal((3, 4, 1))
        np.testing.assert_array_equal(t_transpose(a)[:, :, 0], a[:, :, 0].T)

    def test_slice_order(self, rng):
        a = rng.standard_normal((2, 3, 4))
        at = t_transpose(a)
        np.testing.assert_array_equal(at[:, :, 0], a[:, :, 0].T)
        for k in range(1, 4):
            np.testing.assert_array_equal(at[:, :, k], a[:, :, 4 - k].T)

    def test_involution(self, rng):
        a = rng.standard_normal((3, 4, 5))
        np.testing.assert_array_equal(t_transpose(t_transpose(a)), a)

    def test_product_reversal_via_oracle(self, rng):
        a, b = rng.standard_normal((3, 4, 5)), rng.standard_normal((4, 2, 5))
        lhs = t_transpose(bcirc_oracle(a, b))
        rhs = bcirc_oracle(t_transpose(b), t_transpose(a))
        assert fro(lhs - rhs) <= 1e-12 * fro(lhs)


class TestTraceAndNorms:
    def test_identity_trace(self):
        assert trace(identity_tensor(5, 3)) == 5
        assert transform_trace(identity_tensor(5, 3)) == pytest.approx(5)

    def test_identity_transform_slices(self):
        np.testing.assert_array_equal(to_transform(identity_tensor(3, 4)).slices, np.broadcast_to(np.eye(3), (4, 3, 3)))

    def test_trace_is_first_slice(self, rng):
        a = rng.standard_normal((4, 4, 3))
        assert transform_trace(a) == pytest.approx(np.trace(a[:, :, 0]), abs=1e-12)
        assert trace(a) == np.trace(a[:, :, 0])

    def test_trace_linear(self, rng):
        a, b = rng.standard_normal((3, 3, 4)), rng.standard_normal((3, 3, 4))
        assert trace(2 * a - b) == pytest.approx(2 * trace(a) - trace(b))

    def test_trace_needs_square(self):
        with pytest.raises(ShapeMismatch):
            trace(np.zeros((2, 3, 2)))
        with pytest.raises(ShapeMismatch):
            transform_trace(np.zeros((2, 3, 2)))

    def test_frobenius_via_trace(self, rng):
        a = rng.standard_normal((3, 5, 4))
        assert trace(t_product(a, t_transpose(a))) == pytest.approx(frobenius_norm(a) ** 2, rel=1e-10)

    def test_inner_product(self, rng):
        a, b = rng.standard_normal((3, 3, 4)), rng.standard_normal((3, 3, 4))
        ip = inner_product(a, b)
        assert inner_product(a, a) == pytest.approx(frobenius_norm(a) ** 2)
        assert trace(t_product(t_transpose(a), b)) == pytest.approx(ip, rel=1e-10)
        assert trace(t_product(a, t_transpose(b))) == pytest.approx(ip, rel=1e-10)
        with pytest.raises(ShapeMismatch):
            inner_product(a, b[:2])

    def test_ones_norm(self):
        assert frobenius_norm(np.ones((2, 2, 2))) == pytest.approx(np.sqrt(8))


class TestSymmetryAndValidation:
    def test_f_symmetric(self, rng):
        a = rng.standard_normal((3, 3, 4))
        assert is_f_symmetric(a + t_transpose(a))
        assert is_f_symmetric(identity_tensor(3, 2))
        b = rng.standard_normal((3, 3, 2))
        assert fro(b - t_transpose(b)) > 1e-3 and not is_f_symmetric(b)
        with pytest.raises(ShapeMismatch):
            is_f_symmetric(np.zeros((2, 3, 1)))

    def test_as_tensor(self):
        assert as_tensor(np.zeros((2, 3))).shape == (2, 3, 1)
        with pytest.raises(ShapeMismatch):
            as_tensor(np.zeros(3))
        with pytest.raises(ShapeMismatch):
            as_tensor(np.zeros((0, 2, 2)))
        with pytest.raises(ValueError):
            as_tensor(np.array([[[np.nan]]]))
