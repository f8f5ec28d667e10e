import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sepbf.numerics import (
    canonical_phase,
    gen_herm_eig,
    herm_eig,
    psd_project,
    q,
    q_inv,
    q_prime,
    real_embed_matrix,
    real_embed_vector,
    unembed_matrix,
)

from conftest import random_hermitian


def mp_q(x):
    # Gaussian tail by quadrature
    mpmath.mp.dps = 40
    f = lambda t: mpmath.exp(-t * t / 2) / mpmath.sqrt(2 * mpmath.pi)
    return float(mpmath.quad(f, [x, mpmath.inf]))


class TestQ:
    def test_zero(self):
        assert q(0.0) == 0.5

    def test_one_against_quadrature(self):
        assert q(1.0) == pytest.approx(mp_q(1.0), rel=1e-12)
        assert q(1.0) == pytest.approx(0.15865525, abs=1e-8)

    @pytest.mark.parametrize("x", [-5.0, -1.3, 0.2, 2.5, 5.0, 8.0, 12.0, 25.0, 37.5])
    def test_relative_accuracy(self, x):
        assert q(x) == pytest.approx(mp_q(x), rel=1e-12)

    def test_far_tail(self):
        v = q(40.0)
        assert 0.0 <= v < 1e-300

    # below about -8.3 the double result saturates at 1.0
    @given(st.floats(-7, 30), st.floats(1e-3, 5))
    def test_strictly_decreasing(self, x, dx):
        assert q(x) > q(x + dx)

    @given(st.floats(-30, 30))
    def test_symmetry(self, x):
        assert q(x) + q(-x) == pytest.approx(1.0, abs=1e-12)

    def test_derivative_matches_finite_difference(self):
        for x in (-1.0, 0.3, 2.0):
            h = 1e-6
            fd = (q(x + h) - q(x - h)) / (2 * h)
            assert q_prime(x) == pytest.approx(fd, rel=1e-7)


class TestQInv:
    def test_half(self):
        assert q_inv(0.5) == 0.0

    def test_point_one(self):
        # root of q(x) = 0.1 with the quadrature oracle
        root = float(mpmath.findroot(lambda x: mp_q(x) - 0.1, 1.3))
        assert q_inv(0.1) == pytest.approx(root, abs=1e-9)
        assert q_inv(0.1) == pytest.approx(1.2815516, abs=1e-7)

    def test_roundtrip_1_7(self):
        assert q_inv(q(1.7)) == pytest.approx(1.7, abs=1e-10)

    @given(st.floats(1e-15, 1 - 1e-12))
    def test_roundtrip(self, p):
        assert q(q_inv(p)) == pytest.approx(p, rel=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            q_inv(p)


class TestHermEig:
    def test_identity(self):
        e = herm_eig(np.eye(3))
        np.testing.assert_allclose(e.values, [1, 1, 1], atol=1e-14)

    def test_diag(self):
        e = herm_eig(np.diag([3.0, 1.0]))
        np.testing.assert_allclose(e.values, [1, 3])
        assert abs(abs(e.vectors[1, 0]) - 1) < 1e-12
        assert abs(abs(e.vectors[0, 1]) - 1) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_random_against_numpy(self, n):
        rng = np.random.default_rng(n)
        for _ in range(10):
            a = random_hermitian(rng, n)
            e = herm_eig(a)
            np.testing.assert_allclose(e.values, np.linalg.eigvalsh(a), atol=1e-12 * (1 + np.linalg.norm(a)))
            rec = (e.vectors * e.values) @ e.vectors.conj().T
            assert np.linalg.norm(rec - a) <= 1e-10
            for lam, v in zip(e.values, e.vectors.T):
                assert np.linalg.norm(a @ v - lam * v) <= 1e-10 * (1 + np.linalg.norm(a))
            gram = e.vectors.conj().T @ e.vectors
            assert np.linalg.norm(gram - np.eye(n)) <= 1e-8

    def test_non_square(self):
        with pytest.raises(ValueError):
            herm_eig(np.ones((2, 3)))


class TestGenHermEig:
    def test_identity_b(self):
        rng = np.random.default_rng(0)
        a = random_hermitian(rng, 3, psd=True)
        g, e = gen_herm_eig(a, np.eye(3)), herm_eig(a)
        np.testing.assert_allclose(g.values, e.values, atol=1e-12)

    def test_diag(self):
        g = gen_herm_eig(np.diag([4.0, 1.0]), np.diag([2.0, 1.0]))
        np.testing.assert_allclose(g.values, [1.0, 2.0], atol=1e-14)
        assert not g.singular

    def test_random_pd_residual(self):
        rng = np.random.default_rng(1)
        for n in (2, 3, 4, 6):
            a = random_hermitian(rng, n, psd=True)
            b = random_hermitian(rng, n, psd=True) + 0.1 * np.eye(n)
            g = gen_herm_eig(a, b)
            assert len(g.values) == n
            scale = 1 + np.linalg.norm(a) + np.linalg.norm(b)
            for lam, v in zip(g.values, g.vectors.T):
                assert abs(np.linalg.norm(v) - 1) < 1e-12
                assert np.linalg.norm(a @ v - lam * b @ v) <= 1e-8 * scale

    def test_scaling_b(self):
        rng = np.random.default_rng(2)
        a = random_hermitian(rng, 3, psd=True)
        b = random_hermitian(rng, 3, psd=True) + np.eye(3)
        g1, g2 = gen_herm_eig(a, b), gen_herm_eig(a, 4.0 * b)
        np.testing.assert_allclose(g2.values, g1.values / 4.0, rtol=1e-10)
        for v1, v2 in zip(g1.vectors.T, g2.vectors.T):
            assert abs(abs(np.vdot(v1, v2)) - 1) < 1e-8

    def test_singular_b_deflation(self):
        # B = e1 e1^H: the e2 direction has an infinite eigenvalue
        a = np.array([[2.0, 0.5], [0.5, 3.0]])
        b = np.diag([1.0, 0.0])
        g = gen_herm_eig(a, b)
        assert g.singular
        assert len(g.values) == 1
        # finite eigenvalue = Schur complement a11 - a12^2 / a22
        assert g.values[0] == pytest.approx(2.0 - 0.25 / 3.0, rel=1e-12)
        v = g.vectors[:, 0]
        assert np.linalg.norm(a @ v - g.values[0] * b @ v) <= 1e-10
        inf = g.infinite_vectors[:, 0]
        assert np.linalg.norm(b @ inf) <= 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            gen_herm_eig(np.eye(2), np.eye(3))


class TestPsdProject:
    def test_psd_unchanged(self):
        rng = np.random.default_rng(3)
        a = random_hermitian(rng, 4, psd=True)
        assert np.linalg.norm(psd_project(a) - a) <= 1e-12 * np.linalg.norm(a)

    def test_diag(self):
        np.testing.assert_allclose(psd_project(np.diag([1.0, -1.0])), np.diag([1.0, 0.0]), atol=1e-15)

    def test_nearest_point_sampled(self):
        rng = np.random.default_rng(4)
        s = random_hermitian(rng, 3)
        p = psd_project(s)
        d = np.linalg.norm(s - p)
        for _ in range(1000):
            x = random_hermitian(rng, 3, psd=True) * rng.uniform(0, 1)
            assert d <= np.linalg.norm(s - x) + 1e-12
        assert np.linalg.eigvalsh(p).min() >= -1e-12


class TestEmbedding:
    def test_imaginary_unit(self):
        np.testing.assert_array_equal(real_embed_matrix([[1j]]), [[0, -1], [1, 0]])

    def test_real_block_diagonal(self):
        h = np.array([[1.0, 2.0], [3.0, 4.0]])
        e = real_embed_matrix(h)
        np.testing.assert_array_equal(e[:2, 2:], 0)
        np.testing.assert_array_equal(e[2:, :2], 0)
        np.testing.assert_array_equal(e[:2, :2], h)

    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31))
    def test_isometry(self, k, n, seed):
        rng = np.random.default_rng(seed)
        h = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
        s = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lhs = np.linalg.norm(real_embed_matrix(h) @ real_embed_vector(s))
        assert lhs == pytest.approx(np.linalg.norm(h @ s), rel=1e-12)

    def test_homomorphism_and_unembed(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        b = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
        np.testing.assert_allclose(real_embed_matrix(a @ b), real_embed_matrix(a) @ real_embed_matrix(b), atol=1e-13)
        np.testing.assert_allclose(unembed_matrix(real_embed_matrix(b)), b, atol=0)


def test_canonical_phase():
    w = np.array([0.0, -1j, 1.0])
    c = canonical_phase(w)
    assert c[0] == 0 and c[1].imag == 0 and c[1].real > 0
    assert np.linalg.norm(c) == pytest.approx(np.linalg.norm(w))
    assert canonical_phase(np.zeros(2)).tolist() == [0, 0]
    z = np.exp(0.7j) * np.array([0.6, 0.8j])
    np.testing.assert_allclose(canonical_phase(z), [0.6, 0.8j], atol=1e-15)
