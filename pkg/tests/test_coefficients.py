import unittest

import numpy as np

from plcauchy import ConfigurationError
from plcauchy.coefficients import (QuasilinearSymbol, accretivity_kappa, apply_matrix, b_general,
                                   b_plaplace, b_zero, b_zero_inverse, check_coefficients,
                                   closeness_to_b0, coefficient_bound, spectral_norm_2x2)
from plcauchy.errors import InvariantViolation


class TestCoefficients(unittest.TestCase):
    """测试系数矩阵 B(f)"""

    def setUp(self):
        rng = np.random.default_rng(7)
        self.f = rng.normal(size=500) + 1j * rng.normal(size=500)
        self.d = rng.uniform(-1.0, 1.0, size=500)

    def test_b_zero_inverse(self):
        prod = np.einsum("nij,njk->nik", b_zero(self.d), b_zero_inverse(self.d))
        np.testing.assert_allclose(prod, np.broadcast_to(np.eye(2), prod.shape), atol=1e-14)

    def test_b_zero_acts_as_complex_division(self):
        v = self.f
        np.testing.assert_allclose(apply_matrix(b_zero(self.d), v), v / (1 + 1j * self.d), atol=1e-14)

    def test_p2_is_exactly_b_zero(self):
        np.testing.assert_array_equal(b_plaplace(2.0, self.f, self.d), b_zero(self.d))

    def test_flat_real_direction(self):
        """f = 1, φ′ = 0 时 B = diag(1, p−1)"""
        np.testing.assert_allclose(b_plaplace(3.0, 1.0, 0.0), [[1.0, 0.0], [0.0, 2.0]])

    def test_homogeneous_of_degree_zero(self):
        for p in (1.5, 2.5, 4.0):
            np.testing.assert_allclose(b_plaplace(p, 3.7 * self.f, self.d), b_plaplace(p, self.f, self.d),
                                       rtol=1e-12, atol=1e-14)

    def test_general_symbol_matches_plaplace(self):
        for p in (1.5, 2.3, 3.5):
            analytic = QuasilinearSymbol.plaplace(p, analytic=True)
            np.testing.assert_allclose(b_general(analytic, self.f, self.d), b_plaplace(p, self.f, self.d),
                                       atol=1e-12)
            numeric = QuasilinearSymbol.plaplace(p, analytic=False)
            np.testing.assert_allclose(b_general(numeric, self.f, self.d), b_plaplace(p, self.f, self.d),
                                       atol=1e-6)

    def test_zero_gradient_falls_back(self):
        f = np.array([0.0, 1e-20, 1.0 + 1.0j])
        d = np.array([0.3, -0.2, 0.1])
        B = b_plaplace(3.0, f, d, eps_zero=1e-12)
        np.testing.assert_array_equal(B[:2], b_zero(d[:2]))

    def test_accretive(self):
        for p in (1.2, 1.5, 2.0, 3.0, 6.0):
            kappa = accretivity_kappa(b_plaplace(p, self.f, self.d))
            self.assertGreater(float(np.min(kappa)), 0.0)

    def test_kappa_flat_closed_form(self):
        """φ′ = 0 时单位圆上 κ 的最小值为 min(p−1, 1/(p−1))，在 f = 1 或 f = i 处取到"""
        f = np.exp(1j * np.linspace(0.0, 2 * np.pi, 4001))
        for p, expected in ((1.5, 0.5), (3.0, 0.5), (2.1, 1.0 / 1.1), (5.0, 0.25)):
            kappa = accretivity_kappa(b_plaplace(p, f, 0.0))
            self.assertAlmostEqual(float(np.min(kappa)), expected, places=8)
            self.assertLessEqual(float(np.max(kappa)), 1.0 + 1e-12)

    def test_closeness_grows_with_p(self):
        self.assertEqual(closeness_to_b0(2.0, 0.5, 256), 0.0)
        values = [closeness_to_b0(p, 0.5, 1024) for p in (2.05, 2.1, 2.2, 2.4)]
        self.assertTrue(all(b > a for a, b in zip(values, values[1:])))
        self.assertLess(values[0], 0.2)

    def test_coefficient_bound(self):
        bound = coefficient_bound(3.0, 0.0)
        f = np.exp(1j * np.linspace(0.0, 2 * np.pi, 4096, endpoint=False))[::64]
        check_coefficients(b_plaplace(3.0, f, 0.0), bound)
        with self.assertRaises(InvariantViolation):
            check_coefficients(b_plaplace(3.0, f, 0.0), 0.5 * bound)
        with self.assertRaises(InvariantViolation):
            check_coefficients(np.full((2, 2), np.nan))

    def test_spectral_norm(self):
        rng = np.random.default_rng(3)
        B = rng.normal(size=(20, 2, 2))
        expected = [np.linalg.norm(m, 2) for m in B]
        np.testing.assert_allclose(spectral_norm_2x2(B), expected, rtol=1e-12)

    def test_apply_matrix(self):
        B = np.array([[1.0, 2.0], [3.0, 4.0]])
        self.assertEqual(apply_matrix(B, 1.0 + 1.0j), 3.0 + 7.0j)

    def test_invalid_p(self):
        with self.assertRaises(ConfigurationError):
            b_plaplace(1.0, self.f, self.d)


class TestQuasilinearSymbol(unittest.TestCase):
    """测试一般通量的结构检查"""

    def test_plaplace_structure(self):
        for p in (1.5, 2.0, 3.0):
            QuasilinearSymbol.plaplace(p).check_structure(samples=2000)

    def test_expression_symbol(self):
        symbol = QuasilinearSymbol.from_expressions("1.2*z1 + 0.1*z2", "0.1*z1 + z2", p=2.0, nu=0.9, L=2.6,
                                                    j11="1.2", j12="0.1", j21="0.1", j22="1.0")
        symbol.check_structure(samples=2000)
        B = b_general(symbol, np.array([1.0 + 0.5j]), np.array([0.0]))
        np.testing.assert_allclose(B[0], [[1.0, 0.0], [0.2, 1.2]], atol=1e-12)

    def test_ellipticity_violation(self):
        symbol = QuasilinearSymbol.from_expressions("z1", "z2", p=2.0, nu=2.0, L=3.0)
        with self.assertRaises(ConfigurationError):
            symbol.check_structure(samples=500)

    def test_partial_jacobian_rejected(self):
        with self.assertRaises(ConfigurationError):
            QuasilinearSymbol.from_expressions("z1", "z2", p=2.0, nu=1.0, L=2.0, j11="1")


if __name__ == '__main__':
    unittest.main()
