import unittest

import numpy as np

from plcauchy import DegenerateEllipticityError, GradientField, HalfPlaneGrid
from plcauchy.quasiregular import (analyze_field, b_from_field, beltrami, beltrami_to_matrix, dilatation,
                                   ellipticity_bound, ellipticity_eigenvalues, multiplier_to_matrix,
                                   wirtinger)


class TestBeltrami(unittest.TestCase):
    """测试 Wirtinger 导数与伸缩商"""

    def setUp(self):
        self.grid = HalfPlaneGrid.build(N=64, L=8.0, t1=0.1, tmax=3.0, layers=60, spacing="uniform")
        self.a = 2 * np.pi / 8.0

    def _holomorphic(self):
        a = self.a
        return GradientField.from_function(self.grid, lambda X, T: np.exp(1j * a * X - a * T))

    def _quasiregular(self, k):
        """g + k·conj(g)，g 全纯，|μ| ≡ k"""
        g = self._holomorphic().values
        return GradientField(self.grid, g + k * np.conj(g))

    def test_holomorphic_field(self):
        f = self._holomorphic()
        dz, dzbar = wirtinger(f)
        self.assertEqual(dz.shape, (self.grid.K - 2, self.grid.N))
        self.assertLess(float(np.max(np.abs(dzbar)) / np.max(np.abs(dz))), 1e-3)
        bf = beltrami(f)
        self.assertLess(bf.k_sup, 1e-3)
        self.assertEqual(bf.warnings, [])
        self.assertAlmostEqual(dilatation(f), 1.0, delta=1e-2)

    def test_known_quasiregular_map(self):
        k = 0.3
        f = self._quasiregular(k)
        bf = beltrami(f)
        self.assertAlmostEqual(bf.k_sup, k, delta=1e-3)
        self.assertAlmostEqual(bf.k_p999, k, delta=1e-3)
        self.assertEqual(bf.flagged_fraction, 0.0)
        self.assertAlmostEqual(dilatation(f), (1 + k * k) / (1 - k * k), delta=1e-2)

    def test_orientation_violation(self):
        f = GradientField(self.grid, np.conj(self._holomorphic().values))
        stats = analyze_field(f)
        self.assertEqual(stats["K_est"], float("inf"))
        self.assertGreater(stats["orientation_violations"], 0)
        self.assertTrue(any(w.startswith("orientation violation") for w in stats["warnings"]))
        self.assertGreaterEqual(stats["mu_max"], 1.0)

    def test_zero_field_is_flagged(self):
        stats = analyze_field(GradientField.zeros(self.grid))
        self.assertEqual(stats["mu_max"], 0.0)
        self.assertEqual(stats["K_est"], 1.0)

    def test_multiplier_of_holomorphic_field(self):
        """f = e^{iaz}：−∂ₜf / Df = 1"""
        b = b_from_field(self._holomorphic())
        self.assertFalse(np.any(b.flagged))
        np.testing.assert_allclose(b.values, 1.0, atol=1e-3)
        self.assertEqual(b.to_matrix().shape, b.values.shape + (2, 2))


class TestEllipticity(unittest.TestCase):
    """测试 A_μ 与乘子矩阵"""

    def setUp(self):
        rng = np.random.default_rng(11)
        radius = rng.uniform(0.0, 0.95, size=200)
        self.mu = radius * np.exp(1j * rng.uniform(0.0, 2 * np.pi, size=200))

    def test_unit_determinant(self):
        A = beltrami_to_matrix(self.mu)
        np.testing.assert_allclose(np.linalg.det(A), 1.0, rtol=1e-10)
        np.testing.assert_allclose(A[..., 0, 1], A[..., 1, 0])

    def test_eigenvalues(self):
        lam_plus, lam_minus = ellipticity_eigenvalues(self.mu)
        expected = np.linalg.eigvalsh(beltrami_to_matrix(self.mu))
        np.testing.assert_allclose(lam_minus, expected[:, 0], rtol=1e-8)
        np.testing.assert_allclose(lam_plus, expected[:, 1], rtol=1e-8)
        np.testing.assert_allclose(lam_plus * lam_minus, 1.0, rtol=1e-10)

    def test_bound(self):
        self.assertEqual(ellipticity_bound(0.0), 1.0)
        lam_plus, _ = ellipticity_eigenvalues(self.mu)
        self.assertLessEqual(float(np.max(lam_plus)), ellipticity_bound(0.95) * (1 + 1e-12))
        with self.assertRaises(DegenerateEllipticityError):
            ellipticity_bound(1.0)

    def test_degenerate(self):
        with self.assertRaises(DegenerateEllipticityError):
            beltrami_to_matrix(np.array([0.2, 1.0]))
        with self.assertRaises(DegenerateEllipticityError):
            ellipticity_eigenvalues(1.5j)

    def test_multiplier_matrix(self):
        b, v = 0.7 - 1.3j, 2.0 + 0.5j
        out = multiplier_to_matrix(b) @ np.array([v.real, v.imag])
        self.assertAlmostEqual(complex(out[0], out[1]), b * v, places=14)


if __name__ == '__main__':
    unittest.main()
