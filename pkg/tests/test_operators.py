import unittest

import numpy as np
from scipy import fft, integrate, special

from plcauchy import BoundaryTrace, ConfigurationError, GradientField, HalfPlaneGrid, LipschitzGraph
from plcauchy.grid import d_operator, d_values, layer_integral, sobolev_norm, trace_limit
from plcauchy.operators import QuadratureBackend, SpectralBackend, make_backend
from plcauchy.operators.kernels import (cot_kernel, cot_remainder, csc2_kernel, csc2_remainder,
                                        parallelogram_vertices, polygon_inverse_integral)


def _rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def _single_frequency_oracle(t, a, lo, hi):
    """h = e^{iax}·1_{[lo, hi]}(s) 时 (S̃h, Sh) 在高度 t 处的 e^{iax} 系数，s 方向用 quad 积分"""
    lam = abs(a)
    if a > 0:
        upper = min(hi, t)
        part = integrate.quad(lambda s: np.exp(-lam * (t - s)), lo, upper)[0] if upper > lo else 0.0
        return part, lam * part
    lower = max(lo, t)
    part = integrate.quad(lambda s: np.exp(-lam * (s - t)), lower, hi)[0] if hi > lower else 0.0
    return -part, lam * part


class TestKernels(unittest.TestCase):
    """测试核函数的局部积分"""

    def test_remainders(self):
        L = 16.0
        w = np.array([0.3 + 0.2j, -1.1 + 0.5j, 2.0 - 0.1j])
        np.testing.assert_allclose(cot_remainder(w, L), cot_kernel(w, L) - 1 / w, atol=1e-12)
        np.testing.assert_allclose(csc2_remainder(w, L), csc2_kernel(w, L) - 1 / w ** 2, atol=1e-12)
        self.assertAlmostEqual(abs(cot_remainder(1e-9, L)), 0.0, places=9)
        self.assertAlmostEqual(complex(csc2_remainder(0.0, L)).real, (np.pi / L) ** 2 / 3, places=14)

    def test_polygon_inverse_integral(self):
        """不含原点的方块：与中点公式比较"""
        vertices = parallelogram_vertices(2.0 + 1.0j, 0.5, -0.5, 0.5)
        exact = complex(polygon_inverse_integral(vertices))
        s = (np.arange(400) + 0.5) / 400 - 0.5
        X, Y = np.meshgrid(2.0 + s, 1.0 + s)
        approx = np.sum(1.0 / (X + 1j * Y)) / 400 ** 2
        self.assertAlmostEqual(exact, approx, places=5)

    def test_polygon_inverse_integral_singular(self):
        """以原点为中心的方块，1/w 的积分按对称性为 0"""
        vertices = parallelogram_vertices(0.0, 0.5, -0.5, 0.5)
        self.assertAlmostEqual(abs(complex(polygon_inverse_integral(vertices))), 0.0, places=12)


class TestSpectralBackend(unittest.TestCase):
    """测试平坦边界的傅里叶后端"""

    def setUp(self):
        self.backend = SpectralBackend(LipschitzGraph.flat())
        self.grid = HalfPlaneGrid.build(N=256, L=32.0, t1=1e-4, tmax=40.0, layers=32)
        x = self.grid.x
        self.g = BoundaryTrace(self.grid, -2 * x * np.exp(-x ** 2) * (1.0 + 0.5j))

    def test_hardy_split_and_idempotence(self):
        plus = self.backend.hardy_projection(self.g, 1)
        minus = self.backend.hardy_projection(self.g, -1)
        np.testing.assert_allclose(plus.values + minus.values, self.g.values, atol=1e-12)
        np.testing.assert_allclose(self.backend.hardy_projection(plus, 1).values, plus.values, atol=1e-12)
        np.testing.assert_allclose(self.backend.hardy_projection(plus, -1).values, 0.0, atol=1e-12)

    def test_jump_relation(self):
        plus = self.backend.hardy_projection(self.g, 1)
        limit = trace_limit(self.backend.boundary_cauchy_field(self.g))
        self.assertLess(_rel(limit.values, plus.values), 1e-4)

    def test_boundary_cauchy_oracle(self):
        field = self.backend.boundary_cauchy_field(self.g)
        xi = self.grid.xi
        oracle = fft.ifft(np.exp(-self.grid.t[:, None] * np.abs(xi)) * (xi > 0) * fft.fft(self.g.values),
                          axis=-1)
        np.testing.assert_allclose(field.values, oracle, atol=1e-12)
        below = self.backend.boundary_cauchy(self.g, -0.5)
        expected = -fft.ifft(np.exp(-0.5 * np.abs(xi)) * (xi < 0) * fft.fft(self.g.values))
        np.testing.assert_allclose(below.values, expected, atol=1e-12)
        with self.assertRaises(ConfigurationError):
            self.backend.boundary_cauchy(self.g, 0.0)

    def test_semigroup(self):
        for t, s in ((0.1, 0.4), (1.0, 2.5), (1e-3, 7.0)):
            twice = self.backend.boundary_cauchy(self.backend.boundary_cauchy(self.g, t), s)
            once = self.backend.boundary_cauchy(self.g, t + s)
            np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_sobolev_non_increasing_in_t(self):
        field = self.backend.boundary_cauchy_field(self.g)
        for sigma in (0.0, 0.25, 0.5, 1.0):
            norms = [sobolev_norm(field.layer(k), sigma) for k in range(self.grid.K)]
            self.assertTrue(all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:])))
            self.assertLessEqual(norms[0], sobolev_norm(self.g, sigma) * (1 + 1e-12))

    def _check_single_frequency(self, backend):
        grid = HalfPlaneGrid.build(N=64, L=8.0, t1=0.05, tmax=4.0, layers=12)
        edges = grid.cell_edges
        lo, hi = edges[3], edges[8]
        profile = ((grid.t >= edges[3]) & (grid.t < edges[8])).astype(float)
        for a in (2 * np.pi * 3 / grid.L, -2 * np.pi * 3 / grid.L):
            wave = np.exp(1j * a * grid.x)
            h = GradientField(grid, profile[:, None] * wave[None, :])
            oracle = np.array([_single_frequency_oracle(t, a, lo, hi) for t in grid.t])
            solid = backend.solid_cauchy(h).values
            beurling = backend.beurling(h).values
            np.testing.assert_allclose(solid, oracle[:, 0, None] * wave[None, :], atol=1e-5)
            np.testing.assert_allclose(beurling, oracle[:, 1, None] * wave[None, :], atol=1e-5)

    def test_single_frequency_oracle(self):
        """单频源在 s 方向的核积分与 quad 比较"""
        self._check_single_frequency(self.backend)
        self._check_single_frequency(QuadratureBackend(LipschitzGraph.flat(), max_workers=2))

    def test_beurling_is_d_of_solid(self):
        h = GradientField.from_function(self.grid, lambda X, T: np.exp(-X ** 2 - T) * (1.0 + 0.3j * X))
        expected = d_operator(self.backend.solid_cauchy(h)).values
        self.assertLess(_rel(self.backend.beurling(h).values, expected), 1e-10)

    def test_square_function_identity(self):
        grid = HalfPlaneGrid.build(N=256, L=32.0, t1=1e-4, tmax=400.0, layers=128)
        x = grid.x
        plus = self.backend.hardy_projection(BoundaryTrace(grid, -2 * x * np.exp(-x ** 2)), 1)
        for sigma in (0.25, 0.5, 0.75):
            du = d_values(self.backend.boundary_cauchy_field(plus).values, grid)
            lhs = layer_integral(grid.dx * np.sum(np.abs(du) ** 2, axis=-1), grid, sigma)
            rhs = 2.0 ** (2 * sigma - 2) * special.gamma(2 - 2 * sigma) * sobolev_norm(plus, sigma) ** 2
            self.assertLess(abs(lhs - rhs) / rhs, 1e-2)

    def test_solid_cauchy_closed_form(self):
        """正频、t 方向为常数的源：S̃h = (1 − e^{−tξ})/ξ · ĥ，即 ∂ₜu + Du = h"""
        plus = self.backend.hardy_projection(self.g, 1)
        h = GradientField(self.grid, np.broadcast_to(plus.values, (self.grid.K, self.grid.N)))
        out = self.backend.solid_cauchy(h)
        xi = self.grid.xi
        safe = np.where(xi > 0, xi, 1.0)
        mult = np.where(xi > 0, -np.expm1(-self.grid.t[:, None] * safe) / safe, 0.0)
        expected = fft.ifft(mult * fft.fft(plus.values)[None, :], axis=-1)
        np.testing.assert_allclose(out.values, expected, atol=1e-10)

    def test_weighted_norm_estimate(self):
        """σ = ½ 时平坦边界上 ‖S‖ = 1"""
        grid = HalfPlaneGrid.build(N=64, L=16.0, t1=1e-3, tmax=16.0, layers=48)
        estimate = self.backend.estimate_weighted_norm(grid, iterations=30)
        self.assertGreater(estimate, 0.8)
        self.assertLess(estimate, 1.1)

    def test_truncation_warning_once(self):
        h = GradientField.from_function(self.grid, lambda X, T: np.exp(-X ** 2) + 0 * T)
        first = self.backend.solid_cauchy(h)
        self.backend.beurling(h)
        self.assertEqual(len(self.backend.warnings), 1)
        self.assertTrue(first.warnings[0].startswith("truncation:"))

    def test_requires_flat_graph(self):
        bump = LipschitzGraph(kind="closed_form", lipschitz_bound=0.18, expr="0.2*exp(-x**2)")
        with self.assertRaises(ConfigurationError):
            SpectralBackend(bump)
        with self.assertRaises(ConfigurationError):
            make_backend("chebyshev", LipschitzGraph.flat())
        self.assertIsInstance(make_backend("spectral-flat", LipschitzGraph.flat()), SpectralBackend)


class TestQuadratureBackend(unittest.TestCase):
    """测试直接求积后端；平坦边界上与傅里叶后端比较"""

    def setUp(self):
        self.graph = LipschitzGraph.flat()
        self.quadrature = QuadratureBackend(self.graph, max_workers=2)
        self.spectral = SpectralBackend(self.graph)
        self.grid = HalfPlaneGrid.build(N=128, L=16.0, t1=0.05, tmax=8.0, layers=8)
        x = self.grid.x
        self.g = BoundaryTrace(self.grid, -2 * x * np.exp(-x ** 2))
        self.bump = LipschitzGraph(kind="closed_form", lipschitz_bound=0.18,
                                   expr="0.2*exp(-x**2)", dexpr="-0.4*x*exp(-x**2)")

    def _holomorphic_above(self, z):
        """F(z) = (π/L)cot(π(z − z₀)/L) + iπ/L，极点 z₀ = −i 在曲线下方，t → +∞ 时趋于 0"""
        L = self.grid.L
        return cot_kernel(z + 1j, L) + 1j * np.pi / L

    def test_plemelj_projection(self):
        plus = self.quadrature.hardy_projection(self.g, 1)
        minus = self.quadrature.hardy_projection(self.g, -1)
        np.testing.assert_allclose(plus.values + minus.values, self.g.values, atol=1e-12)
        again = self.quadrature.hardy_projection(plus, 1)
        self.assertLess(_rel(again.values, plus.values), 1e-8)
        reference = self.spectral.hardy_projection(self.g, 1)
        self.assertLess(_rel(plus.values, reference.values), 1e-8)

    def test_boundary_cauchy_matches_spectral(self):
        q = self.quadrature.boundary_cauchy_field(self.g).values
        s = self.spectral.boundary_cauchy_field(self.g).values
        self.assertLess(_rel(q, s), 1e-10)
        for t in (0.5, -0.5):
            np.testing.assert_allclose(self.quadrature.boundary_cauchy(self.g, t).values,
                                       self.spectral.boundary_cauchy(self.g, t).values, atol=1e-6)

    def test_solid_operators_match_spectral(self):
        h = GradientField.from_function(self.grid, lambda X, T: np.exp(-X ** 2 - T) * (1.0 + 0.3j * X))
        self.assertLess(_rel(self.quadrature.solid_cauchy(h).values, self.spectral.solid_cauchy(h).values),
                        1e-10)
        self.assertLess(_rel(self.quadrature.beurling(h).values, self.spectral.beurling(h).values), 1e-10)

    def test_jump_relation(self):
        grid = HalfPlaneGrid.build(N=128, L=16.0, t1=1e-4, tmax=8.0, layers=16)
        x = grid.x
        g = BoundaryTrace(grid, -2 * x * np.exp(-x ** 2) * (1.0 + 0.5j))
        plus = self.quadrature.hardy_projection(g, 1)
        limit = trace_limit(self.quadrature.boundary_cauchy_field(g))
        self.assertLess(_rel(limit.values, plus.values), 1e-4)

    def test_thread_count_does_not_change_result(self):
        h = GradientField.from_function(self.grid, lambda X, T: np.exp(-X ** 2 - T))
        serial = QuadratureBackend(self.graph, max_workers=1).solid_cauchy(h).values
        np.testing.assert_array_equal(serial, self.quadrature.solid_cauchy(h).values)

    def test_curved_graph(self):
        """Ẽ⁺ + Ẽ⁻ 为去掉 ζ-均值 (1/L)∫g dζ 的恒等"""
        backend = QuadratureBackend(self.bump)
        plus = backend.hardy_projection(self.g, 1)
        minus = backend.hardy_projection(self.g, -1)
        c = backend.geometry(self.grid)["c"]
        np.testing.assert_allclose(plus.values + minus.values, self.g.values - np.mean(self.g.values * c),
                                   atol=1e-12)
        self.assertLess(_rel(backend.hardy_projection(plus, 1).values, plus.values), 1e-3)
        self.assertLess(float(np.max(np.abs(backend.hardy_projection(plus, -1).values))),
                        1e-3 * float(np.max(np.abs(plus.values))))

    def test_curved_holomorphic_trace(self):
        """曲线上方全纯、上方衰减的周期函数：Ẽ⁺ 不变、Ẽ⁻ 消去，S₀ 给出它在 ζ + it 处的值"""
        backend = QuadratureBackend(self.bump, max_workers=2)
        zeta = backend.geometry(self.grid)["zeta"]
        g = BoundaryTrace(self.grid, self._holomorphic_above(zeta), project_mean=False)
        scale = float(np.max(np.abs(g.values)))
        plus = backend.hardy_projection(g, 1)
        minus = backend.hardy_projection(g, -1)
        self.assertLess(float(np.max(np.abs(plus.values - g.values))), 1e-4 * scale)
        self.assertLess(float(np.max(np.abs(minus.values))), 1e-4 * scale)
        field = backend.boundary_cauchy_field(g).values
        expected = self._holomorphic_above(zeta[None, :] + 1j * self.grid.t[:, None])
        self.assertLess(_rel(field, expected), 1e-2)
        below = backend.boundary_cauchy(g, -0.5).values
        self.assertLess(float(np.max(np.abs(below))), 1e-2 * scale)


if __name__ == '__main__':
    unittest.main()
