import unittest

import numpy as np

from plcauchy import ConfigurationError, LipschitzGraph, PointOutsideDomainError
from plcauchy.geometry import (check_lipschitz, eval_phi, eval_phi_prime, pullback, pullback_point,
                               pushforward, pushforward_point)


class TestLipschitzGraph(unittest.TestCase):
    """测试边界曲线与拉回坐标"""

    def setUp(self):
        self.tent = LipschitzGraph(kind="piecewise_linear", lipschitz_bound=1.0,
                                   knots=((-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)))
        self.bump = LipschitzGraph(kind="closed_form", lipschitz_bound=0.18,
                                   expr="0.2*exp(-x**2)", dexpr="-0.4*x*exp(-x**2)")

    def test_flat(self):
        graph = LipschitzGraph.flat()
        x = np.linspace(-3, 3, 7)
        np.testing.assert_array_equal(eval_phi(graph, x), 0.0)
        np.testing.assert_array_equal(eval_phi_prime(graph, x), 0.0)
        self.assertTrue(graph.is_flat)
        self.assertEqual(check_lipschitz(graph, samples=1000), 0.0)

    def test_piecewise_linear_values(self):
        self.assertAlmostEqual(eval_phi(self.tent, 0.5), 0.5)
        # 节点范围外常数延拓
        self.assertEqual(eval_phi(self.tent, 5.0), 0.0)
        self.assertEqual(eval_phi(self.tent, -5.0), 0.0)

    def test_piecewise_linear_slope_at_knot(self):
        """节点处取左侧线段的斜率"""
        self.assertEqual(eval_phi_prime(self.tent, 0.0), 1.0)
        self.assertEqual(eval_phi_prime(self.tent, 0.5), -1.0)
        self.assertEqual(eval_phi_prime(self.tent, -0.5), 1.0)
        self.assertEqual(eval_phi_prime(self.tent, 3.0), 0.0)

    def test_closed_form_derivative_without_dexpr(self):
        graph = LipschitzGraph(kind="closed_form", lipschitz_bound=0.18, expr="0.2*exp(-x**2)")
        x = np.linspace(-3, 3, 31)
        np.testing.assert_allclose(eval_phi_prime(graph, x), eval_phi_prime(self.bump, x), atol=1e-8)

    def test_round_trip(self):
        x = np.linspace(-2, 2, 9)
        t = np.linspace(0.1, 1.0, 9)
        xs, ys = pushforward(self.bump, x, t)
        xb, tb = pullback(self.bump, xs, ys)
        np.testing.assert_allclose(tb, t, atol=1e-15)
        np.testing.assert_array_equal(xb, x)
        self.assertEqual(pullback_point(self.bump, *pushforward_point(self.bump, 0.3, 0.7))[0], 0.3)

    def test_point_below_graph(self):
        with self.assertRaises(PointOutsideDomainError):
            pullback_point(self.tent, 0.0, 1.0)
        with self.assertRaises(ConfigurationError):
            pullback_point(LipschitzGraph.flat(), 0.0, -1.0)

    def test_lipschitz_check(self):
        sup = check_lipschitz(self.bump, samples=20_001)
        self.assertLessEqual(sup, 0.18)
        loose = LipschitzGraph(kind="piecewise_linear", lipschitz_bound=0.5, knots=self.tent.knots)
        with self.assertRaises(ConfigurationError):
            check_lipschitz(loose, samples=1001)

    def test_invalid_config(self):
        with self.assertRaises(ConfigurationError):
            LipschitzGraph(kind="spline")
        with self.assertRaises(ConfigurationError):
            LipschitzGraph(kind="flat", lipschitz_bound=1.0)
        with self.assertRaises(ConfigurationError):
            LipschitzGraph(kind="piecewise_linear", lipschitz_bound=1.0, knots=((0.0, 0.0),))
        with self.assertRaises(ConfigurationError):
            LipschitzGraph.from_dict({"kind": "flat", "slope": 1})

    def test_dict_round_trip(self):
        data = self.tent.to_dict()
        self.assertEqual(LipschitzGraph.from_dict(data), self.tent)


if __name__ == '__main__':
    unittest.main()
