import unittest

import numpy as np

from plcauchy import ConfigurationError, GradientField, HalfPlaneGrid, LipschitzGraph, SolverError
from plcauchy.verification import (BumpField, Case, CaseRunner, bench_grid, default_family, exact_fundamental,
                                   exact_logarithmic, interior_error, stress_family, suite_cases, trace_bench)
from plcauchy.verification.suites import HANDLERS, SUITES


class TestCaseIdentity(unittest.TestCase):
    """测试用例标识"""

    def test_case_id_is_deterministic(self):
        a = Case("round_trip", {"p": 2.2, "exact": "fundamental"})
        b = Case("round_trip", {"exact": "fundamental", "p": 2.2})
        self.assertEqual(a.case_id, b.case_id)
        self.assertTrue(a.case_id.startswith("round_trip-"))
        self.assertNotEqual(a.case_id, Case("round_trip", {"p": 2.3, "exact": "fundamental"}).case_id)

    def test_from_dict(self):
        case = Case("trace_bench", {"sigma": 0.5})
        self.assertEqual(Case.from_dict(case.to_dict()).case_id, case.case_id)
        data = case.to_dict()
        data["case_id"] = "trace_bench-000000000000"
        with self.assertRaises(ValueError):
            Case.from_dict(data)


class TestCaseRunner(unittest.TestCase):
    """测试用例分派与并行执行"""

    def setUp(self):
        self.runner = CaseRunner(max_workers=3)
        self.completed = []
        self.runner.register_case("square", self._square, result_callback=self._on_result)
        self.runner.register_case("boom", self._boom)

    def _square(self, params):
        value = params["x"] ** 2
        return {"value": value, "passed": value < 50}

    def _boom(self, params):
        raise SolverError("diverged", report={"status": "contraction-failure"})

    def _on_result(self, case, result):
        self.completed.append(case.case_id)

    def test_order_and_status(self):
        cases = [Case("square", {"x": x}) for x in range(10)]
        results = self.runner.run(cases)
        self.assertEqual(list(results), [c.case_id for c in cases])
        statuses = [r.status for r in results.values()]
        self.assertEqual(statuses, ["passed"] * 8 + ["failed"] * 2)
        self.assertEqual(sorted(self.completed), sorted(c.case_id for c in cases))

    def test_errors_are_captured(self):
        results = self.runner.run([Case("boom"), Case("missing", {"x": 1})])
        boom, missing = results.values()
        self.assertEqual(boom.status, "error")
        self.assertTrue(boom.error.startswith("SolverError"))
        self.assertEqual(boom.metrics["report"]["status"], "contraction-failure")
        self.assertEqual(missing.status, "error")
        self.assertIn("error", missing.to_dict())

    def test_duplicate_ids_rejected(self):
        with self.assertRaises(ValueError):
            self.runner.run([Case("square", {"x": 1}), Case("square", {"x": 1})])


class TestExactSolutions(unittest.TestCase):
    """测试精确解语料"""

    def setUp(self):
        self.grid = HalfPlaneGrid.build(N=128, L=16.0, t1=1e-2, tmax=8.0, layers=16)

    def test_fundamental_passes_gate(self):
        sol = exact_fundamental(3.0)
        self.assertTrue(sol.valid_for(3.0))
        self.assertFalse(sol.valid_for(2.5))
        self.assertLessEqual(sol.residual_gate(3.0), 1e-5)
        with self.assertRaises(ConfigurationError):
            sol.residual_gate(4.0)

    def test_gate_on_diagonal(self):
        """对角点上 ∂ₓaₓ 与 ∂_y a_y 都为零，残差仍按 |a|/ρ 归一"""
        sol = exact_fundamental(3.0, gate=False)
        for x, y in ((2.0, 1.0), (-2.0, 1.0), (0.0, 0.5)):
            self.assertLess(sol.divergence_residual(x, y, 3.0, 1e-4), 1e-5)
            self.assertGreater(sol.divergence_residual(x, y, 4.0, 1e-4), 0.1)
        self.assertLessEqual(exact_fundamental(2.2).residual_gate(2.2), 1e-5)

    def test_fundamental_rejects_p2_and_bad_pole(self):
        with self.assertRaises(ConfigurationError):
            exact_fundamental(2.0)
        with self.assertRaises(ConfigurationError):
            exact_fundamental(3.0, pole=(0.0, 0.5))
        bump = LipschitzGraph(kind="closed_form", lipschitz_bound=0.18, expr="0.2*exp(-x**2)")
        with self.assertRaises(ConfigurationError):
            exact_logarithmic(pole=(0.0, 0.5), graph=bump)

    def test_logarithmic_is_inverse(self):
        """f = 1/(z − z₀)"""
        sol = exact_logarithmic(pole=(0.5, -1.0))
        X, T = self.grid.mesh()
        f = sol.sample(self.grid)
        np.testing.assert_allclose(f.values, 1.0 / (X - 0.5 + 1j * (T + 1.0)), rtol=1e-12)
        h = sol.boundary_data(self.grid, component="d_y")
        self.assertEqual(h.values.shape, (self.grid.N,))
        with self.assertRaises(ConfigurationError):
            sol.boundary_data(self.grid, component="d_n")

    def test_interior_error(self):
        f = exact_logarithmic().sample(self.grid)
        self.assertEqual(interior_error(f, f), 0.0)
        self.assertGreater(interior_error(f * 1.1, f), 0.05)

    def test_interior_error_window(self):
        """窗口内逐层常数偏移不计入误差"""
        f = exact_logarithmic().sample(self.grid)
        shifted = f + GradientField(self.grid, np.broadcast_to(0.3 * self.grid.t[:, None], f.values.shape))
        self.assertLess(interior_error(shifted, f, x_max=2.0), 1e-12)
        self.assertEqual(interior_error(f, f, x_max=2.0, sigma=0.25), 0.0)


class TestTraceBench(unittest.TestCase):
    """测试迹定理测试台"""

    def test_family(self):
        self.assertEqual(len(default_family()), 10)
        self.assertTrue(all(m.stress for m in stress_family()))
        member = BumpField(width=1.0, freq=2.0, decay=3.0)
        dilated = member.dilate(2.0)
        self.assertEqual((dilated.width, dilated.freq, dilated.decay), (2.0, 1.0, 1.5))

    def test_small_grid_band(self):
        grid = bench_grid(0.5, N=1024, L=128.0)
        family = default_family() + [BumpField(width=1.0, amplitude=0.0)]
        report = trace_bench(0.5, family=family, dilations=(1.0, 2.0, 4.0), grid=grid)
        self.assertEqual(len(report.rows), 30)
        self.assertEqual(report.skipped, 3)
        self.assertTrue(all(row["ratio"] > 0 for row in report.rows))
        self.assertTrue(report.within_band)
        self.assertEqual(report.to_dict()["sigma"], 0.5)

    def test_ratio_is_dilation_invariant(self):
        """两边都按 λ^{1−2σ} 伸缩，几何层网格上比值对 λ ∈ {2, 4, 8} 不变"""
        grid = bench_grid(0.5, N=4096)
        report = trace_bench(0.5, family=[BumpField(width=1.0, decay=1.0)], dilations=(1.0, 2.0, 4.0, 8.0),
                             grid=grid)
        ratios = [row["ratio"] for row in report.rows]
        self.assertEqual(len(ratios), 4)
        for ratio in ratios[1:]:
            self.assertLess(abs(ratio / ratios[0] - 1.0), 2e-2)
        self.assertLess(report.band, 1.02)

    def test_empty_family(self):
        with self.assertRaises(ConfigurationError):
            trace_bench(0.5, family=[])


class TestSuites(unittest.TestCase):
    """测试套件组成"""

    def test_suite_contents(self):
        self.assertEqual(len(suite_cases("trace")), 3)
        self.assertEqual(len(suite_cases("operators")), 9)
        self.assertEqual(len(suite_cases("solver")), 6)
        everything = suite_cases("all")
        self.assertEqual(len(everything), 18)
        self.assertEqual(len({c.case_id for c in everything}), 18)
        self.assertTrue(all(c.case_type in HANDLERS for c in everything))
        self.assertIn("all", SUITES)

    def test_round_trip_gates_every_level(self):
        result = HANDLERS["round_trip"]({"exact": "linear", "p": 3.0, "tolerance": 1e-12,
                                         "levels": [[64, 8.0, 12], [128, 16.0, 16]]})
        self.assertEqual(result["errors"], [0.0, 0.0])
        self.assertEqual(set(result["checks"]), {"baseline", "refinement", "mu_margin", "accretive"})
        self.assertTrue(result["passed"])
        fundamental = [c for c in suite_cases("solver") if c.params.get("exact") == "fundamental"]
        self.assertEqual(len(fundamental), 1)
        self.assertEqual(fundamental[0].params["p"], 3.0)
        self.assertEqual(fundamental[0].params["tolerance"], 0.05)

    def test_unknown_suite(self):
        with self.assertRaises(ConfigurationError):
            suite_cases("benchmarks")


if __name__ == '__main__':
    unittest.main()
