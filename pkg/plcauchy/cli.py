"""plcauchy 命令行

子命令：solve / verify / operators / qr-analyze
退出码：0 成功，2 配置错误，3 求解失败（报告照常写出）或验证用例未全部通过
"""
import argparse
import os
import sys
from typing import List, Optional

import numpy as np

from .coefficients import QuasilinearSymbol
from .config import RunConfig
from .errors import ConfigurationError, SolverError
from .expressions import evaluate_expression
from .geometry import LipschitzGraph
from .grid import BoundaryTrace, GradientField, d_values, sobolev_norm, weighted_l2_norm
from .io import read_field_csv, read_trace_csv, write_field_csv, write_json, write_trace_csv
from .logger import logger
from .operators import make_backend
from .quasiregular import analyze_field
from .solver import NonlinearSolver
from .verification import SUITES, run_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _load(args) -> RunConfig:
    run = RunConfig.from_file(args.config)
    if getattr(args, "out", None):
        run.output_dir = args.out
    return run


def _make_symbol(run: RunConfig) -> Optional[QuasilinearSymbol]:
    if run.law != "general":
        return None
    s = run.symbol
    symbol = QuasilinearSymbol.from_expressions(
        s["a1"], s["a2"], p=run.p, nu=float(s["nu"]), L=float(s["L"]),
        j11=s.get("j11"), j12=s.get("j12"), j21=s.get("j21"), j22=s.get("j22"))
    symbol.check_structure()
    return symbol


def _boundary_data(run: RunConfig, grid) -> BoundaryTrace:
    if run.data_csv is not None:
        return read_trace_csv(run.data_csv, run.sigma, grid)
    values = evaluate_expression(run.data, x=grid.x)
    return BoundaryTrace(grid, np.asarray(values, dtype=complex))


def _fmt(value) -> str:
    return "n/a" if value is None else f"{value:.3e}"


def cmd_solve(args) -> int:
    run = _load(args)
    graph, grid = run.make_graph(), run.make_grid()
    cfg = run.make_solver_config()
    symbol = _make_symbol(run)
    backend = make_backend(run.backend["kind"], graph, float(run.backend.get("tolerance", 1e-2)))
    h = _boundary_data(run, grid)
    out = run.output_dir
    logger.info(f"Solving p={run.p} on {grid} with {backend}")

    solver = NonlinearSolver(backend, cfg, symbol)
    try:
        f, report = solver.solve(h)
    except SolverError as e:
        data = dict(e.report or {})
        data["config"] = run.to_dict()
        write_json(os.path.join(out, "report.json"), data)
        print(f"solve: {data.get('status', 'failed')} ({type(e).__name__}: {e})")
        return EXIT_SOLVER

    trace = solver.fit.trace if solver.fit is not None else BoundaryTrace.zeros(grid)
    write_field_csv(os.path.join(out, "field.csv"), f)
    write_trace_csv(os.path.join(out, "trace.csv"), trace)
    data = report.to_dict()
    data["config"] = run.to_dict()
    write_json(os.path.join(out, "report.json"), data)
    print(f"solve: {report.status}, outer iterations {len(report.outer_history)}, "
          f"boundary residual {_fmt(report.boundary_residual)}, "
          f"pde residual {_fmt(report.pde_residual_sys)}, "
          f"representation residual {_fmt(report.representation_residual)}")
    return EXIT_OK


def _print_trace_table(report) -> None:
    for case in report["cases"]:
        if case["case_type"] != "trace_bench" or "rows" not in case["metrics"]:
            continue
        metrics = case["metrics"]
        print(f"sigma={metrics['sigma']}: band {metrics['band']:.3f}")
        for row in metrics["rows"]:
            tag = " (stress)" if row["stress"] else ""
            print(f"  {row['member']:<24} x{row['dilation']:<4g} {row['ratio']:.6g}{tag}")


def cmd_verify(args) -> int:
    report = run_suite(args.suite)
    write_json(args.out, report)
    if args.suite in ("trace", "all"):
        _print_trace_table(report)
    summary = report["summary"]
    print(f"verify {args.suite}: {summary['passed']}/{summary['total']} passed")
    return EXIT_OK if summary["failed"] == 0 else EXIT_SOLVER


def cmd_operators(args) -> int:
    """写出 Ẽ₀^±g、S₀g，以及 h = DS₀g 上的 S̃h、Sh"""
    run = _load(args)
    graph, grid = run.make_graph(), run.make_grid()
    backend = make_backend(run.backend["kind"], graph, float(run.backend.get("tolerance", 1e-2)))
    g = _boundary_data(run, grid)
    out = run.output_dir

    plus, minus = backend.hardy_projection(g, 1), backend.hardy_projection(g, -1)
    u0 = backend.boundary_cauchy_field(g)
    h = GradientField(grid, d_values(u0.values, grid))
    solid, beurling = backend.solid_cauchy(h), backend.beurling(h)

    write_trace_csv(os.path.join(out, "hardy_plus.csv"), plus)
    write_trace_csv(os.path.join(out, "hardy_minus.csv"), minus)
    write_field_csv(os.path.join(out, "boundary_cauchy.csv"), u0)
    write_field_csv(os.path.join(out, "solid_cauchy.csv"), solid)
    write_field_csv(os.path.join(out, "beurling.csv"), beurling)
    summary = {
        "backend": repr(backend),
        "norms": {
            "g_sigma": sobolev_norm(g, run.sigma),
            "hardy_plus_sigma": sobolev_norm(plus, run.sigma),
            "hardy_minus_sigma": sobolev_norm(minus, run.sigma),
            "boundary_cauchy": weighted_l2_norm(u0.values, grid, run.sigma),
            "solid_input": weighted_l2_norm(h.values, grid, run.sigma),
            "solid_cauchy": weighted_l2_norm(solid.values, grid, run.sigma),
            "beurling": weighted_l2_norm(beurling.values, grid, run.sigma),
        },
        "warnings": list(backend.warnings),
        "config": run.to_dict(),
    }
    write_json(os.path.join(out, "operators.json"), summary)
    norms = summary["norms"]
    print(f"operators: |S h| / |h| = {norms['beurling'] / max(norms['solid_input'], 1e-300):.4f}, "
          f"{len(backend.warnings)} warnings")
    return EXIT_OK


def cmd_qr_analyze(args) -> int:
    graph = LipschitzGraph.flat()
    sigma = args.sigma
    if args.config:
        run = RunConfig.from_file(args.config)
        graph, sigma = run.make_graph(), run.sigma
    f = read_field_csv(args.input, sigma)
    data = analyze_field(f, graph)
    write_json(args.out, data)
    print(f"qr-analyze: mu_max {data['mu_max']:.4f}, mu_p999 {data['mu_p999']:.4f}, "
          f"K_est {data['K_est']:.4g}, orientation violations {data['orientation_violations']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plcauchy", description="p-Laplace 边值问题的 Cauchy 积分求解器")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="求解配置文件描述的边值问题")
    p_solve.add_argument("--config", required=True, help="配置文件 (.toml/.yaml/.json)")
    p_solve.add_argument("--out", help="输出目录，覆盖 [output] dir")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="运行验证套件")
    p_verify.add_argument("--suite", choices=SUITES, default="all", help="套件名")
    p_verify.add_argument("--out", default="report.json", help="报告路径")
    p_verify.set_defaults(func=cmd_verify)

    p_ops = sub.add_parser("operators", help="输出算子作用在配置数据上的结果")
    p_ops.add_argument("--config", required=True, help="配置文件")
    p_ops.add_argument("--out", help="输出目录，覆盖 [output] dir")
    p_ops.set_defaults(func=cmd_operators)

    p_qr = sub.add_parser("qr-analyze", help="拟正则诊断")
    p_qr.add_argument("--in", dest="input", required=True, help="field.csv")
    p_qr.add_argument("--out", default="qr.json", help="输出 json")
    p_qr.add_argument("--sigma", type=float, default=0.5, help="加权指数")
    p_qr.add_argument("--config", help="可选配置文件，提供边界 φ")
    p_qr.set_defaults(func=cmd_qr_analyze)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as e:
        logger.error(f"Solver error: {e}")
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_SOLVER


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
