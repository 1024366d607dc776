"""求解器

外层：B⁽⁰⁾ = B₀，f⁽ᵏ⁾ = P^{B⁽ᵏ⁾} g⁽ᵏ⁾（g⁽ᵏ⁾ 由边界方程确定），
B⁽¹⁾ = B(f⁽⁰⁾)，之后 B⁽ᵏ⁺¹⁾ = B⁽ᵏ⁾ + ω(B(f⁽ᵏ⁾) − B⁽ᵏ⁾)，ω = relaxation。
线性预解：M = B₀ − B，P^B g = S₀g + S̃M(I − SM)⁻¹DS₀g。
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import fft
from scipy.sparse.linalg import LinearOperator, gmres
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .coefficients import (QuasilinearSymbol, accretivity_kappa, apply_matrix, b_general,
                           b_plaplace, b_zero, b_zero_inverse, check_coefficients, closeness_to_b0,
                           coefficient_bound, spectral_norm_2x2, symbol_closeness)
from .config import BOUNDARY_COMPONENTS, SolverConfig
from .errors import (BoundaryFitError, BoundaryFitStagnation, ConfigurationError,
                     ContractionError, FixedPointError, InvariantViolation, SolverError)
from .geometry import LipschitzGraph, eval_phi_prime
from .grid import (BoundaryTrace, GradientField, HalfPlaneGrid, d_values, layer_weights,
                   sobolev_norm, t_derivative, weighted_h1_seminorm, weighted_l2_norm)
from .grid import x_derivative as x_partial
from .io import plain
from .logger import logger
from .operators import OperatorBackend
from .quasiregular import analyze_field, partials

STAGNATION_WINDOW = 5
STAGNATION_RATIO = 0.99
DIVERGENCE_STREAK = 3
RETRY_ATTEMPTS = 3
# 采样上确界相对真上确界的余量
BOUND_SLACK = 1e-2


def _phi_prime(graph: LipschitzGraph, grid: HalfPlaneGrid) -> np.ndarray:
    return np.asarray(eval_phi_prime(graph, grid.x), dtype=float)


def coefficient_field(values: np.ndarray, p: float, phi_prime: np.ndarray, eps_zero: float = 1e-12,
                      symbol: Optional[QuasilinearSymbol] = None) -> np.ndarray:
    """逐点 B(f)；|f| ≤ eps_zero·max|f| 处取 B₀"""
    scale = float(np.max(np.abs(values))) if np.size(values) else 0.0
    eps_abs = eps_zero * scale
    if symbol is None:
        return b_plaplace(p, values, phi_prime, eps_zero=eps_abs)
    return b_general(symbol, values, phi_prime, eps_zero=eps_abs)


@dataclass
class PerturbationField:
    matrix: np.ndarray
    sup_norm: float


def perturbation(f: GradientField, p: float, graph: LipschitzGraph, eps_zero: float = 1e-12,
                 symbol: Optional[QuasilinearSymbol] = None) -> PerturbationField:
    """ℰ = I − B₀⁻¹B(f)"""
    dphi = _phi_prime(graph, f.grid)
    B = coefficient_field(f.values, p, dphi, eps_zero, symbol)
    E = np.eye(2) - np.matmul(b_zero_inverse(dphi), B)
    sup = float(np.max(spectral_norm_2x2(E))) if E.size else 0.0
    return PerturbationField(matrix=E, sup_norm=sup)


@dataclass
class LinearSolution:
    """P^B g 及其中间量；derivative 为 Df = (I − SM)⁻¹DS₀g"""
    field: GradientField
    g: BoundaryTrace
    coupling: np.ndarray
    derivative: np.ndarray
    neumann_terms: int
    neumann_history: List[float]
    warnings: List[str] = field(default_factory=list)

    @property
    def decoupled(self) -> bool:
        return not np.any(self.coupling)


def _neumann_series(backend: OperatorBackend, M: np.ndarray, y0: np.ndarray, grid: HalfPlaneGrid,
                    cfg: SolverConfig) -> Tuple[np.ndarray, int, List[float], List[str]]:
    scale = weighted_l2_norm(y0, grid, cfg.sigma)
    if scale == 0:
        return y0, 1, [0.0], []
    y, term = y0.copy(), y0
    history: List[float] = []
    previous, streak = scale, 0
    for n in range(1, cfg.max_neumann + 1):
        term = backend.beurling(GradientField(grid, apply_matrix(M, term))).values
        increment = weighted_l2_norm(term, grid, cfg.sigma)
        y = y + term
        history.append(increment / scale)
        if increment <= cfg.tol_neumann * weighted_l2_norm(y, grid, cfg.sigma):
            logger.debug(f"Neumann series converged after {n + 1} terms (last increment {increment / scale:.3e})")
            return y, n + 1, history, []
        ratio = increment / previous if previous > 0 else float("inf")
        streak = streak + 1 if increment > previous else 0
        if streak >= DIVERGENCE_STREAK:
            raise ContractionError(
                f"Neumann series diverges: increments grew {DIVERGENCE_STREAK} times in a row, "
                f"estimated |S E| ~ {ratio:.4g}", estimate=ratio)
        previous = increment
    msg = (f"Neumann series truncated at {cfg.max_neumann + 1} terms with relative increment "
           f"{history[-1]:.3e} > tol_neumann={cfg.tol_neumann}")
    logger.warning(msg)
    return y, cfg.max_neumann + 1, history, [msg]


def _gmres_resolvent(backend: OperatorBackend, M: np.ndarray, y0: np.ndarray, grid: HalfPlaneGrid,
                     cfg: SolverConfig) -> Tuple[np.ndarray, int, List[float], List[str]]:
    """(I − SM)y = y0；M 只是实线性的，按 [Re; Im] 展成实方程组"""
    shape, n = y0.shape, y0.size

    def pack(v):
        return np.concatenate([v.real.ravel(), v.imag.ravel()])

    def unpack(w):
        return (w[:n] + 1j * w[n:]).reshape(shape)

    def matvec(w):
        v = unpack(np.asarray(w, dtype=float).ravel())
        return pack(v - backend.beurling(GradientField(grid, apply_matrix(M, v))).values)

    operator = LinearOperator((2 * n, 2 * n), matvec=matvec, dtype=float)
    history: List[float] = []
    solution, info = gmres(operator, pack(y0), x0=pack(y0), rtol=cfg.tol_neumann, atol=0.0,
                           restart=min(50, 2 * n), maxiter=cfg.max_neumann,
                           callback=lambda r: history.append(float(r)), callback_type="pr_norm")
    if info < 0:
        raise SolverError(f"GMRES breakdown (info={info})")
    warnings = []
    if info > 0:
        msg = f"GMRES stopped after {info} iterations without reaching tol_neumann={cfg.tol_neumann}"
        logger.warning(msg)
        warnings.append(msg)
    return unpack(solution), len(history) + 1, history or [0.0], warnings


def linear_solve(backend: OperatorBackend, B: np.ndarray, g: BoundaryTrace,
                 cfg: Optional[SolverConfig] = None) -> LinearSolution:
    """P^B g，B 为冻结的系数场，形状 (K, N, 2, 2)"""
    cfg = cfg or SolverConfig()
    grid = g.grid
    B = np.broadcast_to(np.asarray(B, dtype=float), (grid.K, grid.N, 2, 2))
    M = b_zero(_phi_prime(backend.graph, grid))[None] - B
    u0 = backend.boundary_cauchy_field(g)
    y0 = d_values(u0.values, grid)
    if not np.any(M):
        return LinearSolution(field=u0, g=g, coupling=M, derivative=y0,
                              neumann_terms=1, neumann_history=[0.0])
    if cfg.resolvent == "gmres":
        y, terms, history, warnings = _gmres_resolvent(backend, M, y0, grid, cfg)
    else:
        y, terms, history, warnings = _neumann_series(backend, M, y0, grid, cfg)
    correction = backend.solid_cauchy(GradientField(grid, apply_matrix(M, y)))
    f = GradientField(grid, u0.values + correction.values, u0.warnings + correction.warnings)
    return LinearSolution(field=f, g=g, coupling=M, derivative=y, neumann_terms=terms,
                          neumann_history=history, warnings=warnings)


def solution_trace(backend: OperatorBackend, solution: LinearSolution) -> BoundaryTrace:
    """P^B g 在 t = 0 的迹：Ẽ₀⁺g + (S̃ M Df)|_{t=0}"""
    plus = backend.hardy_projection(solution.g, 1)
    if solution.decoupled:
        return plus
    grid = solution.g.grid
    rest = backend.solid_cauchy_trace(GradientField(grid, apply_matrix(solution.coupling, solution.derivative)))
    return BoundaryTrace(grid, plus.values + rest.values, plus.warnings + rest.warnings)


def _component(values: np.ndarray, component: str) -> np.ndarray:
    # f = ∂ₓu − i∂_y u
    return values.real if component == "d_x" else -values.imag


def _lift(r: np.ndarray, component: str) -> np.ndarray:
    return 2.0 * r if component == "d_x" else -2j * r


def boundary_target(h: BoundaryTrace) -> np.ndarray:
    """实部去掉零频与 Nyquist 模（两者都不在 Ẽ₀^± 的像里）"""
    coeffs = fft.fft(h.values.real)
    coeffs[0] = 0.0
    coeffs[h.grid.N // 2] = 0.0
    return fft.ifft(coeffs).real


@dataclass
class BoundaryFit:
    g: BoundaryTrace
    solution: LinearSolution
    trace: BoundaryTrace
    residuals: List[float]
    damping: float
    attempts: int = 1


def _fit_once(backend: OperatorBackend, B: np.ndarray, target: np.ndarray, h_norm: float,
              component: str, cfg: SolverConfig, damping: float, grid: HalfPlaneGrid,
              g0: Optional[BoundaryTrace] = None) -> BoundaryFit:
    g = g0 if g0 is not None else BoundaryTrace(grid, _lift(target, component))
    residuals: List[float] = []
    for it in range(1, cfg.max_boundary + 1):
        solution = linear_solve(backend, B, g, cfg)
        trace = solution_trace(backend, solution)
        r = target - _component(trace.values, component)
        r = r - r.mean()
        residual = sobolev_norm(BoundaryTrace(grid, r), cfg.sigma) / h_norm
        residuals.append(residual)
        logger.debug(f"Boundary fit iteration {it}: residual {residual:.3e} (damping {damping})")
        if residual < cfg.tol_boundary:
            return BoundaryFit(g=g, solution=solution, trace=trace, residuals=residuals, damping=damping)
        if len(residuals) > STAGNATION_WINDOW and \
                residuals[-1] > STAGNATION_RATIO * residuals[-1 - STAGNATION_WINDOW]:
            raise BoundaryFitStagnation(
                f"Boundary fit stagnated at residual {residual:.3e} with damping {damping}")
        g = g.with_values(g.values + damping * _lift(r, component))
    raise BoundaryFitError(
        f"Boundary fit did not converge in {cfg.max_boundary} iterations (residual {residuals[-1]:.3e})")


def _log_retry(retry_state) -> None:
    e = retry_state.outcome.exception()
    logger.warning(f"{e}; retrying boundary fit with halved damping "
                   f"(attempt {retry_state.attempt_number + 1}/{RETRY_ATTEMPTS})")


def boundary_fit(backend: OperatorBackend, B: np.ndarray, h: BoundaryTrace,
                 component: Optional[str] = None, cfg: Optional[SolverConfig] = None,
                 g0: Optional[BoundaryTrace] = None) -> BoundaryFit:
    """阻尼 Richardson 迭代求解边界方程 component(trace P^B g) = h

    d_x 规定 ∂ₓu = Re f₀，d_y 规定 ∂_y u = −Im f₀。停滞时阻尼减半重试，最多 3 次。
    g0 为迭代初值，缺省时取提升后的 h。
    """
    cfg = cfg or SolverConfig()
    component = component or cfg.boundary_component
    if component not in BOUNDARY_COMPONENTS:
        raise ConfigurationError(f"Unsupported boundary component: {component}")
    grid = h.grid
    target = boundary_target(h)
    h_norm = sobolev_norm(BoundaryTrace(grid, target), cfg.sigma)
    if h_norm <= 1e-13 * (1.0 + float(np.max(np.abs(h.values)))):
        raise ConfigurationError("boundary data is constant; the boundary equation needs nonconstant h")
    fit = None
    retrying = Retrying(stop=stop_after_attempt(RETRY_ATTEMPTS),
                        retry=retry_if_exception_type(BoundaryFitStagnation),
                        before_sleep=_log_retry, reraise=True)
    for attempt in retrying:
        with attempt:
            number = attempt.retry_state.attempt_number
            fit = _fit_once(backend, B, target, h_norm, component, cfg,
                            cfg.damping * 0.5 ** (number - 1), grid, g0)
            fit.attempts = number
    return fit


def _interior_norm(values: np.ndarray, grid: HalfPlaneGrid, sigma: Optional[float]) -> float:
    omega = layer_weights(grid, sigma)[1:grid.K - 1]
    return float(np.sqrt(grid.dx * np.sum(omega[:, None] * np.abs(values) ** 2)))


def _relative(residual: float, scale: float) -> float:
    return residual / scale if scale > 0 else 0.0


def pde_residuals(f: GradientField, p: float, graph: Optional[LipschitzGraph] = None,
                  x_derivative: str = "spectral", symbol: Optional[QuasilinearSymbol] = None,
                  eps_zero: float = 1e-12, sigma: Optional[float] = None) -> Dict[str, float]:
    """内部层上的三个相对残差

    system:     ∂ₜf + B(f)Df
    divergence: div a(∇u)，∇u = (f1, −f2)，链式法则 ∂ₓ|_y = ∂ₓ|_t − φ′∂ₜ
    curl:       ∂ₓ|_y(−f2) − ∂_y f1
    """
    grid = f.grid
    graph = graph or LipschitzGraph.flat()
    mode = x_derivative
    inner = slice(1, grid.K - 1)
    dphi = _phi_prime(graph, grid)
    fx, fy = partials(f, graph, mode)
    df = -1j * x_partial(f.values, grid, mode)[inner]
    B = coefficient_field(f.values[inner], p, dphi[None, :], eps_zero, symbol)
    bdf = apply_matrix(B, df)
    system = _relative(_interior_norm(fy + bdf, grid, sigma),
                       _interior_norm(fy, grid, sigma) + _interior_norm(bdf, grid, sigma))

    v1, v2 = f.values.real, -f.values.imag
    if symbol is None:
        r = np.hypot(v1, v2)
        w = np.where(r > 0, np.where(r > 0, r, 1.0) ** (p - 2.0), 0.0)
        a1, a2 = w * v1, w * v2
    else:
        a1, a2 = symbol.a(v1, v2)
    dx_a1 = x_partial(np.asarray(a1, dtype=complex), grid, mode).real[inner]
    dt_a1 = t_derivative(a1, grid)[inner]
    dt_a2 = t_derivative(a2, grid)[inner]
    slope_a1 = dphi[None, :] * dt_a1
    divergence = _relative(_interior_norm(dx_a1 - slope_a1 + dt_a2, grid, sigma),
                           _interior_norm(dx_a1, grid, sigma) + _interior_norm(slope_a1, grid, sigma)
                           + _interior_norm(dt_a2, grid, sigma))

    curl = _relative(_interior_norm(-fx.imag - fy.real, grid, sigma),
                     _interior_norm(fx.imag, grid, sigma) + _interior_norm(fy.real, grid, sigma))
    return {"system": system, "divergence": divergence, "curl": curl}


def pde_residual(f: GradientField, p: float, graph: Optional[LipschitzGraph] = None, **kwargs) -> float:
    """一阶方程组残差；散度型与旋度残差见 pde_residuals"""
    return pde_residuals(f, p, graph, **kwargs)["system"]


def representation_residual(backend: OperatorBackend, f: GradientField, g: BoundaryTrace, p: float,
                            eps_zero: float = 1e-12, symbol: Optional[QuasilinearSymbol] = None,
                            sigma: Optional[float] = None) -> float:
    """‖f − S₀g − S̃((B₀ − B(f))Df)‖ / ‖f‖，加权 L₂"""
    grid = f.grid
    dphi = _phi_prime(backend.graph, grid)
    M = b_zero(dphi)[None] - coefficient_field(f.values, p, dphi[None, :], eps_zero, symbol)
    rebuilt = backend.boundary_cauchy_field(g).values
    if np.any(M):
        rebuilt = rebuilt + backend.solid_cauchy(
            GradientField(grid, apply_matrix(M, d_values(f.values, grid)))).values
    scale = weighted_l2_norm(f.values, grid, sigma)
    return _relative(weighted_l2_norm(f.values - rebuilt, grid, sigma), scale)


@dataclass
class SolverReport:
    status: str = "running"
    outer_start: Optional[float] = None
    outer_history: List[float] = field(default_factory=list)
    outer_contraction: List[float] = field(default_factory=list)
    neumann_terms: List[int] = field(default_factory=list)
    neumann_history: List[float] = field(default_factory=list)
    boundary_residuals: List[float] = field(default_factory=list)
    boundary_history: List[float] = field(default_factory=list)
    boundary_residual: Optional[float] = None
    boundary_attempts: int = 0
    pde_residual_sys: Optional[float] = None
    pde_residual_div: Optional[float] = None
    curl_residual: Optional[float] = None
    representation_residual: Optional[float] = None
    kappa_min: Optional[float] = None
    closeness: Optional[float] = None
    closeness_prior: Optional[float] = None
    coefficient_bound: Optional[float] = None
    mu_max: Optional[float] = None
    mu_p999: Optional[float] = None
    K_est: Optional[float] = None
    orientation_violations: int = 0
    flagged_fraction: Optional[float] = None
    contraction_estimate: Optional[float] = None
    norms: Dict[str, float] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def warn(self, msg: str) -> None:
        if msg not in self.warnings:
            self.warnings.append(msg)

    def to_dict(self) -> Dict[str, Any]:
        return plain(asdict(self))


class NonlinearSolver:
    """外层 Picard 迭代 B ↦ B(f)，记录报告"""

    def __init__(self, backend: OperatorBackend, cfg: SolverConfig,
                 symbol: Optional[QuasilinearSymbol] = None):
        self.backend = backend
        self.cfg = cfg
        self.symbol = symbol
        self.graph = backend.graph
        self.fit: Optional[BoundaryFit] = None

    def _coefficients(self, f: GradientField, dphi: np.ndarray) -> np.ndarray:
        return coefficient_field(f.values, self.cfg.p, dphi[None, :], self.cfg.eps_zero, self.symbol)

    def _prior_closeness(self, report: SolverReport) -> None:
        cfg, M = self.cfg, self.graph.lipschitz_bound
        if self.symbol is None:
            prior = closeness_to_b0(cfg.p, M, cfg.closeness_samples)
        else:
            prior = symbol_closeness(self.symbol, M, cfg.closeness_samples)
        report.closeness_prior = prior
        if prior > cfg.closeness_threshold:
            msg = (f"sup|B(f) - B0| = {prior:.3g} exceeds {cfg.closeness_threshold}: "
                   f"outside the small-perturbation regime, convergence is not expected")
            logger.warning(msg)
            report.warn(msg)

    def _check_bound(self, report: SolverReport, Bf: np.ndarray) -> None:
        """|B(f)| ≤ C(M, p)，C 为单位圆与 [−M, M] 上的采样上确界；一般通量只查有限性"""
        bound = None
        if self.symbol is None:
            bound = coefficient_bound(self.cfg.p, self.graph.lipschitz_bound, self.cfg.closeness_samples)
            report.coefficient_bound = bound
            bound *= 1.0 + BOUND_SLACK
        try:
            check_coefficients(Bf, bound)
        except InvariantViolation as e:
            logger.warning(f"{e} (declared lipschitz_bound {self.graph.lipschitz_bound})")
            report.warn(str(e))

    def _diagnose(self, report: SolverReport, f: GradientField, h: BoundaryTrace,
                  fit: Optional[BoundaryFit], dphi: np.ndarray) -> None:
        cfg, grid = self.cfg, f.grid
        report.norms = {"h_sigma": sobolev_norm(h, cfg.sigma),
                        "weighted_h1": weighted_h1_seminorm(f, cfg.sigma)}
        residuals = pde_residuals(f, cfg.p, self.graph, symbol=self.symbol,
                                  eps_zero=cfg.eps_zero, sigma=cfg.sigma)
        report.pde_residual_sys = residuals["system"]
        report.pde_residual_div = residuals["divergence"]
        report.curl_residual = residuals["curl"]
        if fit is not None:
            report.representation_residual = representation_residual(
                self.backend, f, fit.g, cfg.p, cfg.eps_zero, self.symbol, cfg.sigma)
        else:
            report.representation_residual = 0.0

        Bf = self._coefficients(f, dphi)
        scale = float(np.max(np.abs(f.values)))
        live = np.abs(f.values) > cfg.eps_zero * scale
        kappa = accretivity_kappa(Bf)
        report.kappa_min = float(np.min(kappa[live])) if np.any(live) else float(np.min(kappa))
        report.closeness = float(np.max(spectral_norm_2x2(Bf - b_zero(dphi)[None])))
        self._check_bound(report, Bf)

        if scale > 0:
            qr = analyze_field(f, self.graph)
            for key in ("mu_max", "mu_p999", "K_est", "orientation_violations", "flagged_fraction"):
                setattr(report, key, qr[key])
            for msg in qr["warnings"]:
                report.warn(msg)
        else:
            report.mu_max, report.mu_p999, report.K_est = 0.0, 0.0, 1.0
            report.flagged_fraction = 1.0
        for msg in list(f.warnings) + list(self.backend.warnings):
            report.warn(msg)

    def _record(self, report: SolverReport, fit: BoundaryFit, change: float) -> None:
        if report.outer_history and report.outer_history[-1] > 0:
            report.outer_contraction.append(change / report.outer_history[-1])
        report.outer_history.append(change)
        report.neumann_terms.append(fit.solution.neumann_terms)
        report.neumann_history = list(fit.solution.neumann_history)
        report.boundary_residuals.append(fit.residuals[-1])
        report.boundary_history = list(fit.residuals)
        report.boundary_residual = fit.residuals[-1]
        report.boundary_attempts = fit.attempts
        for msg in fit.solution.warnings + list(fit.trace.warnings):
            report.warn(msg)

    def _fail(self, report: SolverReport, status: str, e: SolverError, f, h, fit, dphi):
        report.status = status
        report.warn(str(e))
        if f is not None:
            try:
                self._diagnose(report, f, h, fit, dphi)
            except SolverError as inner:
                report.warn(f"diagnostics incomplete: {inner}")
        e.report = report.to_dict()
        logger.error(f"Solver failed ({status}): {e}")
        return e

    def _fit(self, report: SolverReport, B: np.ndarray, h: BoundaryTrace, f, fit, dphi) -> BoundaryFit:
        try:
            return boundary_fit(self.backend, B, h, self.cfg.boundary_component, self.cfg,
                                fit.g if fit is not None else None)
        except ContractionError as e:
            report.contraction_estimate = e.estimate
            raise self._fail(report, "contraction-failure", e, f, h, fit, dphi)
        except BoundaryFitError as e:
            raise self._fail(report, "boundary-fit-failure", e, f, h, fit, dphi)
        except SolverError as e:
            raise self._fail(report, "operator-failure", e, f, h, fit, dphi)

    def _converged(self, report: SolverReport, f: GradientField, h: BoundaryTrace, fit: BoundaryFit,
                   dphi: np.ndarray, k: int) -> Tuple[GradientField, SolverReport]:
        report.status = "converged"
        self._diagnose(report, f, h, fit, dphi)
        logger.info(f"Converged after {k} outer iterations: "
                    f"system residual {report.pde_residual_sys:.3e}, "
                    f"representation residual {report.representation_residual:.3e}")
        return f, report

    def solve(self, h: BoundaryTrace) -> Tuple[GradientField, SolverReport]:
        cfg, grid = self.cfg, h.grid
        dphi = _phi_prime(self.graph, grid)
        report = SolverReport(config=cfg.to_dict())
        self.fit = None
        self._prior_closeness(report)

        target = boundary_target(h)
        if not np.any(np.abs(target) > 1e-14 * (1.0 + float(np.max(np.abs(h.values))))):
            f = GradientField.zeros(grid)
            report.status = "zero-data"
            report.outer_start = 0.0
            report.outer_history = [0.0]
            report.neumann_terms = [0]
            report.neumann_history = [0.0]
            report.boundary_residuals = [0.0]
            report.boundary_history = [0.0]
            report.boundary_residual = 0.0
            self._diagnose(report, f, h, None, dphi)
            logger.info("Zero boundary data: returning the zero field")
            return f, report

        # B⁽⁰⁾ = B₀ 的解只用来给出起点 B(f⁽⁰⁾)；outer_history 从下一步记起
        B = np.broadcast_to(b_zero(dphi)[None], (grid.K, grid.N, 2, 2)).copy()
        fit = self._fit(report, B, h, None, None, dphi)
        f = fit.solution.field
        self.fit = fit
        B_start = self._coefficients(f, dphi)
        report.outer_start = float(np.max(spectral_norm_2x2(B_start - B)))
        logger.info(f"Outer start: sup|B(f0) - B0| = {report.outer_start:.3e}")
        if report.outer_start < cfg.tol_outer:
            self._record(report, fit, report.outer_start)
            return self._converged(report, f, h, fit, dphi, 1)
        B = B_start

        for k in range(1, cfg.max_outer + 1):
            fit = self._fit(report, B, h, f, fit, dphi)
            f = fit.solution.field
            self.fit = fit
            B_next = B + cfg.relaxation * (self._coefficients(f, dphi) - B)
            change = float(np.max(spectral_norm_2x2(B_next - B)))
            self._record(report, fit, change)
            logger.info(f"Outer iteration {k}: sup|dB| = {change:.3e}, "
                        f"boundary residual {fit.residuals[-1]:.3e}, "
                        f"neumann terms {fit.solution.neumann_terms}")
            if change < cfg.tol_outer:
                return self._converged(report, f, h, fit, dphi, k)
            B = B_next
        e = FixedPointError(f"Outer iteration did not converge in {cfg.max_outer} iterations "
                            f"(last change {report.outer_history[-1]:.3e})")
        raise self._fail(report, "fixed-point-failure", e, f, h, fit, dphi)


def nonlinear_solve(backend: OperatorBackend, cfg: SolverConfig, h: BoundaryTrace,
                    symbol: Optional[QuasilinearSymbol] = None) -> Tuple[GradientField, SolverReport]:
    return NonlinearSolver(backend, cfg, symbol).solve(h)


__all__ = [
    'SolverConfig', 'SolverReport', 'PerturbationField', 'LinearSolution', 'BoundaryFit',
    'NonlinearSolver', 'coefficient_field', 'perturbation', 'linear_solve', 'solution_trace',
    'boundary_target', 'boundary_fit', 'nonlinear_solve', 'pde_residual', 'pde_residuals',
    'representation_residual',
]
