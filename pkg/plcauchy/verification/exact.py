"""精确解语料

每个精确解给出位势 u(x, y)、梯度 ∇u 的闭式，以及共轭梯度 f = ∂ₓu − i∂_y u
在拉回网格上的采样。进入语料前先过有限差分残差门限。
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..geometry import LipschitzGraph, eval_phi
from ..grid import BoundaryTrace, GradientField, HalfPlaneGrid, layer_weights
from ..logger import logger

Potential = Callable[[np.ndarray, np.ndarray], np.ndarray]
Gradient = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]

GATE_SPACING = 1e-4
GATE_THRESHOLD = 1e-5


@dataclass(frozen=True)
class ExactSolution:
    """p 为 None 表示对所有 p 成立"""
    name: str
    potential: Potential
    gradient: Gradient
    p: Optional[float] = None
    domain: str = "y > phi(x)"
    pole: Optional[Tuple[float, float]] = None
    scale: float = 1.0

    def valid_for(self, p: float) -> bool:
        return self.p is None or self.p == p

    def conjugate(self, x, y) -> np.ndarray:
        ux, uy = self.gradient(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        return ux - 1j * uy

    def sample(self, grid: HalfPlaneGrid, graph: Optional[LipschitzGraph] = None) -> GradientField:
        graph = graph or LipschitzGraph.flat()
        X, T = grid.mesh()
        return GradientField(grid, self.conjugate(X, T + eval_phi(graph, X)))

    def boundary_data(self, grid: HalfPlaneGrid, graph: Optional[LipschitzGraph] = None,
                      component: str = "d_x") -> BoundaryTrace:
        """边界上的 ∂ₓu（d_x）或 ∂_y u（d_y）"""
        graph = graph or LipschitzGraph.flat()
        x = grid.x
        ux, uy = self.gradient(x, eval_phi(graph, x))
        if component == "d_x":
            return BoundaryTrace(grid, ux)
        if component == "d_y":
            return BoundaryTrace(grid, uy)
        raise ConfigurationError(f"Unsupported boundary component: {component}")

    def divergence_residual(self, x: float, y: float, p: float, spacing: float) -> float:
        """中心差分的 div(|∇u|^{p−2}∇u)，相对于 |a(∇u)|/ρ

        ρ 为到极点的距离（无极点时取 scale）。∂ₓaₓ 与 ∂_y a_y 可以同时为零，不能作分母。
        """
        def flux(px, py):
            ux, uy = self.gradient(np.asarray(px, dtype=float), np.asarray(py, dtype=float))
            w = np.hypot(ux, uy) ** (p - 2.0)
            return w * ux, w * uy

        h = spacing
        ax = (flux(x + h, y)[0] - flux(x - h, y)[0]) / (2 * h)
        ay = (flux(x, y + h)[1] - flux(x, y - h)[1]) / (2 * h)
        if self.pole is not None:
            rho = float(np.hypot(x - self.pole[0], y - self.pole[1]))
        else:
            rho = self.scale
        scale = float(np.hypot(*flux(x, y))) / rho
        return float(abs(ax + ay) / scale) if scale > 0 else 0.0

    def residual_gate(self, p: float, graph: Optional[LipschitzGraph] = None,
                      spacing_factor: float = GATE_SPACING, threshold: float = GATE_THRESHOLD) -> float:
        """在边界附近的若干点上检查 p-调和性，超过门限则拒绝"""
        graph = graph or LipschitzGraph.flat()
        x0 = self.pole[0] if self.pole is not None else 0.0
        d = self.scale
        worst = 0.0
        for u in (-2.0, -0.5, 0.0, 0.7, 2.0):
            x = x0 + u * d
            for s in (0.1, 0.5, 1.0, 3.0):
                y = float(eval_phi(graph, x)) + s * d
                worst = max(worst, self.divergence_residual(x, y, p, spacing_factor * d))
        if worst > threshold:
            raise ConfigurationError(
                f"{self.name} fails the p-harmonic residual gate: {worst:.3g} > {threshold}")
        logger.debug(f"{self.name} passed residual gate ({worst:.3g} <= {threshold})")
        return worst


def exact_linear(a: float, b: float) -> ExactSolution:
    """u = ax + by，f ≡ a − ib"""
    if a == 0 and b == 0:
        raise ConfigurationError("exact_linear needs (a, b) != (0, 0)")

    def potential(x, y):
        return a * x + b * y

    def gradient(x, y):
        shape = np.broadcast(x, y).shape
        return np.full(shape, float(a)), np.full(shape, float(b))

    return ExactSolution(name=f"linear(a={a}, b={b})", potential=potential, gradient=gradient)


def _pole_distance(graph: LipschitzGraph, pole: Tuple[float, float]) -> float:
    x0, y0 = pole
    gap = float(eval_phi(graph, x0)) - y0
    if not gap > 0:
        raise ConfigurationError(f"pole {pole} must lie strictly below the graph (gap {gap:.3g})")
    # 到 Lipschitz 图的欧氏距离下界
    return gap / np.sqrt(1.0 + graph.lipschitz_bound ** 2)


def exact_fundamental(p: float, pole: Tuple[float, float] = (0.0, -1.0),
                      graph: Optional[LipschitzGraph] = None, gate: bool = True) -> ExactSolution:
    """u = |z − z₀|^k，k = (p−2)/(p−1)；f = k r^{k−2} conj(z − z₀)"""
    if not p > 1:
        raise ConfigurationError(f"p must be > 1, got {p}")
    if p == 2:
        raise ConfigurationError("exact_fundamental needs p != 2; use exact_logarithmic at p = 2")
    graph = graph or LipschitzGraph.flat()
    d = _pole_distance(graph, pole)
    x0, y0 = pole
    k = (p - 2.0) / (p - 1.0)

    def potential(x, y):
        return np.hypot(x - x0, y - y0) ** k

    def gradient(x, y):
        dx, dy = x - x0, y - y0
        w = k * (dx * dx + dy * dy) ** (0.5 * k - 1.0)
        return w * dx, w * dy

    sol = ExactSolution(name=f"fundamental(p={p}, pole={tuple(pole)})", potential=potential,
                        gradient=gradient, p=p, domain=f"y > phi(x), pole at distance >= {d:.3g}",
                        pole=(float(x0), float(y0)), scale=d)
    if gate:
        sol.residual_gate(p, graph)
    return sol


def exact_logarithmic(pole: Tuple[float, float] = (0.0, -1.0),
                      graph: Optional[LipschitzGraph] = None) -> ExactSolution:
    """p = 2：u = log|z − z₀|，f = 1/(z − z₀)"""
    graph = graph or LipschitzGraph.flat()
    d = _pole_distance(graph, pole)
    x0, y0 = pole

    def potential(x, y):
        return np.log(np.hypot(x - x0, y - y0))

    def gradient(x, y):
        dx, dy = x - x0, y - y0
        r2 = dx * dx + dy * dy
        return dx / r2, dy / r2

    return ExactSolution(name=f"logarithmic(pole={tuple(pole)})", potential=potential, gradient=gradient,
                         p=2.0, pole=(float(x0), float(y0)), scale=d)


def exact_harmonic_mode(a: float) -> ExactSolution:
    """p = 2：u = e^{−ay}cos(ax)/a，f = i e^{iax − ay}"""
    if not a > 0:
        raise ConfigurationError(f"exact_harmonic_mode needs a > 0, got {a}")

    def potential(x, y):
        return np.exp(-a * y) * np.cos(a * x) / a

    def gradient(x, y):
        decay = np.exp(-a * y)
        return -decay * np.sin(a * x), -decay * np.cos(a * x)

    return ExactSolution(name=f"harmonic_mode(a={a})", potential=potential, gradient=gradient,
                         p=2.0, scale=1.0 / a)


def interior_error(solved: GradientField, exact: GradientField, t_max: float = 2.0,
                   x_fraction: float = 0.25, x_max: Optional[float] = None,
                   sigma: Optional[float] = None) -> float:
    """窗口 |x| ≤ x_max（默认 x_fraction·L）、t ≤ t_max 内的相对误差，权重 t^{1−2σ}

    逐层去掉窗口内均值后比较：周期截断在窗口里留下逐层常数。
    """
    grid = solved.grid
    rows = grid.t <= t_max
    half = x_fraction * grid.L if x_max is None else x_max
    cols = np.abs(grid.x) <= half
    omega = layer_weights(grid, sigma)[rows][:, None]
    a = solved.values[rows][:, cols]
    b = exact.values[rows][:, cols]
    a = a - a.mean(axis=1, keepdims=True)
    b = b - b.mean(axis=1, keepdims=True)
    scale = float(np.sqrt(np.sum(omega * np.abs(b) ** 2)))
    error = float(np.sqrt(np.sum(omega * np.abs(a - b) ** 2)))
    return error / scale if scale > 0 else error


__all__ = [
    'ExactSolution', 'exact_linear', 'exact_fundamental', 'exact_logarithmic',
    'exact_harmonic_mode', 'interior_error',
]
