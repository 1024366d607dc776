"""拟正则诊断：Wirtinger 导数、Beltrami 系数、伸缩商、f ↔ B 对应与椭圆矩阵 A_μ

导数只在内部层上计算（首末层的单侧差分会污染 sup 型统计）。
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, DegenerateEllipticityError
from .geometry import LipschitzGraph, eval_phi_prime
from .grid import GradientField, HalfPlaneGrid, d_values, t_derivative, x_derivative
from .logger import logger

FLAG_EPS = 1e-8


def _interior(grid: HalfPlaneGrid) -> slice:
    if grid.K < 3:
        raise ConfigurationError("derivative diagnostics need at least three t-layers")
    return slice(1, grid.K - 1)


def partials(f: GradientField, graph: Optional[LipschitzGraph] = None,
             mode: str = "spectral") -> Tuple[np.ndarray, np.ndarray]:
    """原坐标下的 (∂ₓ|_y f, ∂_y f)，内部层，形状 (K−2, N)

    ∂_y = ∂ₜ，∂ₓ|_y = ∂ₓ|_t − φ′∂ₜ
    """
    grid = f.grid
    inner = _interior(grid)
    fx = x_derivative(f.values, grid, mode)[inner]
    ft = t_derivative(f.values, grid)[inner]
    if graph is not None and not graph.is_flat:
        fx = fx - np.asarray(eval_phi_prime(graph, grid.x))[None, :] * ft
    return fx, ft


def wirtinger(f: GradientField, graph: Optional[LipschitzGraph] = None,
              x_derivative: str = "spectral") -> Tuple[np.ndarray, np.ndarray]:
    """(∂_z f, ∂_z̄ f)，∂_z = (∂ₓ − i∂_y)/2，∂_z̄ = (∂ₓ + i∂_y)/2"""
    fx, fy = partials(f, graph, x_derivative)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)


@dataclass
class BeltramiField:
    grid: HalfPlaneGrid
    mu: np.ndarray
    flagged: np.ndarray
    k_sup: float
    k_p999: float
    warnings: List[str] = field(default_factory=list)

    @property
    def flagged_fraction(self) -> float:
        return float(np.mean(self.flagged)) if self.flagged.size else 0.0


def _percentile(values: np.ndarray, q: float) -> float:
    return float(np.percentile(values, q)) if values.size else 0.0


def beltrami(f: GradientField, graph: Optional[LipschitzGraph] = None,
             eps_zero: float = FLAG_EPS, x_derivative: str = "spectral") -> BeltramiField:
    """μ = ∂_z̄ f / ∂_z f；|∂_z f| < eps_zero·scale 处 μ 取 0 并标记，不参与 k_sup"""
    dz, dzbar = wirtinger(f, graph, x_derivative)
    mag = np.abs(dz)
    scale = float(np.max(mag)) if mag.size else 0.0
    flagged = mag <= eps_zero * scale
    mu = np.where(flagged, 0.0, dzbar / np.where(flagged, 1.0, dz))
    live = np.abs(mu[~flagged])
    k_sup = float(np.max(live)) if live.size else 0.0
    warnings = []
    if k_sup >= 1.0:
        msg = f"Beltrami coefficient reaches |mu| = {k_sup:.6g} >= 1; field is not quasiregular"
        logger.warning(msg)
        warnings.append(msg)
    return BeltramiField(grid=f.grid, mu=mu, flagged=flagged, k_sup=k_sup,
                         k_p999=_percentile(live, 99.9), warnings=warnings)


def _dilatation_stats(f: GradientField, graph: Optional[LipschitzGraph], eps_zero: float,
                      x_derivative: str) -> Tuple[float, int, List[str]]:
    dz, dzbar = wirtinger(f, graph, x_derivative)
    a2, b2 = np.abs(dz) ** 2, np.abs(dzbar) ** 2
    grad2 = a2 + b2
    scale = float(np.max(grad2)) if grad2.size else 0.0
    flagged = grad2 <= eps_zero * scale
    jac = a2 - b2
    live = ~flagged
    violations = int(np.count_nonzero(live & (jac <= 0)))
    warnings = []
    if violations:
        msg = f"orientation violation: J <= 0 at {violations} unflagged points"
        logger.warning(msg)
        warnings.append(msg)
        return float("inf"), violations, warnings
    if not np.any(live):
        return 1.0, 0, warnings
    ratio = float(np.max(grad2[live] / jac[live]))
    k = float(np.max(np.sqrt(b2[live] / a2[live])))
    from_k = (1 + k * k) / (1 - k * k) if k < 1 else float("inf")
    return max(ratio, from_k), 0, warnings


def dilatation(f: GradientField, graph: Optional[LipschitzGraph] = None,
               eps_zero: float = FLAG_EPS, x_derivative: str = "spectral") -> float:
    """K = sup (|∂_z f|²+|∂_z̄ f|²)/(|∂_z f|²−|∂_z̄ f|²)，与 (1+k²)/(1−k²) 取较大者

    J ≤ 0 的未标记点记为方向违例，此时 K = inf。
    """
    K, _, _ = _dilatation_stats(f, graph, eps_zero, x_derivative)
    return K


def analyze_field(f: GradientField, graph: Optional[LipschitzGraph] = None,
                  eps_zero: float = FLAG_EPS, x_derivative: str = "spectral") -> Dict[str, Any]:
    """qr-analyze 与求解报告共用的统计量"""
    bf = beltrami(f, graph, eps_zero, x_derivative)
    K, violations, warnings = _dilatation_stats(f, graph, eps_zero, x_derivative)
    return {
        "mu_max": bf.k_sup,
        "mu_p999": bf.k_p999,
        "K_est": K,
        "orientation_violations": violations,
        "flagged_fraction": bf.flagged_fraction,
        "warnings": bf.warnings + warnings,
    }


@dataclass
class MultiplierField:
    """复乘子 B = −∂ₜf/Df，内部层"""
    grid: HalfPlaneGrid
    values: np.ndarray
    flagged: np.ndarray

    def to_matrix(self) -> np.ndarray:
        return multiplier_to_matrix(self.values)


def b_from_field(f: GradientField, eps_zero: float = FLAG_EPS) -> MultiplierField:
    grid = f.grid
    inner = _interior(grid)
    ft = t_derivative(f.values, grid)[inner]
    df = d_values(f.values, grid)[inner]
    mag = np.abs(df)
    scale = float(np.max(mag)) if mag.size else 0.0
    flagged = mag <= eps_zero * scale
    values = np.where(flagged, 0.0, -ft / np.where(flagged, 1.0, df))
    return MultiplierField(grid=grid, values=values, flagged=flagged)


def multiplier_to_matrix(b) -> np.ndarray:
    """乘以复数 b 的 2×2 实矩阵 [[Re b, −Im b], [Im b, Re b]]"""
    b = np.asarray(b, dtype=complex)
    br, bi = b.real, b.imag
    return np.stack([np.stack([br, -bi], axis=-1), np.stack([bi, br], axis=-1)], axis=-2)


def beltrami_to_matrix(mu) -> np.ndarray:
    """A_μ：a11 = |1−μ|²/(1−|μ|²)，a22 = |1+μ|²/(1−|μ|²)，a12 = a21 = −2 Im μ/(1−|μ|²)"""
    mu = np.asarray(mu, dtype=complex)
    m2 = np.abs(mu) ** 2
    if np.any(m2 >= 1.0):
        raise DegenerateEllipticityError(f"|mu| must be < 1, got max |mu| = {np.sqrt(np.max(m2)):.6g}")
    s = 1.0 / (1.0 - m2)
    a11 = np.abs(1 - mu) ** 2 * s
    a22 = np.abs(1 + mu) ** 2 * s
    a12 = -2.0 * mu.imag * s
    return np.stack([np.stack([a11, a12], axis=-1), np.stack([a12, a22], axis=-1)], axis=-2)


def ellipticity_eigenvalues(mu) -> Tuple[np.ndarray, np.ndarray]:
    """A_μ 的特征值 λ± = q ± √(q²−1)，q = (1+|μ|²)/(1−|μ|²)"""
    mu = np.asarray(mu, dtype=complex)
    m2 = np.abs(mu) ** 2
    if np.any(m2 >= 1.0):
        raise DegenerateEllipticityError(f"|mu| must be < 1, got max |mu| = {np.sqrt(np.max(m2)):.6g}")
    q = (1 + m2) / (1 - m2)
    root = np.sqrt(np.maximum(q * q - 1.0, 0.0))
    return q + root, q - root


def ellipticity_bound(beta: float) -> float:
    """|μ| ≤ β 时 λ₊ 的上界"""
    if not 0 <= beta < 1:
        raise DegenerateEllipticityError(f"beta must lie in [0, 1), got {beta}")
    q = (1 + beta * beta) / (1 - beta * beta)
    return float(q + np.sqrt(q * q - 1.0))


__all__ = [
    'BeltramiField', 'MultiplierField', 'partials', 'wirtinger', 'beltrami', 'dilatation',
    'analyze_field', 'b_from_field', 'multiplier_to_matrix', 'beltrami_to_matrix',
    'ellipticity_eigenvalues', 'ellipticity_bound', 'FLAG_EPS',
]
