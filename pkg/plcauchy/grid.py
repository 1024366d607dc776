"""半平面网格、边界迹、梯度场以及离散范数

约定:
    x_j = −L/2 + jΔx (j = 0..N−1)，周期 L
    ĥ(ξ) = Σ h e^{−iξx} Δx，ξ = 2π·fftfreq(N, Δx)
    D = −i∂ₓ 的乘子是 ξ
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import fft, special

from .errors import ConfigurationError
from .logger import logger

GEOMETRIC = "geometric"
UNIFORM = "uniform"


@dataclass(frozen=True)
class HalfPlaneGrid:
    """x 方向 N 点均匀周期网格 × t 方向 K 层"""
    N: int
    L: float
    t_layers: Tuple[float, ...]
    sigma: float = 0.5

    def __post_init__(self):
        if self.N < 8 or self.N & (self.N - 1):
            raise ConfigurationError(f"grid.N must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ConfigurationError(f"grid.L must be > 0, got {self.L}")
        t = np.asarray(self.t_layers, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ConfigurationError("grid needs at least one t-layer")
        if not t[0] > 0 or np.any(np.diff(t) <= 0):
            raise ConfigurationError("t-layers must be positive and strictly increasing")
        if not 0 < self.sigma < 1:
            raise ConfigurationError(f"sigma must lie in (0, 1), got {self.sigma}")
        object.__setattr__(self, "t_layers", tuple(float(v) for v in t))

    @classmethod
    def build(cls, N: int, L: float, t1: float, tmax: float, layers: int, sigma: float = 0.5,
              spacing: str = GEOMETRIC, growth: Optional[float] = None) -> "HalfPlaneGrid":
        """按配置生成 t 层

        spacing=geometric 时 t_k = t1·r^{k−1}；给出 growth 则 r = growth（忽略 tmax），
        否则 r 由 t_K = tmax 决定。spacing=uniform 时 t 在 [t1, tmax] 上等距。
        """
        if layers < 1:
            raise ConfigurationError("grid.layers must be >= 1")
        if not 0 < t1 <= tmax:
            raise ConfigurationError(f"grid needs 0 < t1 <= tmax, got t1={t1}, tmax={tmax}")
        if spacing == GEOMETRIC:
            if growth is not None:
                if not growth > 1:
                    raise ConfigurationError("grid.growth must be > 1")
                t = t1 * growth ** np.arange(layers)
            else:
                t = np.geomspace(t1, tmax, layers)
        elif spacing == UNIFORM:
            t = np.linspace(t1, tmax, layers)
        else:
            raise ConfigurationError(f"Unsupported grid spacing: {spacing}")
        return cls(N=int(N), L=float(L), t_layers=tuple(t), sigma=float(sigma))

    @property
    def K(self) -> int:
        return len(self.t_layers)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.L + self.dx * np.arange(self.N)

    @property
    def t(self) -> np.ndarray:
        return np.asarray(self.t_layers)

    @property
    def xi(self) -> np.ndarray:
        return 2 * np.pi * fft.fftfreq(self.N, d=self.dx)

    @property
    def cell_edges(self) -> np.ndarray:
        """s 方向的对偶单元边界 c_0 = 0 < c_1 < … < c_K"""
        t = self.t
        if t.size == 1:
            return np.array([0.0, 2.0 * t[0]])
        mid = 0.5 * (t[1:] + t[:-1])
        return np.concatenate([[0.0], mid, [t[-1] + 0.5 * (t[-1] - t[-2])]])

    @property
    def cell_widths(self) -> np.ndarray:
        return np.diff(self.cell_edges)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """返回 (X, T)，形状 (K, N)"""
        return np.meshgrid(self.x, self.t, indexing="xy")

    def with_layers(self, t_layers: Sequence[float]) -> "HalfPlaneGrid":
        return HalfPlaneGrid(N=self.N, L=self.L, t_layers=tuple(t_layers), sigma=self.sigma)

    def to_dict(self):
        return {"N": self.N, "L": self.L, "sigma": self.sigma, "t_layers": list(self.t_layers)}

    def __repr__(self):
        return (f"HalfPlaneGrid(N={self.N}, L={self.L}, K={self.K}, "
                f"t=[{self.t_layers[0]:.3g}, {self.t_layers[-1]:.3g}], sigma={self.sigma})")


class BoundaryTrace:
    """x 网格上的复值边界数据，构造时去掉零频（均值）

    弯曲边界上算子在 t ≠ 0 处的输出不一定零均值，此时传 project_mean=False。
    """

    def __init__(self, grid: HalfPlaneGrid, values, warnings: Sequence[str] = (),
                 project_mean: bool = True):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.N,):
            raise ConfigurationError(f"trace needs shape ({grid.N},), got {values.shape}")
        self.grid = grid
        self.values = values - values.mean() if project_mean else values.copy()
        self.warnings = tuple(warnings)

    @classmethod
    def from_function(cls, grid: HalfPlaneGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "BoundaryTrace":
        return cls(grid, np.broadcast_to(fn(grid.x), (grid.N,)))

    @classmethod
    def zeros(cls, grid: HalfPlaneGrid) -> "BoundaryTrace":
        return cls(grid, np.zeros(grid.N, dtype=complex))

    def with_values(self, values) -> "BoundaryTrace":
        return BoundaryTrace(self.grid, values, self.warnings, project_mean=False)

    def norm(self) -> float:
        return float(np.sqrt(self.grid.dx * np.sum(np.abs(self.values) ** 2)))

    def __add__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "BoundaryTrace") -> "BoundaryTrace":
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "BoundaryTrace":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"BoundaryTrace(N={self.grid.N}, norm={self.norm():.6g}, warnings={len(self.warnings)})"


class GradientField:
    """K×N 复数组 f(x_j, t_k) = f1 + i f2"""

    def __init__(self, grid: HalfPlaneGrid, values, warnings: Sequence[str] = ()):
        values = np.asarray(values, dtype=complex)
        if values.shape != (grid.K, grid.N):
            raise ConfigurationError(f"field needs shape ({grid.K}, {grid.N}), got {values.shape}")
        self.grid = grid
        self.values = values
        self.warnings = tuple(warnings)

    @classmethod
    def from_function(cls, grid: HalfPlaneGrid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "GradientField":
        X, T = grid.mesh()
        return cls(grid, np.broadcast_to(fn(X, T), (grid.K, grid.N)))

    @classmethod
    def zeros(cls, grid: HalfPlaneGrid) -> "GradientField":
        return cls(grid, np.zeros((grid.K, grid.N), dtype=complex))

    def with_values(self, values) -> "GradientField":
        return GradientField(self.grid, values, self.warnings)

    def layer(self, k: int, project_mean: bool = True) -> BoundaryTrace:
        return BoundaryTrace(self.grid, self.values[k], project_mean=project_mean)

    def __add__(self, other: "GradientField") -> "GradientField":
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GradientField") -> "GradientField":
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar) -> "GradientField":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"GradientField(K={self.grid.K}, N={self.grid.N}, sup={np.max(np.abs(self.values)):.6g})"


FieldOrTrace = Union[BoundaryTrace, GradientField]


def to_fourier(values: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    return grid.dx * fft.fft(values, axis=-1)


def from_fourier(coeffs: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    return fft.ifft(coeffs, axis=-1) / grid.dx


def apply_multiplier(values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    return fft.ifft(multiplier * fft.fft(values, axis=-1), axis=-1)


def d_values(values: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    return apply_multiplier(values, grid.xi)


def d_operator(obj: FieldOrTrace) -> FieldOrTrace:
    """D = −i∂ₓ，逐层傅里叶乘子 ξ"""
    return obj.with_values(d_values(obj.values, obj.grid))


def x_derivative(values: np.ndarray, grid: HalfPlaneGrid, mode: str = "spectral") -> np.ndarray:
    """∂ₓ（t 固定）；mode=difference 用于窗口上不周期的场"""
    if mode == "spectral":
        return 1j * d_values(values, grid)
    if mode == "difference":
        return np.gradient(values, grid.dx, axis=-1, edge_order=2)
    raise ConfigurationError(f"Unsupported x_derivative mode: {mode}")


def t_derivative(values: np.ndarray, grid: HalfPlaneGrid) -> np.ndarray:
    """层网格上的中心差分（首末层单侧）"""
    if grid.K < 2:
        raise ConfigurationError("t-derivative needs at least two layers")
    return np.gradient(values, grid.t, axis=0)


def sobolev_norm(trace: BoundaryTrace, sigma: Optional[float] = None) -> float:
    """Ḣ^σ 范数 ((1/L) Σ_{ξ≠0} |ξ|^{2σ} |ĥ(ξ)|²)^{1/2}"""
    grid = trace.grid
    sigma = grid.sigma if sigma is None else sigma
    if not 0 <= sigma <= 1:
        raise ConfigurationError(f"sigma must lie in [0, 1], got {sigma}")
    coeffs = to_fourier(trace.values, grid)
    xi = np.abs(grid.xi)
    nz = xi > 0
    total = np.sum(xi[nz] ** (2 * sigma) * np.abs(coeffs[nz]) ** 2) / grid.L
    return float(np.sqrt(total))


def gagliardo_constant(sigma: float) -> float:
    """全直线上 Gagliardo 双积分与 ‖·‖²_{Ḣ^σ} 之比"""
    return float(2 * np.pi / (special.gamma(1 + 2 * sigma) * np.sin(np.pi * sigma)))


def gagliardo_seminorm(trace: BoundaryTrace, sigma: Optional[float] = None) -> float:
    """(∬ |h(x)−h(x′)|² / |x−x′|^{1+2σ} dx dx′)^{1/2}

    窗口外 h 取 0。窗口内的点对用线性自相关（2N 补零 FFT）求和，
    窗口外的积分用闭式，被排除的对角单元用端点修正补回。
    """
    grid = trace.grid
    sigma = grid.sigma if sigma is None else sigma
    if not 0 < sigma < 1:
        raise ConfigurationError(f"sigma must lie in (0, 1), got {sigma}")
    h = trace.values
    N, dx = grid.N, grid.dx
    if not np.any(h):
        return 0.0
    m = np.arange(1, N)
    w = (m * dx) ** (-1.0 - 2 * sigma)
    cum = np.concatenate([[0.0], np.cumsum(w)])
    j = np.arange(N)
    row_weight = cum[j] + cum[N - 1 - j]
    power = np.abs(h) ** 2

    spec = fft.fft(h, n=2 * N)
    corr = fft.ifft(np.abs(spec) ** 2)
    # corr[m] = Σ_j h_{j+m} conj(h_j)，负偏移在末尾
    cross = np.sum(w * corr[1:N].real) + np.sum(w * corr[-1:-N:-1].real)
    inside = dx * dx * (2 * np.sum(power * row_weight) - 2 * cross)

    left = (j + 0.5) * dx
    right = (N - j - 0.5) * dx
    outside = 2 * dx * np.sum(power * (left ** (-2 * sigma) + right ** (-2 * sigma))) / (2 * sigma)

    slope2 = np.abs(d_values(h, grid)) ** 2
    diagonal = -2 * (special.zetac(2 * sigma - 1) + 1.0) * dx ** (2 - 2 * sigma) * dx * np.sum(slope2)

    total = inside + outside + diagonal
    return float(np.sqrt(max(total, 0.0)))


def layer_weights(grid: HalfPlaneGrid, sigma: Optional[float] = None) -> np.ndarray:
    """∫₀^∞ F(t) t^{1−2σ} dt ≈ Σ_k ω_k F(t_k) 的权重

    层上梯形公式，(0, t₁) 上取 F(t₁)·t₁^{2−2σ}/(2−2σ)。
    """
    sigma = grid.sigma if sigma is None else sigma
    t = grid.t
    trap = np.zeros_like(t)
    if t.size > 1:
        gaps = np.diff(t)
        trap[:-1] += 0.5 * gaps
        trap[1:] += 0.5 * gaps
    omega = trap * t ** (1 - 2 * sigma)
    omega[0] += t[0] ** (2 - 2 * sigma) / (2 - 2 * sigma)
    return omega


def layer_integral(per_layer: np.ndarray, grid: HalfPlaneGrid, sigma: Optional[float] = None) -> float:
    """∫₀^∞ F(t) t^{1−2σ} dt，F 为每层的 x 积分"""
    return float(np.sum(layer_weights(grid, sigma) * per_layer))


def weighted_l2_norm(values: np.ndarray, grid: HalfPlaneGrid, sigma: Optional[float] = None) -> float:
    """L₂(ℝ²₊, t^{1−2σ}) 范数"""
    per_layer = grid.dx * np.sum(np.abs(values) ** 2, axis=-1)
    return float(np.sqrt(max(layer_integral(per_layer, grid, sigma), 0.0)))


def weighted_h1_seminorm(field: GradientField, sigma: Optional[float] = None) -> float:
    """(∬ (|∂ₓf|² + |∂ₜf|²) t^{1−2σ} dx dt)^{1/2}"""
    grid = field.grid
    if grid.K < 2:
        raise ConfigurationError("weighted_h1_seminorm needs at least two t-layers")
    dxf = d_values(field.values, grid)
    dtf = t_derivative(field.values, grid)
    per_layer = grid.dx * np.sum(np.abs(dxf) ** 2 + np.abs(dtf) ** 2, axis=-1)
    return float(np.sqrt(max(layer_integral(per_layer, grid, sigma), 0.0)))


def trace_limit(field: GradientField, tolerance: float = 1e-4) -> BoundaryTrace:
    """t → 0⁺ 的迹：用最低两层做线性外推，与三层二次外推比较"""
    grid = field.grid
    if grid.K < 3:
        raise ConfigurationError("trace_limit needs at least three t-layers")
    t1, t2, t3 = grid.t[:3]
    f1, f2, f3 = field.values[:3]
    linear = (t2 * f1 - t1 * f2) / (t2 - t1)
    quadratic = (f1 * t2 * t3 / ((t1 - t2) * (t1 - t3))
                 + f2 * t1 * t3 / ((t2 - t1) * (t2 - t3))
                 + f3 * t1 * t2 / ((t3 - t1) * (t3 - t2)))
    linear = linear - linear.mean()
    quadratic = quadratic - quadratic.mean()
    scale = max(np.linalg.norm(quadratic), np.linalg.norm(linear), np.finfo(float).tiny)
    gap = float(np.linalg.norm(linear - quadratic) / scale)
    warnings = []
    if gap > tolerance:
        msg = f"ill-resolved trace: linear and quadratic extrapolation differ by {gap:.3g} (relative)"
        logger.warning(msg)
        warnings.append(msg)
    return BoundaryTrace(grid, linear, warnings)


__all__ = [
    'HalfPlaneGrid', 'BoundaryTrace', 'GradientField', 'GEOMETRIC', 'UNIFORM',
    'to_fourier', 'from_fourier', 'apply_multiplier', 'd_values', 'd_operator', 'x_derivative', 't_derivative',
    'sobolev_norm', 'gagliardo_constant', 'gagliardo_seminorm', 'layer_weights', 'layer_integral',
    'weighted_l2_norm', 'weighted_h1_seminorm', 'trace_limit',
]
