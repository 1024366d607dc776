"""一般 Lipschitz 图上的奇异核求积后端

窗口 [−L/2, L/2) 视为曲线的一个周期，核用 cot / csc² 周期化。

每个目标点 x_j 把核拆成两部分：
    冻结核：曲线在 x_j 处换成斜率 c_j = 1 + iφ′(x_j) 的直线，此时核是
        平坦核在复高度 τ/c_j 处的取值，x 方向对三角插值、s 方向对单元常数精确积分；
    修正核：真实核减冻结核。两者的 1/w（或 1/w²）主部相同，差只在曲率上，
        用单元求积（1/w 与 1/w² 在平行四边形上精确积分，周期余项取中点）。
平坦边界上修正为零，结果与傅里叶后端一致。
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional

import numpy as np
from scipy import fft

from ..config import worker_count
from ..errors import OperatorAccuracyError
from ..geometry import eval_phi, eval_phi_prime
from ..grid import BoundaryTrace, GradientField, HalfPlaneGrid, layer_weights
from ..logger import logger
from .base import OperatorBackend
from .kernels import (cot_kernel, cot_remainder, csc2_remainder, parallelogram_vertices,
                      polygon_inverse_integral, polygon_pv_inverse_square,
                      segment_cauchy_integral, wrap_periodic)
from .spectral import solid_weights

SOLID = "solid"
BEURLING = "beurling"


class QuadratureBackend(OperatorBackend):
    """一般 Lipschitz 边界：冻结斜率的精确部分加周期核的修正求积"""
    kind = "quadrature"

    def __init__(self, graph, tolerance: float = 1e-2, decay_tolerance: float = 1e-3,
                 near_factor: float = 4.0, cache_limit: int = 8_000_000,
                 max_workers: Optional[int] = None):
        """
        near_factor: |t| < near_factor·Δx 时 S₀ 的修正改用分段线性乘积积分
        cache_limit: 权重数组元素数上限，超出则每次重新计算
        """
        super().__init__(graph, tolerance, decay_tolerance)
        self.near_factor = float(near_factor)
        self.cache_limit = int(cache_limit)
        self.max_workers = max_workers
        self._geometry: Dict[HalfPlaneGrid, Dict[str, Any]] = {}
        self._weights: Dict[Any, np.ndarray] = {}

    def _workers(self, jobs: int) -> int:
        limit = self.max_workers if self.max_workers is not None else worker_count()
        return max(1, min(limit, jobs))

    def geometry(self, grid: HalfPlaneGrid) -> Dict[str, Any]:
        if grid in self._geometry:
            return self._geometry[grid]
        x = grid.x
        phi = np.asarray(eval_phi(self.graph, x), dtype=float)
        dphi = np.asarray(eval_phi_prime(self.graph, x), dtype=float)
        left, right = eval_phi(self.graph, -0.5 * grid.L), eval_phi(self.graph, 0.5 * grid.L)
        gap = abs(right - left)
        if gap > 1e-8 * max(1.0, abs(left)):
            msg = (f"graph is not periodic on the window: phi(L/2) - phi(-L/2) = {right - left:.3g}; "
                   f"the periodic kernels see a jump")
            logger.warning(msg)
            if msg not in self.warnings:
                self.warnings.append(msg)
        offset = wrap_periodic(x[None, :] - x[:, None], grid.L)
        n = np.arange(grid.N)
        geom = {
            "x": x,
            "phi": phi,
            "dphi": dphi,
            "curved": bool(np.any(dphi)),
            "zeta": x + 1j * phi,
            "c": 1.0 + 1j * dphi,
            # offset[j, m] = x_m − x_j 的最近像，delta[j, m] = ζ_m − ζ_j
            "offset": offset,
            "delta": offset + 1j * (phi[None, :] - phi[:, None]),
            "chord": grid.dx + 1j * (np.roll(phi, -1) - phi),
            # phase[j, n] = e^{iξ_n (x_j − x₀)}
            "phase": np.exp(2j * np.pi * np.outer(n, n) / grid.N),
        }
        self._geometry[grid] = geom
        return geom

    # ---- 边界算子 ----

    def _plemelj(self, g, zeta, c, h: float, L: float):
        """交错节点梯形公式：C g(x_j) = 2h Σ_{m−j 奇} g_m c_m (1/(iL)) cot(π(ζ_m−ζ_j)/L)"""
        n = g.size
        idx = np.arange(n)
        odd = (idx[None, :] - idx[:, None]) % 2 == 1
        diff = np.where(odd, zeta[None, :] - zeta[:, None], 0.5 * L)
        kern = np.where(odd, 1.0 / np.tan(np.pi * diff / L), 0.0)
        return 2.0 * h * (kern @ (g * c)) / (1j * L)

    def _zeta_mean(self, g: np.ndarray, grid: HalfPlaneGrid) -> complex:
        """(1/L)∫ g dζ；曲线上的常数部分，两侧 Cauchy 积分各得一半"""
        return complex(np.mean(g * self.geometry(grid)["c"]))

    def cauchy_principal_value(self, trace: BoundaryTrace) -> np.ndarray:
        """C_γ g，并与半密度网格上的同一公式比较估计误差"""
        grid = trace.grid
        geom = self.geometry(grid)
        g = trace.values
        full = self._plemelj(g, geom["zeta"], geom["c"], grid.dx, grid.L)
        half = self._plemelj(g[::2], geom["zeta"][::2], geom["c"][::2], 2 * grid.dx, grid.L)
        scale = max(float(np.max(np.abs(full))), float(np.max(np.abs(g))), np.finfo(float).tiny)
        error = float(np.max(np.abs(half - full[::2]))) / scale
        if error > self.tolerance:
            raise OperatorAccuracyError(
                f"Plemelj quadrature error estimate {error:.3g} exceeds tolerance {self.tolerance}")
        logger.debug(f"Plemelj quadrature error estimate: {error:.3g}")
        return full

    def hardy_projection(self, trace: BoundaryTrace, sign: int = 1) -> BoundaryTrace:
        """Ẽ^± g = ½(g̃ ± C g̃)，g̃ = g − (1/L)∫ g dζ；Ẽ⁺ + Ẽ⁻ 为去掉 ζ-均值的恒等"""
        sign = self._check_sign(sign)
        g = trace.values - self._zeta_mean(trace.values, trace.grid)
        cg = self.cauchy_principal_value(BoundaryTrace(trace.grid, g, project_mean=False))
        return BoundaryTrace(trace.grid, 0.5 * (g + sign * cg), trace.warnings, project_mean=False)

    def _frozen_cauchy(self, g: np.ndarray, t: float, grid: HalfPlaneGrid) -> np.ndarray:
        """冻结核：(1/c_j) Σ_ξ Ĝ(ξ) e^{iξx_j} e^{−|ξ||t|/c_j}，G = g·c，只取 t 一侧的频率"""
        geom = self.geometry(grid)
        c, xi = geom["c"], grid.xi
        side = xi > 0 if t > 0 else xi < 0
        decay = np.where(side[None, :], np.exp(-abs(t) * np.abs(xi)[None, :] / c[:, None]), 0.0)
        values = np.sum(decay * geom["phase"] * fft.fft(g * c)[None, :], axis=1) / (grid.N * c)
        return values if t > 0 else -values

    def _cauchy_sum(self, g: np.ndarray, t: float, grid: HalfPlaneGrid, frozen: bool) -> np.ndarray:
        """真实核（frozen=False）或冻结核（frozen=True）沿曲线的求积

        冻结核看作沿直线 ζ = c_j(x − x_j) 的 Cauchy 积分，密度 g·c/c_j。
        """
        geom = self.geometry(grid)
        L, dx = grid.L, grid.dx
        if frozen:
            slope = geom["c"][:, None]
            w = slope * geom["offset"] - 1j * t
            e = slope * dx
            density = g[None, :] * geom["c"][None, :] / slope
        else:
            slope = 1.0
            w = geom["delta"] - 1j * t
            e = geom["chord"][None, :]
            density = np.broadcast_to(g[None, :], w.shape)
        if abs(t) >= self.near_factor * dx:
            measure = e if frozen else dx * geom["c"][None, :]
            return np.sum(cot_kernel(w / slope, L) / slope * density * measure, axis=1) / (2j * np.pi)
        # 近场：减去 g(x_j)，分段线性密度在弦上精确积分 1/w，余项用梯形
        G_a = density - g[:, None]
        G_b = np.roll(G_a, -1, axis=1)
        w_b = w + e
        seg = segment_cauchy_integral(w, e, G_a, G_b)
        seg = seg + 0.5 * e * (G_a * cot_remainder(w / slope, L) + G_b * cot_remainder(w_b / slope, L)) / slope
        return np.sum(seg, axis=1) / (2j * np.pi) + np.sign(t) * 0.5 * g

    def _cauchy_at_height(self, g: np.ndarray, t: float, grid: HalfPlaneGrid) -> np.ndarray:
        g = g - self._zeta_mean(g, grid)
        values = self._frozen_cauchy(g, t, grid)
        if self.geometry(grid)["curved"]:
            values = values + self._cauchy_sum(g, t, grid, False) - self._cauchy_sum(g, t, grid, True)
        return values

    def boundary_cauchy(self, g: BoundaryTrace, t: float) -> BoundaryTrace:
        t = self._check_height(t)
        return BoundaryTrace(g.grid, self._cauchy_at_height(g.values, t, g.grid), project_mean=False)

    def boundary_cauchy_field(self, g: BoundaryTrace) -> GradientField:
        grid = g.grid
        rows = [self._cauchy_at_height(g.values, t, grid) for t in grid.t]
        return GradientField(grid, np.stack(rows))

    # ---- 面积分算子 ----

    def _frozen_weights(self, grid: HalfPlaneGrid, k: int, op: str) -> np.ndarray:
        """冻结核的权重 (K, N, N)：c_m/c_j · (1/N) Σ_n W(ξ_n; t_k, c_j) e^{iξ_n(x_j − x_m)}"""
        geom = self.geometry(grid)
        c = geom["c"]
        W = solid_weights(grid, [grid.t[k]], slope=c)[0]
        if op == BEURLING:
            W = W * grid.xi
        out = fft.fft(W * geom["phase"][None], axis=-1) / grid.N
        return out * (c[None, None, :] / c[None, :, None])

    def _cell_weights(self, grid: HalfPlaneGrid, k: int, op: str, frozen: bool) -> np.ndarray:
        """单元求积权重 (K, N, N)，不含 S 的局部项（真实核与冻结核的局部项相同）"""
        geom = self.geometry(grid)
        L, dx = grid.L, grid.dx
        edges = grid.cell_edges
        tk = grid.t[k]
        c = geom["c"][None, :]
        target = geom["c"][:, None]
        if frozen:
            slope, base, half = target, target * geom["offset"], 0.5 * dx * target
        else:
            slope, base, half = 1.0, geom["delta"], 0.5 * dx * c
        out = np.empty((grid.K, grid.N, grid.N), dtype=complex)
        for l in range(grid.K):
            lo, hi = edges[l] - tk, edges[l + 1] - tk
            vertices = parallelogram_vertices(base, half, lo, hi)
            center = base + 0.5j * (lo + hi)
            area = dx * (hi - lo)
            if op == SOLID:
                val = polygon_inverse_integral(vertices) + cot_remainder(center / slope, L) / slope * area
                out[l] = c * val / (2j * np.pi)
            else:
                val = (polygon_pv_inverse_square(vertices)
                       + csc2_remainder(center / slope, L) / slope ** 2 * area)
                out[l] = -target * c * val / (2 * np.pi)
        return out

    def _layer_weights(self, grid: HalfPlaneGrid, k: int, op: str) -> np.ndarray:
        """目标层 k 对全部源层的权重，形状 (K, N, N)，下标 [l, j, m]"""
        weights = self._frozen_weights(grid, k, op)
        if self.geometry(grid)["curved"]:
            weights = (weights + self._cell_weights(grid, k, op, False)
                       - self._cell_weights(grid, k, op, True))
        return weights

    def _all_weights(self, grid: HalfPlaneGrid, op: str) -> Optional[np.ndarray]:
        key = (grid, op)
        if key in self._weights:
            return self._weights[key]
        if grid.K * grid.K * grid.N * grid.N > self.cache_limit:
            return None
        self.geometry(grid)
        with ThreadPoolExecutor(max_workers=self._workers(grid.K)) as pool:
            rows = list(pool.map(lambda k: self._layer_weights(grid, k, op), range(grid.K)))
        weights = np.stack(rows)
        self._weights[key] = weights
        logger.debug(f"Cached {op} quadrature weights for {grid!r}")
        return weights

    def _apply(self, h: GradientField, op: str) -> np.ndarray:
        grid = h.grid
        weights = self._all_weights(grid, op)
        if weights is not None:
            return np.einsum("kljm,lm->kj", weights, h.values)

        def row(k):
            return np.einsum("ljm,lm->j", self._layer_weights(grid, k, op), h.values)

        self.geometry(grid)
        with ThreadPoolExecutor(max_workers=self._workers(grid.K)) as pool:
            rows = list(pool.map(row, range(grid.K)))
        return np.stack(rows)

    def solid_cauchy(self, h: GradientField) -> GradientField:
        warnings = self.check_decay(h)
        return GradientField(h.grid, self._apply(h, SOLID), h.warnings + warnings)

    def beurling(self, h: GradientField) -> GradientField:
        warnings = self.check_decay(h)
        return GradientField(h.grid, self._apply(h, BEURLING), h.warnings + warnings)

    def beurling_adjoint(self, h: GradientField) -> GradientField:
        grid = h.grid
        omega = layer_weights(grid)
        v = h.values * omega[:, None]
        weights = self._all_weights(grid, BEURLING)
        if weights is not None:
            out = np.einsum("kljm,kj->lm", np.conj(weights), v)
        else:
            out = np.zeros((grid.K, grid.N), dtype=complex)
            for k in range(grid.K):
                out += np.einsum("ljm,j->lm", np.conj(self._layer_weights(grid, k, BEURLING)), v[k])
        return GradientField(grid, out / omega[:, None])


__all__ = ['QuadratureBackend']
