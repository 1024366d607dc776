"""平坦边界 (φ ≡ 0) 上的精确傅里叶乘子后端"""
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import fft

from ..errors import ConfigurationError
from ..grid import BoundaryTrace, GradientField, HalfPlaneGrid, layer_weights
from ..logger import logger
from .base import OperatorBackend


def _one_sided(offset, length, rate):
    """∫ e^{−(offset+u)·rate} du over u ∈ [0, length]，Re rate > 0"""
    return np.exp(-offset * rate) * (-np.expm1(-length * rate)) / rate


def _split_cells(grid: HalfPlaneGrid, targets, extra: int = 0):
    """对偶单元在目标高度处分成下、上两段：(t, top, bottom, len_lo, len_hi)

    数组形状为 (len(targets), K) 后接 extra + 1 个长度为 1 的轴。
    """
    edges = grid.cell_edges
    tail = (1,) * (extra + 1)
    lo = edges[:-1].reshape((1, grid.K) + tail)
    hi = edges[1:].reshape((1, grid.K) + tail)
    t = np.asarray(targets, dtype=float).reshape((-1, 1) + tail)
    top = np.minimum(hi, t)
    bottom = np.maximum(lo, t)
    return t, top, bottom, np.maximum(top - lo, 0.0), np.maximum(hi - bottom, 0.0)


def solid_weights(grid: HalfPlaneGrid, targets, slope: Optional[np.ndarray] = None) -> np.ndarray:
    """S̃ 的逐频率权重，形状 (len(targets), K, N)

    源数据在对偶单元 [c_{l−1}, c_l] 上取常数，s 方向的核精确积分；
    ξ = 0 处取两个单侧极限的平均。给出 slope（长度 N 的复斜率 c_j）时，
    衰减率为 |ξ|/c_j，结果形状 (len(targets), K, N_j, N)。
    """
    xi = grid.xi
    if slope is None:
        t, top, bottom, len_lo, len_hi = _split_cells(grid, targets)
        rate = np.abs(xi)
    else:
        t, top, bottom, len_lo, len_hi = _split_cells(grid, targets, extra=1)
        rate = np.abs(xi)[None, :] / np.asarray(slope, dtype=complex)[:, None]
    rate = np.where(xi == 0, 1.0, rate)
    lower = _one_sided(t - top, len_lo, rate)
    upper = _one_sided(bottom - t, len_hi, rate)
    return np.where(xi > 0, lower, np.where(xi < 0, -upper, 0.5 * (len_lo - len_hi)))


def beurling_weights(grid: HalfPlaneGrid, targets) -> np.ndarray:
    """S 的逐频率权重，形状 (len(targets), K, N)

    核 Λ₀e^{−|t−s|Λ₀} 在单元上的积分直接写成两端指数之差：
    ξ > 0 取 s < t 的部分，ξ < 0 取 s > t 的部分，ξ = 0 为 0。
    """
    t, top, bottom, len_lo, len_hi = _split_cells(grid, targets)
    xi = grid.xi
    lam = np.abs(xi)
    lower = np.where(len_lo > 0, np.exp(-lam * (t - top)) - np.exp(-lam * (t - top + len_lo)), 0.0)
    upper = np.where(len_hi > 0, np.exp(-lam * (bottom - t)) - np.exp(-lam * (bottom - t + len_hi)), 0.0)
    return np.where(xi > 0, lower, np.where(xi < 0, upper, 0.0))


class SpectralBackend(OperatorBackend):
    """spectral-flat：Ẽ₀^± = χ_{±ξ>0}，S₀ = e^{−t|ξ|}χ，S̃ 与 S 为逐频率的 s 积分"""
    kind = "spectral"

    def __init__(self, graph, tolerance: float = 1e-2, decay_tolerance: float = 1e-3):
        super().__init__(graph, tolerance, decay_tolerance)
        if not graph.is_flat:
            raise ConfigurationError(f"spectral backend requires a flat graph, got kind={graph.kind}")
        self._weights: Dict[Tuple[HalfPlaneGrid, str], np.ndarray] = {}

    def _cached(self, grid: HalfPlaneGrid, op: str) -> np.ndarray:
        key = (grid, op)
        if key not in self._weights:
            build = solid_weights if op == "solid" else beurling_weights
            self._weights[key] = build(grid, grid.t)
            logger.debug(f"Built spectral {op} weights for {grid!r}")
        return self._weights[key]

    def hardy_projection(self, trace: BoundaryTrace, sign: int = 1) -> BoundaryTrace:
        sign = self._check_sign(sign)
        xi = trace.grid.xi
        mask = (sign * xi > 0).astype(float)
        values = fft.ifft(mask * fft.fft(trace.values))
        return BoundaryTrace(trace.grid, values, trace.warnings)

    def _cauchy_multiplier(self, grid: HalfPlaneGrid, t):
        xi = grid.xi
        t = np.asarray(t, dtype=float)[..., None]
        decay = np.exp(-np.abs(t) * np.abs(xi))
        return np.where(t > 0, decay * (xi > 0), -decay * (xi < 0))

    def boundary_cauchy(self, g: BoundaryTrace, t: float) -> BoundaryTrace:
        t = self._check_height(t)
        mult = self._cauchy_multiplier(g.grid, [t])[0]
        return BoundaryTrace(g.grid, fft.ifft(mult * fft.fft(g.values)))

    def boundary_cauchy_field(self, g: BoundaryTrace) -> GradientField:
        grid = g.grid
        mult = self._cauchy_multiplier(grid, grid.t)
        return GradientField(grid, fft.ifft(mult * fft.fft(g.values)[None, :], axis=-1))

    def solid_cauchy(self, h: GradientField) -> GradientField:
        warnings = self.check_decay(h)
        W = self._cached(h.grid, "solid")
        H = fft.fft(h.values, axis=-1)
        out = fft.ifft(np.einsum("kln,ln->kn", W, H), axis=-1)
        return GradientField(h.grid, out, h.warnings + warnings)

    def solid_cauchy_trace(self, h: GradientField) -> BoundaryTrace:
        W0 = solid_weights(h.grid, [0.0])[0]
        H = fft.fft(h.values, axis=-1)
        return BoundaryTrace(h.grid, fft.ifft(np.sum(W0 * H, axis=0)))

    def beurling(self, h: GradientField) -> GradientField:
        warnings = self.check_decay(h)
        grid = h.grid
        W = self._cached(grid, "beurling")
        H = fft.fft(h.values, axis=-1)
        out = fft.ifft(np.einsum("kln,ln->kn", W, H), axis=-1)
        return GradientField(grid, out, h.warnings + warnings)

    def beurling_adjoint(self, h: GradientField) -> GradientField:
        grid = h.grid
        W = self._cached(grid, "beurling")
        omega = layer_weights(grid)
        H = fft.fft(h.values, axis=-1) * omega[:, None]
        out = np.einsum("kln,kn->ln", np.conj(W), H)
        return GradientField(grid, fft.ifft(out, axis=-1) / omega[:, None])


__all__ = ['SpectralBackend', 'solid_weights', 'beurling_weights']
