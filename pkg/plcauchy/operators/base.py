from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..geometry import LipschitzGraph
from ..grid import BoundaryTrace, GradientField, layer_weights, trace_limit
from ..logger import logger


class OperatorBackend:
    """算子后端基类，定义接口规范

    子类实现 S₀、Ẽ₀^±、S̃、S 以及 S 在加权空间 L₂(ℝ²₊, t^{1−2σ}) 中的伴随。
    """
    kind: str = "base"

    def __init__(self, graph: LipschitzGraph, tolerance: float = 1e-2, decay_tolerance: float = 1e-3):
        """
        tolerance: 求积精度容差（相对），超出时抛 OperatorAccuracyError
        decay_tolerance: 顶层 |h| 相对 sup|h| 的上限，超出时给出截断警告
        """
        if not tolerance > 0:
            raise ConfigurationError(f"backend.tolerance must be > 0, got {tolerance}")
        self.graph = graph
        self.tolerance = float(tolerance)
        self.decay_tolerance = float(decay_tolerance)
        self.warnings: List[str] = []

    def hardy_projection(self, trace: BoundaryTrace, sign: int = 1) -> BoundaryTrace:
        raise NotImplementedError

    def boundary_cauchy(self, g: BoundaryTrace, t: float) -> BoundaryTrace:
        raise NotImplementedError

    def boundary_cauchy_field(self, g: BoundaryTrace) -> GradientField:
        """S₀g 在网格全部 t 层上的取值"""
        raise NotImplementedError

    def solid_cauchy(self, h: GradientField) -> GradientField:
        raise NotImplementedError

    def beurling(self, h: GradientField) -> GradientField:
        raise NotImplementedError

    def beurling_adjoint(self, h: GradientField) -> GradientField:
        """S 在加权内积 Σ_k ω_k Σ_j u·v̄ Δx 下的伴随"""
        raise NotImplementedError

    def solid_cauchy_trace(self, h: GradientField) -> BoundaryTrace:
        """(S̃h) 在 t = 0 处的迹；默认由最低层外推"""
        return trace_limit(self.solid_cauchy(h))

    def _check_sign(self, sign: int) -> int:
        if sign not in (1, -1):
            raise ConfigurationError(f"projection sign must be +1 or -1, got {sign}")
        return sign

    def _check_height(self, t: float) -> float:
        if t == 0:
            raise ConfigurationError("boundary_cauchy needs t != 0; use hardy_projection at t = 0")
        return float(t)

    def check_decay(self, h: GradientField) -> Tuple[str, ...]:
        """S̃ 在 t_K 之上截断，顶层质量过大时返回警告"""
        peak = float(np.max(np.abs(h.values))) if h.values.size else 0.0
        if peak == 0.0:
            return ()
        top = float(np.max(np.abs(h.values[-1])))
        if top > self.decay_tolerance * peak:
            msg = f"truncation: top layer carries {top / peak:.3g} of the peak magnitude"
            if any(w.startswith("truncation:") for w in self.warnings):
                logger.debug(msg)
            else:
                logger.warning(msg)
                self.warnings.append(msg)
            return (msg,)
        return ()

    def estimate_weighted_norm(self, grid, iterations: int = 30, seed: int = 0,
                               sigma: Optional[float] = None) -> float:
        """幂迭代估计 ‖S‖ 在离散加权空间上的算子范数"""
        rng = np.random.default_rng(seed)
        omega = layer_weights(grid, sigma)[:, None] * grid.dx
        u = rng.normal(size=(grid.K, grid.N)) + 1j * rng.normal(size=(grid.K, grid.N))
        u = GradientField(grid, u)
        estimate = 0.0
        for _ in range(iterations):
            norm = np.sqrt(np.sum(omega * np.abs(u.values) ** 2))
            if norm == 0:
                return 0.0
            u = u * (1.0 / norm)
            v = self.beurling_adjoint(self.beurling(u))
            estimate = float(np.sqrt(np.sum(omega * np.abs(v.values) ** 2)))
            u = v
        norm = float(np.sqrt(estimate))
        logger.debug(f"Weighted operator norm estimate for S: {norm:.6g} ({iterations} iterations)")
        return norm

    def __repr__(self):
        return f"{self.__class__.__name__}(graph={self.graph!r}, tolerance={self.tolerance})"


__all__ = ['OperatorBackend']
