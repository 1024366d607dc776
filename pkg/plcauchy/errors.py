"""异常层次

配置类错误继承 ValueError，求解类错误可携带报告（report），CLI 据此决定退出码。
"""
from typing import Any, Dict, Optional


class PLCauchyError(Exception):
    """所有 plcauchy 异常的基类"""


class ConfigurationError(PLCauchyError, ValueError):
    """配置/输入不合法，CLI 退出码 2"""


class PointOutsideDomainError(ConfigurationError):
    """点不在区域 y > φ(x) 内"""


class InvariantViolation(PLCauchyError):
    """内部不变量被破坏（例如 Δ ≤ 0），属于致命错误"""


class DegenerateEllipticityError(PLCauchyError, ValueError):
    """|μ| ≥ 1，椭圆矩阵退化"""


class SolverError(PLCauchyError):
    """求解失败，CLI 退出码 3；report 为失败时的完整报告"""
    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.report = report


class OperatorAccuracyError(SolverError):
    """奇异积分求积精度不足"""


class ContractionError(SolverError):
    """Neumann 级数发散"""
    def __init__(self, message: str, estimate: float, report: Optional[Dict[str, Any]] = None):
        super().__init__(message, report)
        self.estimate = estimate


class BoundaryFitError(SolverError):
    """边界方程迭代失败"""


class BoundaryFitStagnation(BoundaryFitError):
    """边界方程迭代停滞（内部使用，触发减半阻尼重试）"""


class FixedPointError(SolverError):
    """外层不动点迭代未收敛"""


__all__ = [
    'PLCauchyError', 'ConfigurationError', 'PointOutsideDomainError',
    'InvariantViolation', 'DegenerateEllipticityError', 'SolverError',
    'OperatorAccuracyError', 'ContractionError', 'BoundaryFitError',
    'BoundaryFitStagnation', 'FixedPointError',
]
