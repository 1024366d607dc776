"""字符串表达式求值（边界曲线 φ、边界数据、通量 a(z)）

表达式只能使用下面白名单里的 numpy 函数和调用方给出的变量。
"""
from typing import Any, Dict

import numpy as np

from .errors import ConfigurationError

_NAMESPACE: Dict[str, Any] = {
    "pi": np.pi,
    "e": np.e,
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "arctan": np.arctan,
    "arctan2": np.arctan2,
    "abs": np.abs,
    "sign": np.sign,
    "where": np.where,
    "maximum": np.maximum,
    "minimum": np.minimum,
    "hypot": np.hypot,
}


def compile_expression(expr: str):
    try:
        return compile(expr, "<expression>", "eval")
    except SyntaxError as e:
        raise ConfigurationError(f"Invalid expression {expr!r}: {e}") from e


def evaluate_expression(expr: str, **variables) -> np.ndarray:
    """对表达式求值，返回与变量广播后同形状的数组

    Args:
        expr: 表达式字符串，例如 "0.3*sqrt(x**2+1)"
        variables: 变量名到数组/标量的映射
    Returns:
        np.ndarray
    """
    code = compile_expression(expr)
    scope = dict(_NAMESPACE)
    scope.update(variables)
    try:
        with np.errstate(all="ignore"):
            value = eval(code, {"__builtins__": {}}, scope)
    except Exception as e:
        raise ConfigurationError(f"Failed to evaluate expression {expr!r}: {e}") from e
    shape = np.broadcast(*[np.asarray(v) for v in variables.values()]).shape if variables else ()
    value = np.broadcast_to(np.asarray(value), shape).copy() if np.ndim(value) < len(shape) else np.asarray(value)
    if not np.all(np.isfinite(value)):
        raise ConfigurationError(f"Expression {expr!r} produced non-finite values")
    return value


__all__ = ['evaluate_expression', 'compile_expression']
