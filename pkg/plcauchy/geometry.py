"""Lipschitz 图边界 y = φ(x) 与坐标拉回 (x, y) ↔ (x, t)，t = y − φ(x)"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, PointOutsideDomainError
from .expressions import evaluate_expression
from .logger import logger

FLAT = "flat"
PIECEWISE_LINEAR = "piecewise_linear"
CLOSED_FORM = "closed_form"
GRAPH_KINDS = (FLAT, PIECEWISE_LINEAR, CLOSED_FORM)

_KIND_ALIASES = {
    "flat": FLAT,
    "pwl": PIECEWISE_LINEAR,
    "piecewise-linear": PIECEWISE_LINEAR,
    "piecewise_linear": PIECEWISE_LINEAR,
    "closed-form": CLOSED_FORM,
    "closed_form": CLOSED_FORM,
    "expr": CLOSED_FORM,
}


@dataclass(frozen=True)
class LipschitzGraph:
    """边界曲线

    kind:
        flat              φ ≡ 0
        piecewise_linear  节点间线性插值，节点范围外常数延拓
        closed_form       表达式 expr（变量 x），导数用 dexpr 或中心差分
    """
    kind: str = FLAT
    lipschitz_bound: float = 0.0
    knots: Tuple[Tuple[float, float], ...] = ()
    expr: Optional[str] = None
    dexpr: Optional[str] = None
    _knot_x: np.ndarray = field(default=None, init=False, repr=False, compare=False)
    _knot_y: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind)
        if kind is None:
            raise ConfigurationError(f"Unsupported graph kind: {self.kind}")
        object.__setattr__(self, "kind", kind)
        if self.lipschitz_bound < 0:
            raise ConfigurationError("phi.lipschitz_bound must be >= 0")
        if kind == FLAT:
            if self.lipschitz_bound != 0.0:
                raise ConfigurationError("flat graph has lipschitz_bound 0")
        elif kind == PIECEWISE_LINEAR:
            if len(self.knots) < 2:
                raise ConfigurationError("piecewise_linear graph needs at least two knots")
            knots = tuple((float(a), float(b)) for a, b in self.knots)
            xs = np.array([k[0] for k in knots])
            if np.any(np.diff(xs) <= 0):
                raise ConfigurationError("phi.knots must have strictly increasing x")
            object.__setattr__(self, "knots", knots)
            object.__setattr__(self, "_knot_x", xs)
            object.__setattr__(self, "_knot_y", np.array([k[1] for k in knots]))
        else:
            if not self.expr:
                raise ConfigurationError("closed_form graph needs phi.expr")
            # 尽早暴露表达式错误
            evaluate_expression(self.expr, x=np.zeros(1))
            if self.dexpr:
                evaluate_expression(self.dexpr, x=np.zeros(1))

    @classmethod
    def flat(cls) -> "LipschitzGraph":
        return cls(kind=FLAT)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LipschitzGraph":
        allowed = {"kind", "knots", "expr", "dexpr", "lipschitz_bound"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigurationError(f"Unknown phi keys: {sorted(unknown)}")
        kind = data.get("kind", FLAT)
        return cls(
            kind=kind,
            lipschitz_bound=float(data.get("lipschitz_bound", 0.0)),
            knots=tuple(tuple(k) for k in data.get("knots", ())),
            expr=data.get("expr"),
            dexpr=data.get("dexpr"),
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "lipschitz_bound": self.lipschitz_bound}
        if self.kind == PIECEWISE_LINEAR:
            data["knots"] = [list(k) for k in self.knots]
        if self.kind == CLOSED_FORM:
            data["expr"] = self.expr
            if self.dexpr:
                data["dexpr"] = self.dexpr
        return data

    @property
    def is_flat(self) -> bool:
        return self.kind == FLAT

    def __repr__(self):
        return f"LipschitzGraph(kind={self.kind}, lipschitz_bound={self.lipschitz_bound})"


def eval_phi(graph: LipschitzGraph, x):
    xa = np.asarray(x, dtype=float)
    if graph.kind == FLAT:
        out = np.zeros_like(xa)
    elif graph.kind == PIECEWISE_LINEAR:
        # np.interp 在节点范围外取端点值，即常数延拓
        out = np.interp(xa, graph._knot_x, graph._knot_y)
    else:
        out = evaluate_expression(graph.expr, x=xa).astype(float)
    return float(out) if np.ndim(x) == 0 else out


def eval_phi_prime(graph: LipschitzGraph, x):
    """φ′(x)；分段线性时在节点处取左侧线段的斜率"""
    xa = np.asarray(x, dtype=float)
    if graph.kind == FLAT:
        out = np.zeros_like(xa)
    elif graph.kind == PIECEWISE_LINEAR:
        kx, ky = graph._knot_x, graph._knot_y
        slopes = np.diff(ky) / np.diff(kx)
        # side='left': x == kx[i] 落在第 i 段（左段）
        idx = np.searchsorted(kx, xa, side="left")
        inside = (idx >= 1) & (idx <= len(kx) - 1)
        out = np.where(inside, slopes[np.clip(idx - 1, 0, len(slopes) - 1)], 0.0)
    elif graph.dexpr:
        out = evaluate_expression(graph.dexpr, x=xa).astype(float)
    else:
        step = 1e-6 * np.maximum(1.0, np.abs(xa))
        out = (evaluate_expression(graph.expr, x=xa + step)
               - evaluate_expression(graph.expr, x=xa - step)) / (2 * step)
    return float(out) if np.ndim(x) == 0 else out


def pullback_point(graph: LipschitzGraph, x: float, y: float) -> Tuple[float, float]:
    t = y - eval_phi(graph, x)
    if not t > 0:
        raise PointOutsideDomainError(f"Point ({x}, {y}) is not above the graph (t={t})")
    return x, t


def pushforward_point(graph: LipschitzGraph, x: float, t: float) -> Tuple[float, float]:
    return x, t + eval_phi(graph, x)


def pullback(graph: LipschitzGraph, x, y):
    """数组版拉回，不做区域检查"""
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float) - eval_phi(graph, x)


def pushforward(graph: LipschitzGraph, x, t):
    return np.asarray(x, dtype=float), np.asarray(t, dtype=float) + eval_phi(graph, x)


def check_lipschitz(graph: LipschitzGraph, x_min: float = -50.0, x_max: float = 50.0,
                    samples: int = 1_000_000) -> float:
    """在均匀采样点上检查 |φ′| ≤ M，返回采样最大值

    数值求导时容差放宽到 1e-8。
    """
    xs = np.linspace(x_min, x_max, samples)
    sup = float(np.max(np.abs(eval_phi_prime(graph, xs)))) if samples > 0 else 0.0
    slack = 1e-8 if (graph.kind == CLOSED_FORM and not graph.dexpr) else 1e-12
    if sup > graph.lipschitz_bound + slack:
        raise ConfigurationError(
            f"Sampled |phi'| = {sup:.6g} exceeds lipschitz_bound {graph.lipschitz_bound}")
    logger.debug(f"Lipschitz check passed: sup|phi'|={sup:.6g} <= {graph.lipschitz_bound}")
    return sup


__all__ = [
    'LipschitzGraph', 'GRAPH_KINDS', 'FLAT', 'PIECEWISE_LINEAR', 'CLOSED_FORM',
    'eval_phi', 'eval_phi_prime', 'pullback_point', 'pushforward_point',
    'pullback', 'pushforward', 'check_lipschitz',
]
