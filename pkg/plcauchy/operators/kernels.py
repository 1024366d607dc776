"""Cauchy 型核的精确局部积分

记号：w = ζ − z（源点减目标点），核按周期 L 的 cot / csc² 形式周期化，
拆成 1/w（或 1/w²）加光滑余项 R。
"""
import numpy as np


def wrap_periodic(dx, L: float):
    """实部取到 [−L/2, L/2)"""
    return (dx + 0.5 * L) % L - 0.5 * L


def cot_kernel(w, L: float):
    """(π/L)·cot(πw/L)"""
    u = np.pi * np.asarray(w, dtype=complex) / L
    return (np.pi / L) / np.tan(u)


def csc2_kernel(w, L: float):
    """(π/L)²/sin²(πw/L)"""
    u = np.pi * np.asarray(w, dtype=complex) / L
    return (np.pi / L) ** 2 / np.sin(u) ** 2


def cot_remainder(w, L: float):
    """(π/L)cot(πw/L) − 1/w，w → 0 时为 0"""
    w = np.asarray(w, dtype=complex)
    u = np.pi * w / L
    small = np.abs(u) < 1e-3
    safe_u = np.where(small, 1.0, u)
    exact = (np.pi / L) * (1.0 / np.tan(safe_u) - 1.0 / safe_u)
    series = (np.pi / L) * (-u / 3.0 - u ** 3 / 45.0)
    return np.where(small, series, exact)


def csc2_remainder(w, L: float):
    """(π/L)²/sin²(πw/L) − 1/w²，w → 0 时为 (π/L)²/3"""
    w = np.asarray(w, dtype=complex)
    u = np.pi * w / L
    small = np.abs(u) < 1e-3
    safe_u = np.where(small, 1.0, u)
    exact = (np.pi / L) ** 2 * (1.0 / np.sin(safe_u) ** 2 - 1.0 / safe_u ** 2)
    series = (np.pi / L) ** 2 * (1.0 / 3.0 + u ** 2 / 15.0)
    return np.where(small, series, exact)


def _edge_inverse(P, Q):
    """∫_{P→Q} w̄/w dw，边为直线段"""
    e = Q - P
    tau = -P / e
    alpha, beta = tau.real, tau.imag
    nonzero = beta != 0
    safe_beta = np.where(nonzero, beta, 1.0)

    def primitive(v):
        arc = np.where(nonzero, beta * np.arctan(v / safe_beta), 0.0)
        logs = np.where(nonzero, beta * np.log(np.where(nonzero, v * v + beta * beta, 1.0)), 0.0)
        return v - 2.0 * arc + 1j * logs

    return np.conj(e) * (primitive(1.0 - alpha) - primitive(-alpha))


def polygon_inverse_integral(vertices):
    """∬_P dA/w，P 为逆时针多边形，vertices 末轴为顶点

    Stokes：∬ ∂_w̄ F dA = (1/2i)∮ F dw，取 F = w̄/w。
    """
    V = np.asarray(vertices, dtype=complex)
    total = np.zeros(V.shape[:-1], dtype=complex)
    n = V.shape[-1]
    for a in range(n):
        total = total + _edge_inverse(V[..., a], V[..., (a + 1) % n])
    return total / 2j


def polygon_pv_inverse_square(vertices):
    """p.v. ∬_P dA/w²（圆盘挖去），(1/2i)∮ dw̄/w"""
    V = np.asarray(vertices, dtype=complex)
    total = np.zeros(V.shape[:-1], dtype=complex)
    n = V.shape[-1]
    for a in range(n):
        P, Q = V[..., a], V[..., (a + 1) % n]
        e = Q - P
        total = total + (np.conj(e) / e) * np.log(Q / P)
    return total / 2j


def parallelogram_vertices(center, half_side, lo, hi):
    """中心 center、水平半边向量 half_side、竖直范围 [lo, hi] 的逆时针顶点"""
    center, half_side = np.broadcast_arrays(np.asarray(center, dtype=complex),
                                            np.asarray(half_side, dtype=complex))
    return np.stack([
        center - half_side + 1j * lo,
        center + half_side + 1j * lo,
        center + half_side + 1j * hi,
        center - half_side + 1j * hi,
    ], axis=-1)


def segment_cauchy_integral(w_a, e, G_a, G_b):
    """∫ G(ζ)/(ζ − z) dζ 沿弦 ζ_a → ζ_a + e，G 线性插值

    w_a = ζ_a − z，结果为 G_a·ℓ + ΔG·(1 − (w_a/e)·ℓ)，ℓ = Log(w_b/w_a)。
    """
    w_b = w_a + e
    ell = np.log(w_b / w_a)
    dG = G_b - G_a
    return G_a * ell + dG * (1.0 - (w_a / e) * ell)


__all__ = [
    'wrap_periodic', 'cot_kernel', 'csc2_kernel', 'cot_remainder', 'csc2_remainder',
    'polygon_inverse_integral', 'polygon_pv_inverse_square', 'parallelogram_vertices',
    'segment_cauchy_integral',
]
