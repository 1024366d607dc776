"""系数矩阵 B(f)

所有函数对网格向量化：f 为任意形状的复数组，返回形状为 f.shape + (2, 2) 的实数组。
标量输入时返回 (2, 2) 数组。
"""
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigurationError, InvariantViolation
from .expressions import evaluate_expression
from .logger import logger

# 系数矩阵用末两维为 (2, 2) 的 ndarray 表示
CoefficientMatrix = np.ndarray

FluxFn = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]
JacobianFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _stack(b11, b12, b21, b22) -> np.ndarray:
    return np.stack([np.stack([b11, b12], axis=-1), np.stack([b21, b22], axis=-1)], axis=-2)


def _broadcast(f, phi_prime):
    f = np.asarray(f, dtype=complex)
    phi_prime = np.asarray(phi_prime, dtype=float)
    return np.broadcast_arrays(f, phi_prime)


def b_zero(phi_prime) -> CoefficientMatrix:
    """B₀ = 1/(1+iφ′) 的矩阵形式"""
    d = np.asarray(phi_prime, dtype=float)
    s = 1.0 / (1.0 + d * d)
    return _stack(s, s * d, -s * d, s)


def b_zero_inverse(phi_prime) -> CoefficientMatrix:
    d = np.asarray(phi_prime, dtype=float)
    one = np.ones_like(d)
    return _stack(one, -d, d, one)


def b_plaplace(p: float, f, phi_prime, eps_zero: float = 0.0) -> CoefficientMatrix:
    """p-Laplace 方程的系数矩阵 B(f)

    Args:
        p: 指数，p > 1
        f: 共轭梯度 f1 + i f2
        phi_prime: φ′(x)
        eps_zero: |f| < eps_zero 处返回 B₀(φ′)
    Returns:
        形状 f.shape + (2, 2)
    """
    if not p > 1:
        raise ConfigurationError(f"p must be > 1, got {p}")
    f, d = _broadcast(f, phi_prime)
    if p == 2:
        return b_zero(d)
    f1, f2 = f.real, f.imag
    r2 = f1 * f1 + f2 * f2
    q = p - 2.0
    a11 = q * f1 * f1 + r2
    a22 = q * f2 * f2 + r2
    cross = q * f1 * f2
    delta = a22 + 2.0 * d * cross + d * d * a11
    zero = r2 <= eps_zero * eps_zero
    if np.any(~zero & ~(delta > 0)):
        raise InvariantViolation(f"Non-positive determinant Delta_p (p={p})")
    safe = np.where(zero, 1.0, delta)
    out = _stack(a22 / safe, d * a11 / safe, (-2.0 * cross - d * a11) / safe, a11 / safe)
    if np.any(zero):
        out = np.where(zero[..., None, None], b_zero(d), out)
    return out


def b_from_jacobian(jac: np.ndarray, phi_prime) -> Tuple[CoefficientMatrix, np.ndarray]:
    """由通量的 Jacobian ∇a（在 f̄ 处取值）构造 B，返回 (B, Δ)"""
    a11, a12 = jac[..., 0, 0], jac[..., 0, 1]
    a21, a22 = jac[..., 1, 0], jac[..., 1, 1]
    d = np.asarray(phi_prime, dtype=float)
    sym = a12 + a21
    delta = a22 - d * sym + d * d * a11
    safe = np.where(delta > 0, delta, 1.0)
    return _stack(a22 / safe, d * a11 / safe, (sym - d * a11) / safe, a11 / safe), delta


@dataclass(frozen=True)
class QuasilinearSymbol:
    """一般拟线性通量 a: R² → R²

    jacobian 为 None 时用中心差分，步长 1e-6·|z|。
    """
    a: FluxFn
    p: float
    nu: float
    L: float
    jacobian: Optional[JacobianFn] = None
    name: str = "custom"

    def __post_init__(self):
        if not self.p > 1:
            raise ConfigurationError(f"symbol exponent p must be > 1, got {self.p}")
        if not 0 < self.nu <= self.L:
            raise ConfigurationError(f"symbol constants need 0 < nu <= L, got nu={self.nu}, L={self.L}")

    @classmethod
    def plaplace(cls, p: float, analytic: bool = True) -> "QuasilinearSymbol":
        """a(z) = |z|^{p−2} z"""
        def flux(z1, z2):
            r = np.hypot(z1, z2)
            w = np.where(r > 0, r, 1.0) ** (p - 2.0)
            w = np.where(r > 0, w, 0.0)
            return w * z1, w * z2

        def jacobian(z1, z2):
            r2 = z1 * z1 + z2 * z2
            safe = np.where(r2 > 0, r2, 1.0)
            w = safe ** ((p - 2.0) / 2.0)
            q = (p - 2.0) / safe
            return w[..., None, None] * _stack(1 + q * z1 * z1, q * z1 * z2, q * z1 * z2, 1 + q * z2 * z2)

        return cls(a=flux, p=p, nu=min(1.0, p - 1.0), L=1.0 + max(1.0, p - 1.0),
                   jacobian=jacobian if analytic else None, name=f"plaplace(p={p})")

    @classmethod
    def from_expressions(cls, a1: str, a2: str, p: float, nu: float, L: float,
                         j11: Optional[str] = None, j12: Optional[str] = None,
                         j21: Optional[str] = None, j22: Optional[str] = None) -> "QuasilinearSymbol":
        """表达式变量为 z1, z2；四个 Jacobian 表达式要么全给，要么全不给"""
        def flux(z1, z2):
            return (evaluate_expression(a1, z1=z1, z2=z2).astype(float),
                    evaluate_expression(a2, z1=z1, z2=z2).astype(float))

        given = [j is not None for j in (j11, j12, j21, j22)]
        if any(given) and not all(given):
            raise ConfigurationError("symbol jacobian needs all of j11, j12, j21, j22")
        jacobian = None
        if all(given):
            def jacobian(z1, z2):
                return _stack(*[evaluate_expression(e, z1=z1, z2=z2).astype(float)
                                for e in (j11, j12, j21, j22)])
        return cls(a=flux, p=p, nu=nu, L=L, jacobian=jacobian, name=f"expr({a1}, {a2})")

    def evaluate_jacobian(self, z1, z2) -> np.ndarray:
        z1 = np.asarray(z1, dtype=float)
        z2 = np.asarray(z2, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(z1, z2), dtype=float)
        h = 1e-6 * np.hypot(z1, z2)
        h = np.where(h > 0, h, 1e-6)
        a1p, a2p = self.a(z1 + h, z2)
        a1m, a2m = self.a(z1 - h, z2)
        b1p, b2p = self.a(z1, z2 + h)
        b1m, b2m = self.a(z1, z2 - h)
        return _stack((a1p - a1m) / (2 * h), (b1p - b1m) / (2 * h),
                      (a2p - a2m) / (2 * h), (b2p - b2m) / (2 * h))

    def check_structure(self, samples: int = 10_000, seed: int = 0, slack: float = 1e-6) -> None:
        """随机 (z, ξ) 扫描检查增长与椭圆性条件，不满足时抛 ConfigurationError"""
        rng = np.random.default_rng(seed)
        radius = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), samples))
        theta = rng.uniform(0, 2 * np.pi, samples)
        z1, z2 = radius * np.cos(theta), radius * np.sin(theta)
        xi = rng.normal(size=(samples, 2))
        a1, a2 = self.a(z1, z2)
        jac = self.evaluate_jacobian(z1, z2)
        jnorm = spectral_norm_2x2(jac)
        growth = (np.hypot(a1, a2) + jnorm * radius) / radius ** (self.p - 1.0)
        quad = np.einsum("ni,nij,nj->n", xi, jac, xi)
        ellip = quad / (radius ** (self.p - 2.0) * np.einsum("ni,ni->n", xi, xi))
        if np.max(growth) > self.L * (1 + slack):
            raise ConfigurationError(
                f"Symbol {self.name} violates growth bound: max ratio {np.max(growth):.6g} > L={self.L}")
        if np.min(ellip) < self.nu * (1 - slack):
            raise ConfigurationError(
                f"Symbol {self.name} violates ellipticity: min ratio {np.min(ellip):.6g} < nu={self.nu}")
        logger.debug(f"Symbol {self.name} passed structure sweep over {samples} samples")


def b_general(symbol: QuasilinearSymbol, f, phi_prime, eps_zero: float = 0.0) -> CoefficientMatrix:
    """一般通量的系数矩阵 B^{a,f,φ}，∇a 在 f̄ = (f1, −f2) 处取值"""
    f, d = _broadcast(f, phi_prime)
    f1, f2 = f.real, f.imag
    r = np.hypot(f1, f2)
    zero = r <= eps_zero
    jac = symbol.evaluate_jacobian(np.where(zero, 1.0, f1), np.where(zero, 0.0, -f2))
    out, delta = b_from_jacobian(jac, d)
    live = ~zero
    if np.any(live & ~(delta > 0)):
        raise InvariantViolation(f"Non-positive determinant Delta for symbol {symbol.name}")
    margin = symbol.nu * np.where(live, r, 1.0) ** (symbol.p - 2.0) * (1 + d * d) / 2.0
    breach = int(np.count_nonzero(live & (delta <= margin)))
    if breach:
        logger.warning(f"Ellipticity margin breached at {breach} points for symbol {symbol.name}")
    if np.any(zero):
        out = np.where(zero[..., None, None], b_zero(d), out)
    return out


def apply_matrix(B: CoefficientMatrix, v) -> np.ndarray:
    """把复数 v = v1 + i v2 当作实二维向量左乘 B"""
    v = np.asarray(v, dtype=complex)
    v1, v2 = v.real, v.imag
    return (B[..., 0, 0] * v1 + B[..., 0, 1] * v2) + 1j * (B[..., 1, 0] * v1 + B[..., 1, 1] * v2)


def accretivity_kappa(B: CoefficientMatrix):
    """对称部分 (B+Bᵀ)/2 的最小特征值"""
    B = np.asarray(B, dtype=float)
    s11, s22 = B[..., 0, 0], B[..., 1, 1]
    s12 = 0.5 * (B[..., 0, 1] + B[..., 1, 0])
    mean = 0.5 * (s11 + s22)
    out = mean - np.hypot(0.5 * (s11 - s22), s12)
    return float(out) if np.ndim(out) == 0 else out


def spectral_norm_2x2(B: CoefficientMatrix):
    """2×2 矩阵的最大奇异值（闭式）"""
    B = np.asarray(B, dtype=float)
    fro2 = np.sum(B * B, axis=(-2, -1))
    det = B[..., 0, 0] * B[..., 1, 1] - B[..., 0, 1] * B[..., 1, 0]
    disc = np.sqrt(np.maximum(fro2 * fro2 - 4.0 * det * det, 0.0))
    out = np.sqrt(0.5 * (fro2 + disc))
    return float(out) if np.ndim(out) == 0 else out


def _sample_plan(M: float, sample_count: int) -> Tuple[np.ndarray, np.ndarray]:
    if sample_count < 1:
        raise ConfigurationError("sample_count must be >= 1")
    if M == 0:
        n_theta, slopes = sample_count, np.zeros(1)
    else:
        n_slope = max(1, int(np.sqrt(sample_count)))
        n_theta = max(1, sample_count // n_slope)
        slopes = np.linspace(-M, M, n_slope)
    theta = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    return np.exp(1j * theta)[:, None], slopes[None, :]


def closeness_to_b0(p: float, M: float, sample_count: int) -> float:
    """sup |B(f) − B₀| 在单位圆 f 与 φ′ ∈ [−M, M] 上的采样上确界

    B 是 0 次齐次的，单位圆扫描即覆盖全部 f ≠ 0。
    """
    f, d = _sample_plan(M, sample_count)
    diff = b_plaplace(p, f, d) - b_zero(np.broadcast_to(d, np.broadcast(f, d).shape))
    return float(np.max(spectral_norm_2x2(diff)))


def symbol_closeness(symbol: QuasilinearSymbol, M: float, sample_count: int,
                     radii=(1e-2, 1e-1, 1.0, 10.0, 100.0)) -> float:
    """一般通量不是 0 次齐次的，半径也需要采样"""
    f, d = _sample_plan(M, sample_count)
    sup = 0.0
    for r in radii:
        B = b_general(symbol, r * f, d)
        diff = B - b_zero(np.broadcast_to(d, B.shape[:-2]))
        sup = max(sup, float(np.max(spectral_norm_2x2(diff))))
    return sup


def coefficient_bound(p: float, M: float, sample_count: int = 4096) -> float:
    """采样得到的 sup|B(f)|，作为 |B| ≤ C(M, p) 的记录常数"""
    f, d = _sample_plan(M, sample_count)
    return float(np.max(spectral_norm_2x2(b_plaplace(p, f, d))))


def check_coefficients(B: CoefficientMatrix, bound: Optional[float] = None) -> None:
    if not np.all(np.isfinite(B)):
        raise InvariantViolation("Coefficient field has non-finite entries")
    if bound is not None:
        sup = float(np.max(spectral_norm_2x2(B)))
        if sup > bound * (1 + 1e-9):
            raise InvariantViolation(f"Coefficient norm {sup:.6g} exceeds recorded bound {bound:.6g}")


__all__ = [
    'CoefficientMatrix', 'QuasilinearSymbol',
    'b_zero', 'b_zero_inverse', 'b_plaplace', 'b_general', 'b_from_jacobian', 'apply_matrix',
    'accretivity_kappa', 'spectral_norm_2x2', 'closeness_to_b0', 'symbol_closeness',
    'coefficient_bound', 'check_coefficients',
]
