"""迹定理测试台：Gagliardo²(迹) / 加权 H¹² 在场族与伸缩下一致有界"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..errors import ConfigurationError
from ..grid import (GradientField, HalfPlaneGrid, gagliardo_seminorm, trace_limit,
                    weighted_h1_seminorm)
from ..logger import logger

BAND_FACTOR = 3.0


@dataclass(frozen=True)
class BumpField:
    """ψ(x)e^{−κt}，ψ = d/dx[e^{−x²/w²}e^{iax}]，导数形式保证零均值"""
    width: float
    freq: float = 0.0
    decay: float = 1.0
    stress: bool = False
    amplitude: float = 1.0

    def dilate(self, factor: float) -> "BumpField":
        """f_λ(x, t) = f(x/λ, t/λ)"""
        return BumpField(width=self.width * factor, freq=self.freq / factor,
                         decay=self.decay / factor, stress=self.stress, amplitude=self.amplitude)

    def profile(self, x):
        w, a = self.width, self.freq
        return self.amplitude * (-2.0 * x / (w * w) + 1j * a) * np.exp(-(x / w) ** 2 + 1j * a * x)

    def sample(self, grid: HalfPlaneGrid) -> GradientField:
        return GradientField.from_function(grid, lambda X, T: self.profile(X) * np.exp(-self.decay * T))

    @property
    def is_zero(self) -> bool:
        return self.amplitude == 0

    @property
    def label(self) -> str:
        return f"w={self.width:g},a={self.freq:g},k={self.decay:g}"


def default_family() -> List[BumpField]:
    """十个光滑成员：κ 与轮廓的频率尺度同阶"""
    members = []
    for w, a, c in ((1.0, 0.0, 1.0), (0.5, 0.0, 1.0), (2.0, 0.0, 1.0), (1.0, 0.0, 0.75),
                    (1.0, 0.0, 2.0), (1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (0.75, 1.0, 1.5),
                    (1.5, 0.5, 1.25), (1.25, 1.5, 1.0)):
        members.append(BumpField(width=w, freq=a, decay=c * np.hypot(1.0 / w, a)))
    return members


def stress_family() -> List[BumpField]:
    """质量集中在 t₁ 附近的粗糙场，只要求有界"""
    return [BumpField(width=1.0, decay=50.0, stress=True), BumpField(width=0.5, freq=3.0, decay=80.0, stress=True)]


@dataclass
class TraceBenchReport:
    sigma: float
    rows: List[Dict[str, Any]] = field(default_factory=list)
    skipped: int = 0
    warnings: List[str] = field(default_factory=list)

    def _ratios(self, stress: bool) -> np.ndarray:
        return np.array([r["ratio"] for r in self.rows if r["stress"] == stress])

    @property
    def band(self) -> float:
        ratios = self._ratios(False)
        return float(np.max(ratios) / np.min(ratios)) if ratios.size else 1.0

    @property
    def max_ratio(self) -> float:
        ratios = np.array([r["ratio"] for r in self.rows])
        return float(np.max(ratios)) if ratios.size else 0.0

    @property
    def within_band(self) -> bool:
        return self.band <= BAND_FACTOR

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sigma": self.sigma,
            "rows": self.rows,
            "band": self.band,
            "max_ratio": self.max_ratio,
            "within_band": self.within_band,
            "skipped": self.skipped,
            "warnings": self.warnings,
        }


def bench_grid(sigma: float, N: int = 2048, L: float = 256.0, t1: float = 1e-3,
               tmax: float = 400.0, layers: int = 64) -> HalfPlaneGrid:
    return HalfPlaneGrid.build(N=N, L=L, t1=t1, tmax=tmax, layers=layers, sigma=sigma)


def trace_bench(sigma: float, family: Optional[Sequence[BumpField]] = None,
                dilations: Sequence[float] = (1.0, 2.0, 4.0, 8.0),
                grid: Optional[HalfPlaneGrid] = None) -> TraceBenchReport:
    family = list(default_family() if family is None else family)
    if not family:
        raise ConfigurationError("trace_bench needs a nonempty family")
    grid = grid or bench_grid(sigma)
    if grid.sigma != sigma:
        grid = HalfPlaneGrid(N=grid.N, L=grid.L, t_layers=grid.t_layers, sigma=sigma)
    report = TraceBenchReport(sigma=sigma)
    for member in family:
        if member.is_zero:
            report.skipped += len(dilations)
            continue
        for factor in dilations:
            fld = member.dilate(factor).sample(grid)
            energy = weighted_h1_seminorm(fld, sigma)
            if energy == 0:
                report.skipped += 1
                continue
            trace = trace_limit(fld)
            report.warnings.extend(w for w in trace.warnings if w not in report.warnings)
            ratio = gagliardo_seminorm(trace, sigma) ** 2 / energy ** 2
            report.rows.append({"member": member.label, "dilation": float(factor),
                                "ratio": ratio, "stress": member.stress})
    logger.info(f"Trace bench sigma={sigma}: {len(report.rows)} ratios, band {report.band:.3f}, "
                f"max ratio {report.max_ratio:.4g}")
    return report


__all__ = ['BumpField', 'TraceBenchReport', 'default_family', 'stress_family', 'bench_grid',
           'trace_bench', 'BAND_FACTOR']
