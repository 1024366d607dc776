from ..errors import ConfigurationError
from ..geometry import LipschitzGraph
from ..grid import BoundaryTrace, GradientField
from .base import OperatorBackend
from .quadrature import QuadratureBackend
from .spectral import SpectralBackend

_ALIASES = {
    "spectral": SpectralBackend,
    "spectral-flat": SpectralBackend,
    "quadrature": QuadratureBackend,
    "quadrature-lipschitz": QuadratureBackend,
}


def make_backend(kind: str, graph: LipschitzGraph, tolerance: float = 1e-2, **kwargs) -> OperatorBackend:
    backend_cls = _ALIASES.get(kind)
    if backend_cls is None:
        raise ConfigurationError(f"Unsupported backend kind: {kind}")
    return backend_cls(graph, tolerance=tolerance, **kwargs)


def hardy_projection(backend: OperatorBackend, trace: BoundaryTrace, sign: int = 1) -> BoundaryTrace:
    return backend.hardy_projection(trace, sign)


def boundary_cauchy(backend: OperatorBackend, g: BoundaryTrace, t: float) -> BoundaryTrace:
    return backend.boundary_cauchy(g, t)


def solid_cauchy(backend: OperatorBackend, h: GradientField) -> GradientField:
    return backend.solid_cauchy(h)


def beurling(backend: OperatorBackend, h: GradientField) -> GradientField:
    return backend.beurling(h)


__all__ = [
    'OperatorBackend', 'SpectralBackend', 'QuadratureBackend', 'make_backend',
    'hardy_projection', 'boundary_cauchy', 'solid_cauchy', 'beurling',
]
