"""运行配置

RunConfig.from_file 按扩展名读取 toml / yaml / json，未知的段与键一律拒绝。
"""
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Optional

from .errors import ConfigurationError
from .geometry import LipschitzGraph, check_lipschitz
from .grid import GEOMETRIC, HalfPlaneGrid

BOUNDARY_COMPONENTS = ("d_x", "d_y")
LAWS = ("plaplace", "general")
RESOLVENTS = ("neumann", "gmres")
BACKEND_KINDS = ("spectral", "quadrature")
LIPSCHITZ_HALF_WIDTH = 50.0
LIPSCHITZ_SAMPLES = 200_001


def worker_count() -> int:
    """线程池大小，PLCAUCHY_THREADS 覆盖 os.cpu_count()"""
    raw = os.environ.get("PLCAUCHY_THREADS")
    if raw is None or raw == "":
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"PLCAUCHY_THREADS must be a positive integer, got {raw!r}") from e
    if value < 1:
        raise ConfigurationError(f"PLCAUCHY_THREADS must be a positive integer, got {raw!r}")
    return value


@dataclass
class SolverConfig:
    p: float = 2.0
    sigma: float = 0.5
    max_outer: int = 50
    max_neumann: int = 200
    max_boundary: int = 50
    tol_outer: float = 1e-6
    tol_neumann: float = 1e-8
    tol_boundary: float = 1e-6
    damping: float = 1.0
    relaxation: float = 1.0
    boundary_component: str = "d_x"
    eps_zero: float = 1e-12
    resolvent: str = "neumann"
    closeness_threshold: float = 0.5
    closeness_samples: int = 4096

    def __post_init__(self):
        self.validate()

    def validate(self) -> "SolverConfig":
        if not self.p > 1:
            raise ConfigurationError(f"p must be > 1 (p > 1 required), got p={self.p}")
        if not 0 < self.sigma < 1:
            raise ConfigurationError(f"sigma must lie in (0, 1), got {self.sigma}")
        for name in ("max_outer", "max_neumann", "max_boundary", "closeness_samples"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"solver.{name} must be >= 1")
        for name in ("tol_outer", "tol_neumann", "tol_boundary", "eps_zero"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"solver.{name} must be > 0")
        if not 0 < self.damping <= 1:
            raise ConfigurationError(f"solver.damping must lie in (0, 1], got {self.damping}")
        if not 0 < self.relaxation <= 1:
            raise ConfigurationError(f"solver.relaxation must lie in (0, 1], got {self.relaxation}")
        if self.boundary_component not in BOUNDARY_COMPONENTS:
            raise ConfigurationError(f"Unsupported boundary component: {self.boundary_component}")
        if self.resolvent not in RESOLVENTS:
            raise ConfigurationError(f"Unsupported resolvent: {self.resolvent}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _load_mapping(path: str) -> Dict[str, Any]:
    if path.endswith(".toml"):
        if sys.version_info >= (3, 11):
            import tomllib
        else:
            import tomli as tomllib
        with open(path, "rb") as f:
            return tomllib.load(f)
    if path.endswith(".yml") or path.endswith(".yaml"):
        import yaml
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f) or {}
    raise ConfigurationError(f"Unsupported config file format: {path}")


def _take(section: str, data: Dict[str, Any], allowed) -> Dict[str, Any]:
    if not isinstance(data, dict):
        raise ConfigurationError(f"[{section}] must be a table")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ConfigurationError(f"Unknown keys in [{section}]: {sorted(unknown)}")
    return dict(data)


_PROBLEM_KEYS = ("p", "sigma", "component", "data", "data_csv", "law")
_SYMBOL_KEYS = ("a1", "a2", "j11", "j12", "j21", "j22", "nu", "L")
_GRID_KEYS = ("N", "L", "t1", "tmax", "layers", "growth", "spacing")
_BACKEND_KEYS = ("kind", "tolerance")
_SOLVER_KEYS = ("max_outer", "max_neumann", "max_boundary", "tol_outer", "tol_neumann",
                "tol_boundary", "damping", "relaxation", "eps_zero", "resolvent")
_OUTPUT_KEYS = ("dir",)
_SECTIONS = ("problem", "phi", "symbol", "grid", "backend", "solver", "output")


@dataclass
class RunConfig:
    """一次 solve / operators 运行的完整配置"""
    p: float = 2.0
    sigma: float = 0.5
    component: str = "d_x"
    data: Optional[str] = "-2*x*exp(-x**2)"
    data_csv: Optional[str] = None
    law: str = "plaplace"
    phi: Dict[str, Any] = field(default_factory=lambda: {"kind": "flat", "lipschitz_bound": 0.0})
    symbol: Dict[str, Any] = field(default_factory=dict)
    grid: Dict[str, Any] = field(default_factory=lambda: {
        "N": 256, "L": 32.0, "t1": 1e-3, "tmax": 40.0, "layers": 48,
        "growth": None, "spacing": GEOMETRIC})
    backend: Dict[str, Any] = field(default_factory=lambda: {"kind": "spectral", "tolerance": 1e-2})
    solver: Dict[str, Any] = field(default_factory=dict)
    output_dir: str = "out"

    @classmethod
    def from_file(cls, cfg_file: str) -> "RunConfig":
        if not os.path.exists(cfg_file):
            raise ConfigurationError(f"Config file not found: {cfg_file}")
        try:
            cfg = _load_mapping(cfg_file)
        except ConfigurationError:
            raise
        except Exception as e:
            raise ConfigurationError(f"Failed to parse config {cfg_file}: {e}") from e
        return cls.from_dict(cfg, base_dir=os.path.dirname(os.path.abspath(cfg_file)))

    @classmethod
    def from_dict(cls, cfg: Dict[str, Any], base_dir: Optional[str] = None) -> "RunConfig":
        unknown = set(cfg) - set(_SECTIONS)
        if unknown:
            raise ConfigurationError(f"Unknown config sections: {sorted(unknown)}")
        run = cls()
        problem = _take("problem", cfg.get("problem", {}), _PROBLEM_KEYS)
        run.p = float(problem.get("p", run.p))
        run.sigma = float(problem.get("sigma", run.sigma))
        run.component = problem.get("component", run.component)
        run.law = problem.get("law", run.law)
        if "data_csv" in problem:
            if "data" in problem:
                raise ConfigurationError("[problem] takes either data or data_csv, not both")
            path = problem["data_csv"]
            if base_dir and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            run.data, run.data_csv = None, path
        elif "data" in problem:
            run.data = str(problem["data"])
        if "phi" in cfg:
            run.phi = dict(cfg["phi"])
        if "symbol" in cfg:
            run.symbol = _take("symbol", cfg["symbol"], _SYMBOL_KEYS)
        run.grid.update(_take("grid", cfg.get("grid", {}), _GRID_KEYS))
        run.backend.update(_take("backend", cfg.get("backend", {}), _BACKEND_KEYS))
        run.solver = _take("solver", cfg.get("solver", {}), _SOLVER_KEYS)
        output = _take("output", cfg.get("output", {}), _OUTPUT_KEYS)
        run.output_dir = output.get("dir", run.output_dir)
        return run.validate()

    def validate(self) -> "RunConfig":
        if self.law not in LAWS:
            raise ConfigurationError(f"Unsupported law: {self.law}")
        if self.law == "general":
            missing = [k for k in ("a1", "a2", "nu", "L") if k not in self.symbol]
            if missing:
                raise ConfigurationError(f"law = 'general' needs [symbol] keys {missing}")
        if self.backend.get("kind") not in BACKEND_KINDS:
            raise ConfigurationError(f"Unsupported backend kind: {self.backend.get('kind')}")
        if self.data is None and self.data_csv is None:
            raise ConfigurationError("[problem] needs data or data_csv")
        # 构造即校验
        self.make_graph()
        self.make_grid()
        self.make_solver_config()
        return self

    def make_graph(self) -> LipschitzGraph:
        """声明的 lipschitz_bound 在 [−max(50, L/2), max(50, L/2)] 上抽样核对"""
        graph = LipschitzGraph.from_dict(self.phi)
        try:
            half = max(LIPSCHITZ_HALF_WIDTH, 0.5 * float(self.grid.get("L", 0.0)))
        except (TypeError, ValueError):
            half = LIPSCHITZ_HALF_WIDTH
        check_lipschitz(graph, -half, half, samples=LIPSCHITZ_SAMPLES)
        return graph

    def make_grid(self) -> HalfPlaneGrid:
        g = self.grid
        try:
            return HalfPlaneGrid.build(N=int(g["N"]), L=float(g["L"]), t1=float(g["t1"]),
                                       tmax=float(g["tmax"]), layers=int(g["layers"]),
                                       sigma=self.sigma, spacing=g.get("spacing", GEOMETRIC),
                                       growth=None if g.get("growth") is None else float(g["growth"]))
        except (TypeError, KeyError) as e:
            raise ConfigurationError(f"Invalid [grid] section: {e}") from e

    def make_solver_config(self) -> SolverConfig:
        kwargs = {name: self.solver[name] for name in _SOLVER_KEYS if name in self.solver}
        try:
            return SolverConfig(p=self.p, sigma=self.sigma, boundary_component=self.component, **kwargs)
        except TypeError as e:
            raise ConfigurationError(f"Invalid [solver] section: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        """含全部默认值，写入 report.json 的 config 字段"""
        solver = self.make_solver_config().to_dict()
        problem = {"p": self.p, "sigma": self.sigma, "component": self.component, "law": self.law}
        if self.data_csv is not None:
            problem["data_csv"] = self.data_csv
        else:
            problem["data"] = self.data
        return {
            "problem": problem,
            "phi": self.make_graph().to_dict(),
            "symbol": dict(self.symbol),
            "grid": {k: v for k, v in self.grid.items()},
            "backend": dict(self.backend),
            "solver": solver,
            "output": {"dir": self.output_dir},
        }


SOLVER_FIELDS = tuple(f.name for f in fields(SolverConfig))

__all__ = ['RunConfig', 'SolverConfig', 'worker_count', 'SOLVER_FIELDS',
           'BOUNDARY_COMPONENTS', 'LAWS', 'RESOLVENTS', 'BACKEND_KINDS']
