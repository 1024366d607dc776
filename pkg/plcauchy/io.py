"""CSV / JSON 输入输出

field.csv: x,t,f1,f2（t 外层，x 内层）
trace.csv: x,re,im
JSON 一律 sort_keys，保证重复运行字节一致
"""
import csv
import json
import math
import os
from typing import Any, Dict, List

import numpy as np

from .errors import ConfigurationError
from .grid import BoundaryTrace, GradientField, HalfPlaneGrid
from .logger import logger

FIELD_HEADER = ["x", "t", "f1", "f2"]
TRACE_HEADER = ["x", "re", "im"]


def plain(value: Any) -> Any:
    """转成 json 可写的纯 Python 对象；inf/nan 写成字符串"""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def dumps(data: Dict[str, Any]) -> str:
    return json.dumps(plain(data), sort_keys=True, indent=2, ensure_ascii=False)


def write_json(path: str, data: Dict[str, Any]) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dumps(data))
        f.write("\n")
    logger.debug(f"Wrote {path}")


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_field_csv(path: str, field: GradientField) -> None:
    _ensure_parent(path)
    grid = field.grid
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(FIELD_HEADER)
        for k, t in enumerate(grid.t):
            for j, x in enumerate(grid.x):
                v = field.values[k, j]
                writer.writerow([_fmt(x), _fmt(t), _fmt(v.real), _fmt(v.imag)])
    logger.debug(f"Wrote {path}")


def write_trace_csv(path: str, trace: BoundaryTrace) -> None:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for x, v in zip(trace.grid.x, trace.values):
            writer.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag)])
    logger.debug(f"Wrote {path}")


def _read_rows(path: str, header: List[str]) -> np.ndarray:
    if not os.path.exists(path):
        raise ConfigurationError(f"CSV file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        first = next(reader, None)
        if first is None or [c.strip() for c in first] != header:
            raise ConfigurationError(f"{path}: expected header {','.join(header)}")
        try:
            rows = [[float(c) for c in row] for row in reader if row]
        except ValueError as e:
            raise ConfigurationError(f"{path}: non-numeric entry ({e})") from e
    if not rows or any(len(r) != len(header) for r in rows):
        raise ConfigurationError(f"{path}: rows must have {len(header)} columns")
    return np.asarray(rows)


def _uniform_period(x: np.ndarray, path: str):
    n = x.size
    if n < 8 or n & (n - 1):
        raise ConfigurationError(f"{path}: number of x samples must be a power of two >= 8, got {n}")
    dx = np.diff(x)
    if np.any(dx <= 0) or np.max(np.abs(dx - dx[0])) > 1e-9 * max(1.0, abs(dx[0])):
        raise ConfigurationError(f"{path}: x samples must be uniformly spaced and increasing")
    step = float(np.mean(dx))
    return n, n * step


def read_trace_csv(path: str, sigma: float = 0.5, grid: HalfPlaneGrid = None) -> BoundaryTrace:
    """读取 x,re,im；给出 grid 时校验 x 与网格一致，否则只生成单层网格"""
    rows = _read_rows(path, TRACE_HEADER)
    x = rows[:, 0]
    if grid is None:
        n, L = _uniform_period(x, path)
        if abs(x[0] + 0.5 * L) > 1e-9 * L:
            raise ConfigurationError(f"{path}: x must start at -L/2 = {-0.5 * L}")
        grid = HalfPlaneGrid(N=n, L=L, t_layers=(1.0,), sigma=sigma)
    elif x.size != grid.N or np.max(np.abs(x - grid.x)) > 1e-9 * grid.L:
        raise ConfigurationError(f"{path}: x samples do not match the configured grid")
    return BoundaryTrace(grid, rows[:, 1] + 1j * rows[:, 2])


def read_field_csv(path: str, sigma: float = 0.5) -> GradientField:
    rows = _read_rows(path, FIELD_HEADER)
    t_all = rows[:, 1]
    t = np.unique(t_all)
    K = t.size
    if rows.shape[0] % K:
        raise ConfigurationError(f"{path}: rows do not form a full x-by-t grid")
    N = rows.shape[0] // K
    x = rows[:N, 0]
    n, L = _uniform_period(x, path)
    grid = HalfPlaneGrid(N=n, L=L, t_layers=tuple(t), sigma=sigma)
    if np.max(np.abs(x - grid.x)) > 1e-9 * L:
        raise ConfigurationError(f"{path}: x must run from -L/2 in uniform steps")
    expected_t = np.repeat(grid.t, N)
    if np.max(np.abs(t_all - expected_t)) > 0 or np.max(np.abs(rows[:, 0] - np.tile(grid.x, K))) > 1e-9 * L:
        raise ConfigurationError(f"{path}: rows must be ordered with t outer and x inner")
    values = (rows[:, 2] + 1j * rows[:, 3]).reshape(K, N)
    return GradientField(grid, values)


__all__ = [
    'plain', 'dumps', 'write_json', 'write_field_csv', 'write_trace_csv',
    'read_trace_csv', 'read_field_csv', 'FIELD_HEADER', 'TRACE_HEADER',
]
