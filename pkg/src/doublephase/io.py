"""Flat-file output: JSON reports and CSV tables with 17 significant digits."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .mesh import Field


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON; floats as %.17g, non-finite floats as null."""
    return _encode(obj, indent, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def write_table_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_field_csv(path, u: Field) -> Path:
    """Columns x[,y],u, one row per vertex."""
    m = u.mesh
    header = ["x", "u"] if m.dimension == 1 else ["x", "y", "u"]
    rows = np.column_stack([m.vertices, u.values])
    return write_table_csv(path, header, rows)


def read_field_csv(path, mesh) -> Field:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Field(mesh, data[:, -1])
