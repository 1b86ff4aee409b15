"""Deterministic CSV and JSON serialization for command-line outputs.

Floats are written with the ``%.17g`` format, which round-trips IEEE
doubles exactly, so two runs that produce bitwise-equal arrays produce
byte-identical files.  JSON payloads are serialized with sorted keys and
a fixed indentation for the same reason.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping

import numpy as np

__all__ = [
    "format_float",
    "table_bytes",
    "write_table",
    "read_table",
    "json_bytes",
    "write_json",
]


def format_float(value: float) -> str:
    """Shortest-exact decimal form of a double (via %.17g)."""
    return "%.17g" % float(value)


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean cells are not supported in tables")
    if isinstance(value, (str, np.str_)):
        if "," in value or "\n" in value or '"' in value:
            raise ValueError(f"string cell {value!r} needs quoting; not supported")
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def table_bytes(columns: Mapping[str, np.ndarray]) -> bytes:
    """Render named columns as CSV text (header row + one row per entry)."""
    if not columns:
        raise ValueError("table needs at least one column")
    arrays = {}
    length = None
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            raise TypeError(
                f"column '{name}' is complex; split into _re/_im columns"
            )
        if arr.dtype == object or arr.dtype.kind == "U":
            arr = arr.astype(str)
        if arr.ndim != 1:
            raise ValueError(f"column '{name}' must be 1-d, got shape {arr.shape}")
        if length is None:
            length = arr.shape[0]
        elif arr.shape[0] != length:
            raise ValueError(
                f"column '{name}' has {arr.shape[0]} rows, expected {length}"
            )
        arrays[name] = arr
    lines = [",".join(arrays)]
    for i in range(length):
        lines.append(",".join(_format_cell(arr[i]) for arr in arrays.values()))
    return ("\n".join(lines) + "\n").encode("ascii")


def write_table(path, columns: Mapping[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(table_bytes(columns))


def read_table(path_or_bytes) -> dict[str, np.ndarray]:
    """Read a CSV written by write_table back into float columns."""
    if isinstance(path_or_bytes, bytes):
        text = path_or_bytes.decode("ascii")
    else:
        with open(path_or_bytes, "r", encoding="ascii") as fh:
            text = fh.read()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise ValueError("empty table")
    header = rows[0]
    data = rows[1:]
    out = {}
    for j, name in enumerate(header):
        cells = [row[j] for row in data]
        try:
            out[name] = np.array([float(c) for c in cells], dtype=float)
        except ValueError:
            out[name] = np.array(cells, dtype=str)
    return out


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    return value


def json_bytes(payload: Mapping) -> bytes:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    return (text + "\n").encode("ascii")


def write_json(path, payload: Mapping) -> None:
    with open(path, "wb") as fh:
        fh.write(json_bytes(payload))
