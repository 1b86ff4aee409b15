"""Read-only access to the simulation output formats.

The upstream command line writes CSV tables (one header row, numeric
columns printed with full precision) and JSON summaries.  Values parsed
here round-trip exactly: a float read from either format is bit-equal
to the one the producer wrote.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = ["read_table", "read_json", "sha256_file"]


def read_table(path) -> dict[str, np.ndarray]:
    """Load a CSV table as a mapping of column name to array.

    Numeric columns become float arrays; anything unparsable (axis
    labels and the like) stays as strings.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise ValueError(f"'{path}' has no header row")
    header = rows[0]
    body = rows[1:]
    for k, row in enumerate(body):
        if len(row) != len(header):
            raise ValueError(
                f"'{path}' row {k + 2} has {len(row)} fields, "
                f"expected {len(header)}"
            )
    columns: dict[str, np.ndarray] = {}
    for k, name in enumerate(header):
        values = [row[k] for row in body]
        try:
            columns[name] = np.array([float(v) for v in values])
        except ValueError:
            columns[name] = np.array(values)
    return columns


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
