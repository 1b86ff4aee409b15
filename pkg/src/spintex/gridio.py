"""Regular-grid container and binary field I/O.

Scalar fields (polarization density, pump intensity, weights) live on
axis-aligned regular grids in nm.  The on-disk format is a fixed 64-byte
header followed by the samples as little-endian float64 in C order:

    bytes  0-3   magic b"SPX1"
    bytes  4-15  grid shape, 3 x int32
    bytes 16-39  grid spacing in nm, 3 x float64
    bytes 40-63  grid origin in nm (coordinate of sample [0,0,0]), 3 x float64
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SPX1"
HEADER_BYTES = 64


class FieldFormatError(ValueError):
    """Raised when a binary field file is malformed."""


@dataclass(frozen=True)
class Grid3D:
    """Axis-aligned regular grid; sample [i,j,k] sits at origin + idx*spacing."""

    shape: tuple[int, int, int]
    spacing_nm: tuple[float, float, float]
    origin_nm: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.shape) != 3 or any(int(n) < 1 for n in self.shape):
            raise ValueError(f"bad grid shape {self.shape}")
        if len(self.spacing_nm) != 3 or any(s <= 0 for s in self.spacing_nm):
            raise ValueError(f"bad grid spacing {self.spacing_nm}")
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(
            self, "spacing_nm", tuple(float(s) for s in self.spacing_nm)
        )
        object.__setattr__(
            self, "origin_nm", tuple(float(x) for x in self.origin_nm)
        )

    @property
    def cell_volume_nm3(self) -> float:
        sx, sy, sz = self.spacing_nm
        return sx * sy * sz

    @property
    def extent_nm(self) -> tuple[float, float, float]:
        return tuple(n * s for n, s in zip(self.shape, self.spacing_nm))

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(
            o + s * np.arange(n)
            for n, s, o in zip(self.shape, self.spacing_nm, self.origin_nm)
        )

    def coordinates(self):
        """Sparse meshgrid of sample coordinates (broadcast-ready)."""
        x, y, z = self.axes()
        return np.meshgrid(x, y, z, indexing="ij", sparse=True)

    @classmethod
    def centered(cls, shape, spacing_nm) -> "Grid3D":
        """Grid whose coordinate span is centered on the origin."""
        shape = tuple(int(n) for n in shape)
        spacing = tuple(float(s) for s in spacing_nm)
        origin = tuple(-s * (n - 1) / 2.0 for n, s in zip(shape, spacing))
        return cls(shape=shape, spacing_nm=spacing, origin_nm=origin)


def write_field(path, grid: Grid3D, values: np.ndarray) -> None:
    values = np.asarray(values, dtype="<f8")
    if values.shape != grid.shape:
        raise ValueError(
            f"field shape {values.shape} does not match grid {grid.shape}"
        )
    header = (
        MAGIC
        + np.asarray(grid.shape, dtype="<i4").tobytes()
        + np.asarray(grid.spacing_nm, dtype="<f8").tobytes()
        + np.asarray(grid.origin_nm, dtype="<f8").tobytes()
    )
    assert len(header) == HEADER_BYTES
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(values).tobytes())


def read_field(path) -> tuple[Grid3D, np.ndarray]:
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_BYTES or raw[:4] != MAGIC:
        raise FieldFormatError(f"{path}: not a binary field file")
    shape = tuple(int(n) for n in np.frombuffer(raw, "<i4", 3, offset=4))
    spacing = tuple(np.frombuffer(raw, "<f8", 3, offset=16))
    origin = tuple(np.frombuffer(raw, "<f8", 3, offset=40))
    grid = Grid3D(shape=shape, spacing_nm=spacing, origin_nm=origin)
    count = shape[0] * shape[1] * shape[2]
    data = np.frombuffer(raw, "<f8", offset=HEADER_BYTES)
    if data.size != count:
        raise FieldFormatError(
            f"{path}: payload holds {data.size} samples, header says {count}"
        )
    return grid, data.reshape(shape).copy()
