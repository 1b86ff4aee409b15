"""Regenerate the synthetic optical-pumping measurement set.

Writes configs/data/pumping_synthetic.csv: contrast-vs-pump-time points
for a standing-wave illumination pattern with a Gaussian beam envelope,
ground truth tau_S = 0.7 us, overall scale 3.2e4, and 1% multiplicative
Gaussian noise (seed 7).  The grid matches the one the fit config uses,
so the noise-free curve is exactly representable by the fit model.
"""

from __future__ import annotations

import pathlib

import numpy as np

from spintex.gridio import Grid3D
from spintex.polarization import contrast_curve, toy_interference_intensity
from spintex.tables import table_bytes

TAU_S_US = 0.7
SCALE = 3.2e4
NOISE = 0.01
SEED = 7

GRID_SHAPE = (64, 64, 256)
GRID_EXTENT_NM = (300.0, 300.0, 2250.0)


def main() -> None:
    times = np.concatenate([[0.0], np.geomspace(0.05, 6.0, 24)])
    spacing = tuple(e / s for e, s in zip(GRID_EXTENT_NM, GRID_SHAPE))
    grid = Grid3D.centered(GRID_SHAPE, spacing)
    z = grid.axes()[2]
    intensity = toy_interference_intensity(
        z,
        reflectivity=0.35,
        wavelength_nm=532.0,
        refractive_index=2.4,
        envelope_sigma_nm=450.0,
    )
    weight = intensity**2
    curve = contrast_curve(intensity, times, TAU_S_US, weight=weight)
    curve = SCALE * curve / curve[-1]

    rng = np.random.default_rng(SEED)
    noisy = curve * (1.0 + NOISE * rng.standard_normal(len(times)))

    out = pathlib.Path(__file__).resolve().parents[1] / "configs" / "data"
    out.mkdir(parents=True, exist_ok=True)
    path = out / "pumping_synthetic.csv"
    path.write_bytes(
        table_bytes({"pump_time_us": times, "contrast": noisy})
    )
    print(f"wrote {path} ({len(times)} points, tau_S = {TAU_S_US} us)")


if __name__ == "__main__":
    main()
