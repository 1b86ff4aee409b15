"""Panel rendering: draw stored values, never recompute them.

Every panel is a thin display of CSV columns (plus, for trace panels,
the three stored parameters of a precession fit).  Alongside each image
a ``<image>.values.json`` sidecar records the exact numbers drawn and
the checksums of the files they came from, so audits can confirm that
every plotted value exists verbatim in an input file.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .io import read_json, read_table, sha256_file  # noqa: E402
from .spec import FigureSpec, SpecError  # noqa: E402

__all__ = ["render_panel"]

# keys a trace-fit summary must provide for the sinusoid overlay
_FIT_KEYS = ("omega_rad_s", "amplitude", "phase_rad")


def _column(table, path: Path, name: str) -> np.ndarray:
    if name not in table:
        raise SpecError(
            f"column '{name}' not in '{path}' (has {sorted(table)})"
        )
    values = table[name]
    if values.dtype.kind not in "fiu":
        raise SpecError(f"column '{name}' in '{path}' is not numeric")
    return values


def _collect(spec: FigureSpec):
    """Read every referenced file once and pull the plotted columns."""
    tables = {path: read_table(path) for path in spec.tables}
    series_data = []
    for entry in spec.series:
        table = tables[entry.table]
        x = _column(table, entry.table, spec.x.column)
        y = _column(table, entry.table, entry.column)
        sigma = None
        if entry.sigma is not None:
            sigma = _column(table, entry.table, entry.sigma)
        series_data.append((entry, x, y, sigma))
    fit = None
    if spec.fit is not None:
        summary = read_json(spec.fit)
        missing = [k for k in _FIT_KEYS if k not in summary]
        if missing:
            raise SpecError(
                f"fit summary '{spec.fit}' is missing keys {missing}"
            )
        fit = {k: float(summary[k]) for k in _FIT_KEYS}
    return series_data, fit


def _draw_trace(ax, spec, series_data, fit):
    if fit is not None and spec.x.column != "time_us":
        raise SpecError(
            "trace fit overlays need the table's 'time_us' column on x, "
            f"not '{spec.x.column}'"
        )
    for entry, x, y, _sigma in series_data:
        ax.plot(x, y, marker=".", lw=1.0, label=entry.label)
    if fit is not None:
        t_us = np.linspace(
            min(x.min() for _, x, _, _ in series_data),
            max(x.max() for _, x, _, _ in series_data),
            512,
        )
        phase = fit["omega_rad_s"] * t_us * 1e-6 + fit["phase_rad"]
        drew = set()
        for entry, _x, _y, _sigma in series_data:
            if entry.column.endswith("_re") and "re" not in drew:
                ax.plot(t_us, fit["amplitude"] * np.cos(phase), "k--",
                        lw=0.8, label="fit (re)")
                drew.add("re")
            elif entry.column.endswith("_im") and "im" not in drew:
                ax.plot(t_us, fit["amplitude"] * np.sin(phase), "k:",
                        lw=0.8, label="fit (im)")
                drew.add("im")
    ax.axhline(0.0, color="0.8", lw=0.6, zorder=0)


def _draw_scan(ax, spec, series_data, _fit):
    for entry, x, y, sigma in series_data:
        ax.errorbar(
            x, y, yerr=sigma, marker="o", ms=3.5, lw=1.0, capsize=2.0,
            label=entry.label,
        )
    if spec.marker_x is not None:
        ax.axvline(spec.marker_x, color="0.4", lw=0.8, ls=":")


def _draw_profile(ax, spec, series_data, _fit):
    for k, (entry, x, y, _sigma) in enumerate(series_data):
        ax.plot(x, y, lw=1.6 if k == 0 else 0.9, label=entry.label)
    ax.axhline(0.0, color="0.8", lw=0.6, zorder=0)


def _draw_sensitivity(ax, spec, series_data, _fit):
    for entry, x, y, _sigma in series_data:
        # log axes cannot show signs; display magnitudes
        ax.plot(np.abs(x) if spec.logx else x,
                np.abs(y) if spec.logy else y,
                marker=".", ms=3.0, lw=1.0, label=entry.label)


_DRAWERS = {
    "trace": _draw_trace,
    "scan": _draw_scan,
    "profile": _draw_profile,
    "sensitivity": _draw_sensitivity,
}


def render_panel(spec: FigureSpec, out_dir) -> tuple[Path, Path]:
    """Render one figure and its sidecar of plotted values.

    Returns (image path, sidecar path).  The image lands at
    ``out_dir / spec.output``; the sidecar next to it with a
    ``.values.json`` suffix appended to the image name.
    """
    out_dir = Path(out_dir)
    series_data, fit = _collect(spec)

    fig, ax = plt.subplots(figsize=(4.8, 3.4), dpi=150)
    try:
        _DRAWERS[spec.panel](ax, spec, series_data, fit)
        if spec.logx:
            ax.set_xscale("log")
        if spec.logy:
            ax.set_yscale("log")
        ax.set_xlabel(spec.x.label)
        if spec.y_label is not None:
            ax.set_ylabel(spec.y_label)
        if spec.title is not None:
            ax.set_title(spec.title, fontsize=10)
        if len(series_data) > 1 or fit is not None:
            ax.legend(fontsize=8, frameon=False)
        fig.tight_layout()
        out_dir.mkdir(parents=True, exist_ok=True)
        image_path = out_dir / spec.output
        image_path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(image_path, metadata={"Software": "spintexfig"})
    finally:
        plt.close(fig)

    inputs = {str(p): sha256_file(p) for p in spec.tables}
    if spec.fit is not None:
        inputs[str(spec.fit)] = sha256_file(spec.fit)
    sidecar = {
        "panel": spec.panel,
        "title": spec.title,
        "output": spec.output,
        "x_label": spec.x.label,
        "y_label": spec.y_label,
        "marker_x": spec.marker_x,
        "inputs": inputs,
        "series": [
            {
                "label": entry.label,
                "file": str(entry.table),
                "x_column": spec.x.column,
                "column": entry.column,
                "sigma_column": entry.sigma,
                "x": [float(v) for v in x],
                "y": [float(v) for v in y],
                "sigma": None if sigma is None else [float(v) for v in sigma],
            }
            for entry, x, y, sigma in series_data
        ],
        "fit": None if fit is None else {**fit, "file": str(spec.fit)},
    }
    sidecar_path = out_dir / (spec.output + ".values.json")
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return image_path, sidecar_path
