"""Figure specifications: which files and columns to draw, and how.

A spec is a small YAML document naming one panel type, the input
table(s) and columns for each plotted series, axis labels, and the
output image name.  Paths are resolved relative to the spec file, so a
spec can live next to (or inside) the output corpus it describes.

    panel: scan
    output: anisotropy.png
    table: runs/anisotropy_scan/anisotropy_scan.csv
    x: {column: ratio_zz_xx, label: "coupling ratio g_ZZ / g_XX"}
    y_label: "peak precessed quadrature"
    series:
      - {column: amplitude, sigma: amplitude_sigma, label: "scan"}
    marker_x: 1.0

Unknown keys are rejected; referenced input files must exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

__all__ = ["SpecError", "AxisSpec", "SeriesSpec", "FigureSpec", "load_spec"]

PANELS = ("trace", "scan", "profile", "sensitivity")

_TOP_KEYS = {
    "panel", "output", "title", "table", "x", "y_label", "series",
    "fit", "marker_x", "logx", "logy",
}
_X_KEYS = {"column", "label"}
_SERIES_KEYS = {"table", "column", "sigma", "label"}


class SpecError(ValueError):
    """Raised for malformed or unsatisfiable figure specifications."""


@dataclass(frozen=True)
class AxisSpec:
    column: str
    label: str


@dataclass(frozen=True)
class SeriesSpec:
    table: Path
    column: str
    label: str
    sigma: str | None = None


@dataclass(frozen=True)
class FigureSpec:
    panel: str
    output: str
    x: AxisSpec
    series: tuple[SeriesSpec, ...]
    title: str | None = None
    y_label: str | None = None
    fit: Path | None = None
    marker_x: float | None = None
    logx: bool = False
    logy: bool = False
    tables: tuple[Path, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if self.panel not in PANELS:
            raise SpecError(
                f"unknown panel type {self.panel!r}; expected one of {PANELS}"
            )
        if not self.series:
            raise SpecError("a figure needs at least one series")
        if self.fit is not None and self.panel != "trace":
            raise SpecError("'fit' overlay is only valid on trace panels")
        if self.marker_x is not None and self.panel != "scan":
            raise SpecError("'marker_x' is only valid on scan panels")
        paths = []
        for entry in self.series:
            if entry.table not in paths:
                paths.append(entry.table)
        object.__setattr__(self, "tables", tuple(paths))


def _require_mapping(obj, what):
    if not isinstance(obj, dict):
        raise SpecError(f"{what} must be a mapping, got {type(obj).__name__}")
    return obj


def _reject_unknown(mapping, allowed, what):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise SpecError(f"unknown {what} keys: {unknown}")


def _resolve(base: Path, value, what) -> Path:
    if not isinstance(value, str) or not value:
        raise SpecError(f"{what} must be a non-empty path string")
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if not path.is_file():
        raise SpecError(f"{what} '{path}' does not exist")
    return path


def load_spec(path) -> FigureSpec:
    """Parse and validate one figure specification file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise SpecError(f"cannot read spec '{path}': {exc}") from exc
    except yaml.YAMLError as exc:
        raise SpecError(f"invalid YAML in '{path}': {exc}") from exc
    raw = _require_mapping(raw, f"spec '{path}'")
    _reject_unknown(raw, _TOP_KEYS, "spec")
    base = path.parent

    for key in ("panel", "output", "x", "series"):
        if key not in raw:
            raise SpecError(f"spec is missing required key '{key}'")
    panel = raw["panel"]
    output = raw["output"]
    if not isinstance(output, str) or not output:
        raise SpecError("'output' must be a non-empty file name")
    if Path(output).is_absolute():
        raise SpecError("'output' must be relative; it lands under --out")

    x_raw = _require_mapping(raw["x"], "'x'")
    _reject_unknown(x_raw, _X_KEYS, "'x'")
    if "column" not in x_raw:
        raise SpecError("'x' needs a 'column'")
    x = AxisSpec(
        column=str(x_raw["column"]),
        label=str(x_raw.get("label", x_raw["column"])),
    )

    default_table = None
    if raw.get("table") is not None:
        default_table = _resolve(base, raw["table"], "'table'")

    series_raw = raw["series"]
    if not isinstance(series_raw, list):
        raise SpecError("'series' must be a list")
    series = []
    for k, entry in enumerate(series_raw):
        entry = _require_mapping(entry, f"series[{k}]")
        _reject_unknown(entry, _SERIES_KEYS, f"series[{k}]")
        if "column" not in entry:
            raise SpecError(f"series[{k}] needs a 'column'")
        if entry.get("table") is not None:
            table = _resolve(base, entry["table"], f"series[{k}] 'table'")
        elif default_table is not None:
            table = default_table
        else:
            raise SpecError(
                f"series[{k}] has no 'table' and the spec sets no default"
            )
        sigma = entry.get("sigma")
        series.append(
            SeriesSpec(
                table=table,
                column=str(entry["column"]),
                label=str(entry.get("label", entry["column"])),
                sigma=None if sigma is None else str(sigma),
            )
        )

    fit = None
    if raw.get("fit") is not None:
        fit = _resolve(base, raw["fit"], "'fit'")

    marker_x = raw.get("marker_x")
    if marker_x is not None:
        try:
            marker_x = float(marker_x)
        except (TypeError, ValueError):
            raise SpecError("'marker_x' must be a number") from None

    return FigureSpec(
        panel=panel,
        output=output,
        x=x,
        series=tuple(series),
        title=None if raw.get("title") is None else str(raw["title"]),
        y_label=None if raw.get("y_label") is None else str(raw["y_label"]),
        fit=fit,
        marker_x=marker_x,
        logx=bool(raw.get("logx", panel == "sensitivity")),
        logy=bool(raw.get("logy", panel == "sensitivity")),
    )
