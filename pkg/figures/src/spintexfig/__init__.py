"""spintexfig: publication-style figures from spintex output corpora.

Renders panels (precession traces, parameter scans, reconstructed
profiles, exchange-sensitivity curves) from the CSV tables and JSON
summaries the ``spintex`` command line writes.  Rendering is read-only
display: every number drawn comes verbatim from an input file and is
echoed into a sidecar JSON next to the image for mechanical auditing.
"""

from .io import read_json, read_table, sha256_file
from .panels import render_panel
from .spec import AxisSpec, FigureSpec, SeriesSpec, SpecError, load_spec

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "FigureSpec",
    "SeriesSpec",
    "SpecError",
    "load_spec",
    "read_json",
    "read_table",
    "render_panel",
    "sha256_file",
    "__version__",
]
