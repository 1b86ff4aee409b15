"""Run every reference configuration through the command line.

Produces the full output corpus under the chosen directory, one
subdirectory per configuration (CSV tables, JSON summaries, and a
run manifest each).  The corpus is what downstream consumers — the
figure package, notebooks, regression comparisons — read; they never
import the simulation internals.

The dynamics-heavy scans take a few minutes each; the whole suite is
roughly ten minutes on one core.  Use --only to run a subset, e.g.

    python scripts/run_reference_suite.py --out runs --only fmi_spiral
"""

from __future__ import annotations

import argparse
import pathlib
import sys
import time

from spintex.cli import main as cli_main

CONFIG_DIR = pathlib.Path(__file__).resolve().parents[1] / "configs"

# config stem -> subcommand
SUITE = {
    "quench_no_spiral": "simulate-quench",
    "quench_parallel": "simulate-quench",
    "quench_perpendicular": "simulate-quench",
    "anisotropy_scan": "scan",
    "wavevector_scan": "scan",
    "fmi_spiral": "fmi",
    "wind_unwind_revival": "fmi",
    "analytics_shell_sweep": "analytics",
    "analytics_moment_pump": "analytics",
    "pumping_fit": "fit-pumping",
    "compile_xy4": "compile-sequence",
    "compile_isotropic": "compile-sequence",
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--out", type=pathlib.Path, required=True,
        help="corpus root; one subdirectory per configuration",
    )
    parser.add_argument(
        "--only", action="append", default=None, metavar="STEM",
        help="run only these configuration stems (repeatable)",
    )
    parser.add_argument(
        "--workers", type=int, default=1,
        help="trajectory worker processes for the dynamics runs",
    )
    args = parser.parse_args(argv)

    stems = args.only if args.only else list(SUITE)
    unknown = sorted(set(stems) - set(SUITE))
    if unknown:
        parser.error(f"unknown configuration stems: {unknown}")

    failures = []
    for stem in stems:
        config = CONFIG_DIR / f"{stem}.yaml"
        out_dir = args.out / stem
        t0 = time.time()
        print(f"=== {stem} ({SUITE[stem]})", flush=True)
        rc = cli_main(
            [
                SUITE[stem],
                "--config", str(config),
                "--out", str(out_dir),
                "--workers", str(args.workers),
            ]
        )
        print(f"    -> exit {rc} in {time.time() - t0:.1f}s", flush=True)
        if rc != 0:
            failures.append(stem)
    if failures:
        print(f"FAILED: {failures}", file=sys.stderr)
        return 1
    print(f"corpus complete under {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
