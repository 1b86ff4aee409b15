"""Run manifests: provenance and integrity records for CLI output sets.

Every command writes ``run_manifest.json`` next to its data files.  The
manifest records the command name, the SHA-256 of the config that
produced the run, the effective seeds, and the SHA-256 + size of every
output file.  ``--verify`` recomputes a run and compares the fresh
hashes against a stored manifest without touching the files, so any
drift between code versions or machines is caught byte-exactly.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from collections.abc import Mapping
from pathlib import Path

__all__ = [
    "MANIFEST_NAME",
    "ManifestError",
    "sha256_bytes",
    "sha256_file",
    "build_manifest",
    "write_manifest",
    "load_manifest",
    "verify_files",
    "compare_outputs",
]

MANIFEST_NAME = "run_manifest.json"


class ManifestError(ValueError):
    pass


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    return sha256_bytes(Path(path).read_bytes())


def build_manifest(
    command: str,
    config_path,
    config_bytes: bytes,
    outputs: Mapping[str, bytes],
    seeds: Mapping[str, int | None],
    workers: int,
    version: str,
) -> dict:
    return {
        "command": command,
        "config": {
            "path": str(config_path),
            "sha256": sha256_bytes(config_bytes),
        },
        "seeds": {k: v for k, v in seeds.items()},
        "workers": int(workers),
        "version": version,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(
            timespec="seconds"
        ),
        "outputs": {
            name: {"sha256": sha256_bytes(data), "bytes": len(data)}
            for name, data in outputs.items()
        },
    }


def write_manifest(out_dir, manifest: Mapping) -> Path:
    path = Path(out_dir) / MANIFEST_NAME
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    path.write_bytes(text.encode("ascii"))
    return path


def load_manifest(out_dir) -> dict:
    path = Path(out_dir) / MANIFEST_NAME
    if not path.is_file():
        raise ManifestError(f"no {MANIFEST_NAME} in '{out_dir}'")
    with open(path, "r", encoding="ascii") as fh:
        manifest = json.load(fh)
    if "outputs" not in manifest:
        raise ManifestError(f"'{path}' has no outputs section")
    return manifest


def verify_files(manifest: Mapping, out_dir) -> list[str]:
    """Describe every on-disk file that differs from the manifest record."""
    problems = []
    out_dir = Path(out_dir)
    for name, record in sorted(manifest["outputs"].items()):
        path = out_dir / name
        if not path.is_file():
            problems.append(f"{name}: recorded in manifest but missing on disk")
            continue
        fresh = sha256_file(path)
        if fresh != record["sha256"]:
            problems.append(
                f"{name}: file on disk differs from manifest "
                f"(stored {record['sha256'][:12]}.., found {fresh[:12]}..)"
            )
    return problems


def compare_outputs(
    manifest: Mapping, outputs: Mapping[str, bytes]
) -> list[str]:
    """Describe every mismatch between stored and freshly computed outputs."""
    problems = []
    recorded = manifest["outputs"]
    for name in sorted(set(recorded) | set(outputs)):
        if name not in outputs:
            problems.append(f"{name}: recorded in manifest but not recomputed")
        elif name not in recorded:
            problems.append(f"{name}: recomputed but absent from manifest")
        else:
            fresh = sha256_bytes(outputs[name])
            stored = recorded[name]["sha256"]
            if fresh != stored:
                problems.append(
                    f"{name}: sha256 drift (stored {stored[:12]}.., "
                    f"recomputed {fresh[:12]}..)"
                )
    return problems
