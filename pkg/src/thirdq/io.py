"""CSV emission and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
from pathlib import Path

import numpy as np

SCHEMAS = {
    "density": ("t", "x", "P"),
    "joint_density": ("t", "x_j", "x_k", "P"),
    "coherence": ("theta", "delta", "C"),
    "observables": ("t", "x_mean_j", "x_mean_k", "photons_j", "photons_k",
                    "oscillatons_j", "oscillatons_k"),
    "verify": ("observable", "state", "t", "max_abs_dev", "tolerance", "pass"),
    "wigner": ("x", "p", "W"),
    "ratio_sweep": ("gamma", "R_closed_form", "R_pipeline"),
    "rate_vs_detuning": ("detuning", "Gamma_closed_form", "Gamma_pipeline"),
    "omega_prime_vs_mass": ("m", "omega_prime"),
    "scattering_point": ("quantity", "value"),
    "gamma_oracle": ("epsilon", "omega", "Omega", "gamma_closed_form", "gamma_oracle", "ratio"),
}


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.16e}"


def emit_csv(path, rows, schema) -> Path:
    """Write ``rows`` under header ``schema``; 17 significant digits, LF endings."""
    columns = SCHEMAS[schema] if isinstance(schema, str) else tuple(schema)
    path = Path(path)
    formatted = []
    for row in rows:
        row = list(row)
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, schema {columns} expects {len(columns)}")
        formatted.append([format_value(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(formatted)
    return path


def read_csv(path):
    """Header and float/str rows back from an emitted file."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[_parse(v) for v in fields] for fields in reader]
    return header, rows


def _parse(v: str):
    try:
        return float(v)
    except ValueError:
        return v


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, manifest: dict, files) -> Path:
    """Digest every output file and write manifest.json last."""
    out_dir = Path(out_dir)
    manifest = dict(manifest)
    manifest["files"] = {Path(f).name: sha256(f) for f in sorted(files, key=lambda p: Path(p).name)}
    path = out_dir / "manifest.json"
    tmp = out_dir / "manifest.json.tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)
