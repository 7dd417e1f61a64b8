"""File formats: device-parameter and CPR configs, trace CSVs, result tables.

CSV output uses a header row, UTF-8, '.' decimals and shortest round-trip
float formatting, so identical inputs produce byte-identical files. Every
table gets a JSON sidecar with the column units and the resolved
configuration that produced it.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .core import CurrentPhaseRelation, DeviceParams

_DEVICE_KEYS = {"ej_i_1", "ej_i_2", "ej_s_1", "ej_s_2", "ej_c", "e_c", "skew_1", "skew_2"}
_CPR_KEYS = {"kind", "amplitude", "skew", "offset", "samples", "csv"}


def load_device_params(source) -> DeviceParams:
    """DeviceParams from a JSON file path or an already-parsed mapping.

    Unknown keys are rejected.
    """
    data = _load_mapping(source)
    unknown = set(data) - _DEVICE_KEYS
    if unknown:
        raise ValueError(f"unknown device-parameter keys: {sorted(unknown)}")
    return DeviceParams(**data)


def load_cpr(source, base_dir: Path = None) -> CurrentPhaseRelation:
    """CurrentPhaseRelation from a JSON mapping or file.

    Tabulated CPRs may inline 'samples' as [[flux, f], ...] or point 'csv'
    at a two-column file (flux_phi0, f_ghz) with a header row.
    """
    data = _load_mapping(source)
    unknown = set(data) - _CPR_KEYS
    if unknown:
        raise ValueError(f"unknown CPR keys: {sorted(unknown)}")
    kind = data.get("kind")
    if kind == "tabulated":
        if "csv" in data:
            path = Path(data["csv"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            flux, freq = load_tabulated_csv(path)
        else:
            samples = data.get("samples")
            if not samples:
                raise ValueError("tabulated CPR needs 'samples' or 'csv'")
            flux = [s[0] for s in samples]
            freq = [s[1] for s in samples]
        return CurrentPhaseRelation.tabulated(flux, freq)
    kwargs = {k: v for k, v in data.items() if k in ("kind", "amplitude", "skew", "offset")}
    return CurrentPhaseRelation(**kwargs)


def _load_mapping(source) -> dict:
    if isinstance(source, dict):
        return dict(source)
    with open(source, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{source}: expected a JSON object")
    return data


def load_tabulated_csv(path):
    """Two-column (flux_phi0, f_ghz) CSV with a header row."""
    flux, freq = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)  # header
        for row in reader:
            if not row:
                continue
            flux.append(float(row[0]))
            freq.append(float(row[1]))
    return np.asarray(flux), np.asarray(freq)


def load_trace_csv(path):
    """Trace CSV: (x, y) columns, or (f, re, im) for complex data.

    Returns (x, y) with y complex when three columns are present.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    ncol = len(header)
    if ncol == 2:
        x = np.array([float(r[0]) for r in rows])
        y = np.array([float(r[1]) for r in rows])
        return x, y
    if ncol == 3:
        x = np.array([float(r[0]) for r in rows])
        y = np.array([float(r[1]) for r in rows]) + 1j * np.array([float(r[2]) for r in rows])
        return x, y
    raise ValueError(f"{path}: expected 2 or 3 columns, found {ncol}")


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    """Write rows (dicts keyed by the header) with round-trip float text."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(row.get(col)) for col in header])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def write_sidecar(path, payload: dict) -> None:
    """Deterministic JSON sidecar (sorted keys, no timestamps)."""
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                          encoding="utf-8")


def load_table_csv(path):
    """Generic reader for the toolkit's own CSV tables.

    Returns (header, rows) with numeric cells parsed back to float (the
    writer's repr formatting makes this lossless) and empty cells as None.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = []
        for raw in reader:
            row = {}
            for col, cell in zip(header, raw):
                if cell == "":
                    row[col] = None
                else:
                    try:
                        row[col] = float(cell)
                    except ValueError:
                        row[col] = cell
            rows.append(row)
    return header, rows


def write_trace_csv(path, x, y, names=("x", "y")) -> None:
    y = np.asarray(y)
    if np.iscomplexobj(y):
        header = [names[0], "re", "im"]
        rows = [{names[0]: float(a), "re": float(b.real), "im": float(b.imag)}
                for a, b in zip(x, y)]
    else:
        header = list(names)
        rows = [{names[0]: float(a), names[1]: float(b)} for a, b in zip(x, y)]
    write_csv(path, header, rows)
