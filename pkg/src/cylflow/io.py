"""Diagnostics CSV, binary field dumps, JSON reports and run manifests.

Everything except the manifest is a pure function of (config, code version),
so reruns reproduce those files byte for byte. Timestamps and host details
live only in the manifest.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import platform
import struct
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .diagnostics import CSV_COLUMNS, DiagnosticsRow
from .errors import CylflowError
from .grid import Grid, Parity, ScalarField

FIELD_MAGIC = b"CYLFLDv1"
FIELD_VERSION = 1
_HEADER = struct.Struct("<8sqqqd")  # magic, version, nr, nz, z_len
MANIFEST_VERSION = 1


class OutputError(CylflowError, OSError):
    def __init__(self, message, written=()):
        self.written = list(written)
        super().__init__(f"{message}; files written so far: {self.written}")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(path, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row.values()])
    return path


def read_csv(path) -> list:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != tuple(CSV_COLUMNS):
            raise ValueError(f"unexpected CSV header in {path}")
        return [DiagnosticsRow.from_values(line) for line in r if line]


def write_field(path, f: ScalarField) -> Path:
    """Header (magic, version, nr, nz, z_len), then row-major little-endian float64 values."""
    g = f.grid
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(FIELD_MAGIC, FIELD_VERSION, g.nr, g.nz, float(g.z_len)))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())
    return path


def read_field(path, parity=Parity.EVEN) -> ScalarField:
    data = Path(path).read_bytes()
    magic, version, nr, nz, z_len = _HEADER.unpack_from(data)
    if magic != FIELD_MAGIC or version != FIELD_VERSION:
        raise ValueError(f"{path}: not a field dump (magic {magic!r}, version {version})")
    vals = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if vals.size != nr * nz:
        raise ValueError(f"{path}: expected {nr * nz} values, found {vals.size}")
    return ScalarField(Grid(int(nr), int(nz), float(z_len)), vals.reshape(nr, nz).astype(float), parity)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir, command: str, config, files, threads: int, extra=None) -> Path:
    """Record how to reproduce the run: resolved config, its hash, code version, file hashes."""
    out_dir = Path(out_dir)
    files = sorted({Path(p).resolve() for p in files})
    entries = [{"path": str(p.relative_to(out_dir.resolve())), "sha256": sha256_file(p)} for p in files]
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "config": config.resolved(),
        "config_hash": config.hash(),
        "defaults_applied": config.defaults_applied,
        "code_version": __version__,
        "backend": kernels.BACKEND,
        "threads": threads,
        "files": entries,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    if extra:
        manifest.update(extra)
    return write_json(out_dir / "manifest.json", manifest)


def write_outputs(out_dir, command: str, config, rows=None, state=None, report=None, threads: int = 1,
                  extra_files=()):
    """Write diagnostics.csv, field.bin, report.json (whichever apply) and manifest.json.

    Returns the manifest path. An I/O failure raises ``OutputError`` listing
    the files already written.
    """
    out_dir = Path(out_dir)
    written = list(extra_files)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if rows is not None:
            written.append(write_csv(out_dir / "diagnostics.csv", rows))
        if state is not None and config.output["field_dump"]:
            written.append(write_field(out_dir / "field.bin", state.Omega))
        if report is not None:
            written.append(write_json(out_dir / "report.json", report))
        return write_manifest(out_dir, command, config, written, threads)
    except OSError as exc:
        raise OutputError(str(exc), written) from exc
