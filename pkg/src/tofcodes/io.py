"""Serialization of configs, matrices, code files, shift vectors and CSV tables.

All writers produce canonical bytes (fixed key order, ``repr`` floats, ``\\n``
line endings) so equal content always hashes to the same digest.
"""
import csv
import hashlib
import io as _io
import json
from pathlib import Path

import numpy as np

from .model import BinaryCodeMatrix, CameraConfig, SensingMatrix, ShiftVector

CONFIG_KEYS = ("f_m_mhz", "f_r_mhz", "n_steps", "fwhm_ns", "m", "n_deg")


def config_to_dict(cfg):
    return {
        "f_m_mhz": cfg.f_m,
        "f_r_mhz": cfg.f_r,
        "n_steps": cfg.n_steps,
        "fwhm_ns": cfg.fwhm,
        "m": cfg.m,
        "n_deg": cfg.n_deg,
    }


def config_from_dict(d):
    missing = [k for k in CONFIG_KEYS if k not in d]
    if missing:
        raise ValueError(f"config is missing keys: {', '.join(missing)}")
    return CameraConfig(
        f_m=float(d["f_m_mhz"]),
        f_r=float(d["f_r_mhz"]),
        n_steps=int(d["n_steps"]),
        fwhm=float(d["fwhm_ns"]),
        m=int(d["m"]),
        n_deg=int(d["n_deg"]),
    )


def read_config(path):
    with open(path) as f:
        return config_from_dict(json.load(f))


def dumps(obj):
    return json.dumps(obj, indent=None, separators=(",", ":"), sort_keys=False) + "\n"


def matrix_to_dict(a, dt=None):
    data = np.asarray(getattr(a, "data", getattr(a, "entries", a)))
    if data.dtype.kind in "ui":
        values = [int(v) for v in data.ravel()]
    else:
        values = [float(v) for v in data.ravel()]
    d = {"rows": int(data.shape[0]), "cols": int(data.shape[1]), "data": values}
    if dt is not None:
        d["dt_ns"] = float(dt)
    return d


def matrix_from_dict(d):
    rows, cols = int(d["rows"]), int(d["cols"])
    data = np.asarray(d["data"], dtype=float)
    if data.size != rows * cols:
        raise ValueError(f"matrix data has {data.size} entries, expected {rows}x{cols}")
    return SensingMatrix(data.reshape(rows, cols), float(d.get("dt_ns", 1.0)))


def write_matrix(path, a, dt=None):
    write_text(path, dumps(matrix_to_dict(a, dt)))


def read_matrix(path):
    with open(path) as f:
        return matrix_from_dict(json.load(f))


def codes_to_text(code):
    return "".join("".join(str(int(v)) for v in row) + "\n" for row in code.entries)


def codes_from_text(text):
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows or any(set(r) - {"0", "1"} for r in rows):
        raise ValueError("a .codes file holds one 0/1 string per row")
    if len({len(r) for r in rows}) != 1:
        raise ValueError("code rows differ in length")
    return BinaryCodeMatrix(np.array([[int(c) for c in r] for r in rows], dtype=np.uint8))


def shifts_to_text(shifts):
    return dumps(list(shifts))


def shifts_from_text(text, n_samples=None):
    return ShiftVector(json.loads(text), n_samples)


def csv_text(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_text(path, text):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(text)


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
