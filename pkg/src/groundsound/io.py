"""Output writers: CSV tables, float WAV clips with sidecar metadata, run manifests, snapshots."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from pathlib import Path

import numpy as np
from scipy import signal
from scipy.io import wavfile

from .radiation import PressureTrace

#: Full precision for doubles, so reruns diff cleanly.
CSV_FORMAT = "%.16e"


def write_csv(path, columns: dict[str, np.ndarray], text_columns: dict[str, list[str]] | None = None) -> Path:
    """Write equal-length columns with a header row; numbers in 17-digit scientific notation."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[k], dtype=float).ravel() for k in names]
    n = len(data[0]) if data else 0
    if any(len(d) != n for d in data):
        raise ValueError("CSV columns differ in length")
    text_columns = text_columns or {}
    with open(path, "w", newline="") as fh:
        fh.write(",".join(names + list(text_columns)) + "\n")
        for i in range(n):
            row = [CSV_FORMAT % d[i] for d in data] + [str(v[i]) for v in text_columns.values()]
            fh.write(",".join(row) + "\n")
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    """Numeric columns of a CSV written by :func:`write_csv`."""
    with open(path) as fh:
        names = fh.readline().strip().split(",")
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1, dtype=str))
    out = {}
    for j, name in enumerate(names):
        try:
            out[name] = data[:, j].astype(float)
        except ValueError:
            out[name] = data[:, j]
    return out


def trace_columns(trace: PressureTrace, name: str = "p") -> dict[str, np.ndarray]:
    return {"t": trace.times, name: trace.samples}


def resample(trace: PressureTrace, rate: float) -> np.ndarray:
    """Band-limit to 0.45 ``rate`` when downsampling, then interpolate onto the new clock."""
    x = trace.samples
    if rate < trace.sample_rate and len(x) > 30:
        sos = signal.butter(8, 0.45 * rate, fs=trace.sample_rate, output="sos")
        x = signal.sosfiltfilt(sos, x)
    duration = (len(trace.samples) - 1) / trace.sample_rate
    n = int(math.floor(duration * rate)) + 1
    t_new = np.arange(n) / rate
    return np.interp(t_new, np.arange(len(x)) / trace.sample_rate, x)


def write_wav(path, trace: PressureTrace, rate: float = 44100, normalize_to: float | None = None) -> dict:
    """32-bit float mono WAV plus a ``.json`` sidecar recording the normalization.

    Samples are divided by ``normalize_to`` (Pa mapped to full scale) or, by
    default, by the clip peak. Returns the sidecar contents.
    """
    path = Path(path)
    data = resample(trace, rate)
    peak = float(np.max(np.abs(data))) if data.size else 0.0
    scale = normalize_to if normalize_to else (peak if peak > 0 else 1.0)
    wavfile.write(path, int(round(rate)), (data / scale).astype(np.float32))
    meta = {
        "sample_rate": int(round(rate)),
        "start_time": trace.start_time,
        "full_scale_pa": scale,
        "peak_pa": peak,
        "source_sample_rate": trace.sample_rate,
    }
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return meta


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, os.PathLike):
        return os.fspath(obj)
    return obj


def write_manifest(path, payload: dict) -> Path:
    """JSON manifest with sorted keys; dataclasses, arrays and complex numbers are expanded."""
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_snapshots(path, times: np.ndarray, frames: np.ndarray, meta: dict | None = None) -> Path:
    """Frames as flat little-endian float32 (``.bin``) plus a ``.json`` header with shape and times."""
    path = Path(path)
    frames = np.ascontiguousarray(frames, dtype="<f4")
    frames.tofile(path.with_suffix(".bin"))
    header = {"dtype": "float32-le", "shape": list(frames.shape), "times": np.asarray(times).tolist()}
    header.update(meta or {})
    with open(path.with_suffix(".json"), "w") as fh:
        json.dump(_jsonable(header), fh, indent=2, sort_keys=True)
    return path.with_suffix(".bin")
