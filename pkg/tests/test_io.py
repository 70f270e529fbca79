import json

import numpy as np
import pytest
from scipy.io import wavfile

from groundsound.io import read_csv, resample, write_csv, write_manifest, write_snapshots, write_wav
from groundsound.radiation import PressureTrace


def test_csv_roundtrip(tmp_path):
    t = np.linspace(0, 1, 7)
    p = np.sin(t) * 1e-7
    write_csv(tmp_path / "a.csv", {"t": t, "p": p}, text_columns={"tag": list("abcdefg")})
    back = read_csv(tmp_path / "a.csv")
    np.testing.assert_array_equal(back["t"], t)
    np.testing.assert_array_equal(back["p"], p)
    assert list(back["tag"]) == list("abcdefg")
    with pytest.raises(ValueError):
        write_csv(tmp_path / "b.csv", {"t": t, "p": p[:3]})


def test_wav_and_sidecar(tmp_path):
    rate = 200_000.0
    t = np.arange(4000) / rate
    tr = PressureTrace(rate, -1e-3, 3.0 * np.sin(2 * np.pi * 1000 * t))
    meta = write_wav(tmp_path / "x.wav", tr, rate=44100)
    sr, data = wavfile.read(tmp_path / "x.wav")
    assert sr == 44100 and data.dtype == np.float32
    assert np.abs(data).max() == pytest.approx(1.0, rel=1e-6)
    side = json.loads((tmp_path / "x.json").read_text())
    assert side == json.loads(json.dumps(meta))
    assert side["full_scale_pa"] == pytest.approx(3.0, rel=1e-2)
    assert side["start_time"] == -1e-3


def test_resample_removes_ultrasound():
    rate = 400_000.0
    t = np.arange(20000) / rate
    tr = PressureTrace(rate, 0.0, np.sin(2 * np.pi * 1000 * t) + np.sin(2 * np.pi * 60_000 * t))
    y = resample(tr, 44100)
    tt = np.arange(len(y)) / 44100
    mid = slice(200, -200)
    np.testing.assert_allclose(y[mid], np.sin(2 * np.pi * 1000 * tt)[mid], atol=2e-3)


def test_manifest_deterministic(tmp_path):
    payload = {"b": np.arange(3), "a": 1 + 2j, "c": (np.float64(1.5), float("inf"))}
    write_manifest(tmp_path / "m1.json", payload)
    write_manifest(tmp_path / "m2.json", dict(reversed(payload.items())))
    assert (tmp_path / "m1.json").read_text() == (tmp_path / "m2.json").read_text()
    data = json.loads((tmp_path / "m1.json").read_text())
    assert data["a"] == {"re": 1.0, "im": 2.0} and data["c"] == [1.5, "inf"]


def test_snapshots(tmp_path):
    frames = np.random.default_rng(0).normal(size=(3, 4, 5))
    path = write_snapshots(tmp_path / "s", np.array([0.0, 1.0, 2.0]), frames, {"spacing": 0.01})
    back = np.fromfile(path, dtype="<f4").reshape(3, 4, 5)
    np.testing.assert_allclose(back, frames, rtol=1e-6)
    head = json.loads((tmp_path / "s.json").read_text())
    assert head["shape"] == [3, 4, 5] and head["spacing"] == 0.01
